//! Distance from a point to a convex set given only its support mapping.
//!
//! This is the Gilbert–Johnson–Keerthi iteration: a fully corrective
//! Frank–Wolfe scheme whose active set is a simplex of support points. Each
//! step yields a certified bracket `lower ≤ dist ≤ upper`, where `upper` is
//! the norm of the current iterate and `lower` comes from the supporting
//! half-space in the direction of the iterate. The bracket doubles as the
//! stopping rule and lets threshold queries ("is dist ≤ t?") exit early.

use crate::error::{Error, Result};
use crate::linalg::{dot, solve_small};

/// Anything that can report a maximizer of `⟨x, u⟩`.
pub trait SupportMap {
    fn dim(&self) -> usize;
    /// Writes a point of the set maximizing `⟨x, u⟩` into `out`.
    fn support_point(&self, u: &[f64], out: &mut [f64]);
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GjkOptions {
    /// Absolute gap at which the bracket counts as converged.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for GjkOptions {
    fn default() -> Self {
        GjkOptions { tol: 1e-9, max_iter: 10_000 }
    }
}

impl GjkOptions {
    /// Tight settings for nearest-point queries.
    pub fn precise() -> Self {
        GjkOptions { tol: 1e-13, max_iter: 10_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Upper bound fell to the threshold.
    Within,
    /// Lower bound exceeded the threshold.
    Beyond,
    /// Bracket closed to tolerance (or could not shrink further).
    Converged,
}

#[derive(Clone, Debug)]
pub struct GjkOutcome {
    pub lower: f64,
    pub upper: f64,
    /// Nearest point found so far (a point of the set).
    pub closest: Vec<f64>,
    pub iterations: usize,
    pub verdict: Verdict,
}

impl GjkOutcome {
    /// Whether the distance is at most `threshold`, allowing `tol` slack.
    pub fn within(&self, threshold: f64, tol: f64) -> bool {
        match self.verdict {
            Verdict::Within => true,
            Verdict::Beyond => false,
            Verdict::Converged => self.upper <= threshold + tol,
        }
    }
}

/// Active simplex stored relative to the query point.
struct Simplex {
    d: usize,
    pts: Vec<f64>,
    len: usize,
}

impl Simplex {
    fn new(d: usize) -> Self {
        Simplex { d, pts: vec![0.0; d * (d + 2)], len: 0 }
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.pts[i * self.d..(i + 1) * self.d]
    }

    fn push(&mut self, p: &[f64]) {
        if self.len == self.d + 2 {
            // Numerically degenerate simplex; drop the oldest point.
            self.pts.copy_within(self.d.., 0);
            self.len -= 1;
        }
        let d = self.d;
        self.pts[self.len * d..(self.len + 1) * d].copy_from_slice(p);
        self.len += 1;
    }

    /// Replaces the simplex by the face carrying its minimum-norm point and
    /// writes that point into `v`.
    fn reduce_to_min_norm(&mut self, v: &mut [f64]) {
        let d = self.d;
        let k = self.len;
        let mut best_norm = f64::INFINITY;
        let mut best_mask = 0u32;
        let mut best_lambda = [0.0f64; 16];
        let mut idx = [0usize; 16];
        let mut gram = [0.0f64; 256];
        let mut rhs = [0.0f64; 16];
        let mut lam = [0.0f64; 16];
        let mut cand = vec![0.0; d];
        // Visit faces in order of increasing size so that ties keep the
        // smaller face.
        let mut masks: Vec<u32> = (1u32..(1u32 << k)).collect();
        masks.sort_by_key(|m| m.count_ones());
        let scale = (0..k).map(|i| dot(self.point(i), self.point(i))).fold(0.0, f64::max).max(1e-300);
        for &mask in &masks {
            let mut s = 0;
            for i in 0..k {
                if mask & (1 << i) != 0 {
                    idx[s] = i;
                    s += 1;
                }
            }
            if s > d + 1 {
                continue;
            }
            let p0 = self.point(idx[0]);
            if s == 1 {
                lam[0] = 1.0;
            } else {
                let m = s - 1;
                for a in 0..m {
                    let ea = self.point(idx[a + 1]);
                    for b in a..m {
                        let eb = self.point(idx[b + 1]);
                        let mut g = 0.0;
                        for t in 0..d {
                            g += (ea[t] - p0[t]) * (eb[t] - p0[t]);
                        }
                        gram[a * m + b] = g;
                        gram[b * m + a] = g;
                    }
                    let mut r = 0.0;
                    for t in 0..d {
                        r -= (ea[t] - p0[t]) * p0[t];
                    }
                    rhs[a] = r;
                }
                if !solve_small(&mut gram[..m * m], &mut rhs[..m], m, 1e-12) {
                    continue;
                }
                let mut sum = 0.0;
                let mut ok = true;
                for a in 0..m {
                    lam[a + 1] = rhs[a];
                    sum += rhs[a];
                    if rhs[a] <= 0.0 {
                        ok = false;
                    }
                }
                lam[0] = 1.0 - sum;
                if !ok || lam[0] <= 0.0 {
                    continue;
                }
            }
            cand.iter_mut().for_each(|c| *c = 0.0);
            for a in 0..s {
                let p = self.point(idx[a]);
                for t in 0..d {
                    cand[t] += lam[a] * p[t];
                }
            }
            let nn = dot(&cand, &cand);
            if nn < best_norm - 1e-15 * scale {
                best_norm = nn;
                best_mask = mask;
                best_lambda[..s].copy_from_slice(&lam[..s]);
                v.copy_from_slice(&cand);
            }
        }
        // Compact to the winning face.
        let mut w = 0;
        for i in 0..k {
            if best_mask & (1 << i) != 0 {
                if w != i {
                    self.pts.copy_within(i * d..(i + 1) * d, w * d);
                }
                w += 1;
            }
        }
        self.len = w;
        let _ = best_lambda;
    }
}

/// Brackets the distance from `query` to the convex set. With a
/// `threshold`, stops as soon as the bracket decides `dist ≤ threshold`.
pub fn gjk<S: SupportMap + ?Sized>(
    set: &S,
    query: &[f64],
    threshold: Option<f64>,
    opts: &GjkOptions,
) -> Result<GjkOutcome> {
    let d = set.dim();
    assert!(d <= 14, "support-map dimension too large");
    let mut simplex = Simplex::new(d);
    let mut w = vec![0.0; d];
    let mut dir = vec![0.0; d];
    let mut v = vec![0.0; d];

    dir[0] = 1.0;
    set.support_point(&dir, &mut w);
    for t in 0..d {
        w[t] -= query[t];
    }
    simplex.push(&w);
    v.copy_from_slice(&w);
    let mut lower: f64 = 0.0;
    let mut upper = dot(&v, &v).sqrt();
    // Iterates below this are rounding noise: the query is in the set.
    let mut floor = 1e-13 * upper;

    let finish = |v: &[f64], lower: f64, upper: f64, iterations: usize, verdict: Verdict| GjkOutcome {
        lower: lower.min(upper),
        upper,
        closest: v.iter().zip(query).map(|(a, b)| a + b).collect(),
        iterations,
        verdict,
    };

    for iter in 0..opts.max_iter {
        if upper <= 1e-300 {
            return Ok(finish(&v, 0.0, 0.0, iter, Verdict::Converged));
        }
        if let Some(t) = threshold {
            if upper <= t {
                return Ok(finish(&v, lower, upper, iter, Verdict::Within));
            }
        }
        for t in 0..d {
            dir[t] = -v[t];
        }
        set.support_point(&dir, &mut w);
        for t in 0..d {
            w[t] -= query[t];
        }
        floor = floor.max(1e-13 * dot(&w, &w).sqrt());
        lower = lower.max(dot(&v, &w) / upper);
        if let Some(t) = threshold {
            if lower > t {
                return Ok(finish(&v, lower, upper, iter, Verdict::Beyond));
            }
        }
        if upper - lower <= opts.tol {
            // Inside the bracket resolution a threshold query counts as met.
            let verdict = match threshold {
                Some(t) if upper <= t + opts.tol => Verdict::Within,
                _ => Verdict::Converged,
            };
            return Ok(finish(&v, lower, upper, iter, verdict));
        }
        simplex.push(&w);
        let mut nv = vec![0.0; d];
        simplex.reduce_to_min_norm(&mut nv);
        let nu = dot(&nv, &nv).sqrt();
        if nu <= floor {
            return Ok(finish(&vec![0.0; d], 0.0, 0.0, iter + 1, Verdict::Converged));
        }
        if nu >= upper * (1.0 - 1e-14) {
            // No further progress is representable in floating point.
            return Ok(finish(&v, lower, upper, iter, Verdict::Converged));
        }
        v = nv;
        upper = nu;
    }
    Err(Error::NoConvergence { iterations: opts.max_iter, gap: upper - lower })
}

/// Minkowski sum of several support maps.
pub struct SumMap<'a, S: SupportMap + ?Sized> {
    pub parts: &'a [&'a S],
}

impl<S: SupportMap + ?Sized> SupportMap for SumMap<'_, S> {
    fn dim(&self) -> usize {
        self.parts[0].dim()
    }

    fn support_point(&self, u: &[f64], out: &mut [f64]) {
        let mut tmp = vec![0.0; out.len()];
        out.iter_mut().for_each(|o| *o = 0.0);
        for p in self.parts {
            p.support_point(u, &mut tmp);
            for (o, t) in out.iter_mut().zip(&tmp) {
                *o += t;
            }
        }
    }
}

/// Convex hull of a finite point set.
pub struct PointCloud<'a> {
    pub dim: usize,
    pub points: &'a [Vec<f64>],
}

impl SupportMap for PointCloud<'_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn support_point(&self, u: &[f64], out: &mut [f64]) {
        let mut best = f64::NEG_INFINITY;
        let mut arg = 0;
        for (i, p) in self.points.iter().enumerate() {
            let s = dot(p, u);
            if s > best {
                best = s;
                arg = i;
            }
        }
        out.copy_from_slice(&self.points[arg]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Disk {
        c: [f64; 2],
        r: f64,
    }

    impl SupportMap for Disk {
        fn dim(&self) -> usize {
            2
        }
        fn support_point(&self, u: &[f64], out: &mut [f64]) {
            let n = (u[0] * u[0] + u[1] * u[1]).sqrt().max(1e-300);
            out[0] = self.c[0] + self.r * u[0] / n;
            out[1] = self.c[1] + self.r * u[1] / n;
        }
    }

    fn square() -> Vec<Vec<f64>> {
        vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]
    }

    #[test]
    fn polytope_distance_is_exact() {
        let pts = square();
        let cloud = PointCloud { dim: 2, points: &pts };
        let out = gjk(&cloud, &[2.0, 0.5], None, &GjkOptions::precise()).unwrap();
        assert!((out.upper - 1.0).abs() < 1e-13);
        assert!((out.closest[0] - 1.0).abs() < 1e-13 && (out.closest[1] - 0.5).abs() < 1e-13);
        let corner = gjk(&cloud, &[2.0, 2.0], None, &GjkOptions::precise()).unwrap();
        assert!((corner.upper - 2f64.sqrt()).abs() < 1e-13);
        let inside = gjk(&cloud, &[0.3, 0.6], None, &GjkOptions::precise()).unwrap();
        assert!(inside.upper < 1e-12);
    }

    #[test]
    fn curved_set_converges_to_tolerance() {
        let disk = Disk { c: [0.0, 0.0], r: 1.0 };
        let out = gjk(&disk, &[3.0, 4.0], None, &GjkOptions::precise()).unwrap();
        assert!((out.upper - 4.0).abs() < 1e-10, "{}", out.upper);
        assert!(out.lower <= out.upper);
    }

    #[test]
    fn threshold_queries_exit_early() {
        let disk = Disk { c: [0.0, 0.0], r: 1.0 };
        let far = gjk(&disk, &[10.0, 0.0], Some(0.5), &GjkOptions::default()).unwrap();
        assert_eq!(far.verdict, Verdict::Beyond);
        let near = gjk(&disk, &[1.2, 0.0], Some(0.5), &GjkOptions::default()).unwrap();
        assert!(near.within(0.5, 1e-9));
    }

    #[test]
    fn sum_of_disk_and_square() {
        let pts = square();
        let cloud = PointCloud { dim: 2, points: &pts };
        let disk = Disk { c: [0.0, 0.0], r: 0.5 };
        let parts: [&dyn SupportMap; 2] = [&cloud, &disk];
        let sum = SumMap { parts: &parts };
        let out = gjk(&sum, &[3.0, 0.5], None, &GjkOptions::precise()).unwrap();
        assert!((out.upper - 1.5).abs() < 1e-9);
    }

    #[test]
    fn interior_points_count_as_inside_at_zero_threshold() {
        let a = [vec![-0.2], vec![0.9]];
        let b = [vec![-0.5], vec![0.25]];
        let pa = PointCloud { dim: 1, points: &a };
        let pb = PointCloud { dim: 1, points: &b };
        let parts: Vec<&dyn SupportMap> = vec![&pa, &pb];
        let sum = SumMap { parts: &parts };
        for i in 0..=36 {
            let x = -0.75 + 0.05 * i as f64;
            let inside = (-0.7..=1.15).contains(&x);
            let out = gjk(&sum, &[x], Some(0.0), &GjkOptions::default()).unwrap();
            if (x + 0.7).abs() > 1e-9 && (x - 1.15).abs() > 1e-9 {
                assert_eq!(out.within(0.0, 0.0), inside, "x = {x}: {out:?}");
            }
        }
    }
}
