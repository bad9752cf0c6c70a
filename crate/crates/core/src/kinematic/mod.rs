//! Kinematic integrals `∫ χ(Ω₁ ∩ gΩ₂) dg` over rigid and unitary motions,
//! the principal kinematic formula, and fitted constants for ℂ^m.
//!
//! `dg` is the Haar probability on rotations times Lebesgue measure on
//! translations. For convex bodies `χ(Ω₁ ∩ gΩ₂)` is the indicator that the
//! intersection is nonempty.

mod fit;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use fit::{default_pairs, fit_hermitian_constants, kappa_indices, BallCheck, FitConfig, HeldOut, KappaIndex, KinematicFit, SymmetryDefect};

use crate::bodies::{gjk, haar_rotation, ConvexBody, GjkOptions, Shape, SupportMap};
use crate::error::{check_dim, Error, Result};
use crate::hermitian::sample_unitary;
use crate::intrinsic::{intrinsic_volume_with, IntrinsicRoute};
use crate::linalg::{binomial, dist, least_squares, norm, unit_ball_volume};
use crate::mc::{box_volume, run_mc, uniform_in_box, McConfig, McEstimate, McRng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "group", content = "dim", rename_all = "snake_case")]
pub enum MotionGroup {
    /// Rigid motions of ℝⁿ.
    Iso(usize),
    /// Unitary motions of ℂ^m acting on ℝ^{2m}.
    Iu(usize),
}

impl MotionGroup {
    pub fn real_dim(&self) -> usize {
        match *self {
            MotionGroup::Iso(n) => n,
            MotionGroup::Iu(m) => 2 * m,
        }
    }

    pub fn sample_rotation(&self, rng: &mut McRng) -> DMatrix<f64> {
        match *self {
            MotionGroup::Iso(n) => haar_rotation(rng, n),
            MotionGroup::Iu(m) => sample_unitary(m, rng),
        }
    }
}

/// Haar rotations and translations drawn from a box. Without an explicit
/// window the smallest box valid for every rotation is used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionMeasure {
    pub group: MotionGroup,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<(Vec<f64>, Vec<f64>)>,
}

impl MotionMeasure {
    pub fn iso(n: usize) -> Self {
        MotionMeasure { group: MotionGroup::Iso(n), window: None }
    }

    pub fn iu(m: usize) -> Self {
        MotionMeasure { group: MotionGroup::Iu(m), window: None }
    }

    pub fn with_window(mut self, lo: Vec<f64>, hi: Vec<f64>) -> Self {
        self.window = Some((lo, hi));
        self
    }

    /// The translation window for `Ω₂` recentred at `c₂`: it must contain
    /// `Ω₁ − R(Ω₂ − c₂)` for every rotation, which holds once it contains the
    /// bounding box of `Ω₁` grown by the circumradius of `Ω₂` about `c₂`.
    fn resolve(&self, o1: &ConvexBody, rho2: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let (lo1, hi1) = o1.bounding_box();
        let need_lo: Vec<f64> = lo1.iter().map(|v| v - rho2).collect();
        let need_hi: Vec<f64> = hi1.iter().map(|v| v + rho2).collect();
        match &self.window {
            None => Ok((need_lo, need_hi)),
            Some((lo, hi)) => {
                check_dim(lo.len(), o1.dim())?;
                check_dim(hi.len(), o1.dim())?;
                for i in 0..lo.len() {
                    if !(lo[i] <= need_lo[i] && hi[i] >= need_hi[i]) {
                        return Err(Error::InvalidWindow(format!(
                            "axis {i}: [{}, {}] does not cover [{}, {}]",
                            lo[i], hi[i], need_lo[i], need_hi[i]
                        )));
                    }
                }
                Ok((lo.clone(), hi.clone()))
            }
        }
    }
}

/// An upper bound on `max_{x ∈ K} |x − c|`, exact for balls and polytopes.
pub fn circumradius(k: &ConvexBody, c: &[f64]) -> f64 {
    match k.shape() {
        Shape::Ball { center, radius } => dist(center, c) + radius,
        Shape::Polytope(p) => p.vertices().iter().map(|v| dist(v, c)).fold(0.0, f64::max),
        Shape::Ellipsoid(e) => dist(e.center(), c) + e.semi_axes().iter().cloned().fold(0.0, f64::max),
        Shape::Scaled { factor, body } => {
            let y: Vec<f64> = c.iter().map(|v| v / factor).collect();
            factor * circumradius(body, &y)
        }
        Shape::Transformed { motion, body } => circumradius(body, &motion.apply_inverse(c)),
        Shape::Product(fs) => {
            let mut start = 0;
            let mut s = 0.0;
            for f in fs {
                let r = circumradius(f, &c[start..start + f.dim()]);
                s += r * r;
                start += f.dim();
            }
            s.sqrt()
        }
        Shape::MinkSum(_) => {
            let (lo, hi) = k.bounding_box();
            let far: Vec<f64> = (0..c.len()).map(|i| (c[i] - lo[i]).abs().max((hi[i] - c[i]).abs())).collect();
            norm(&far)
        }
    }
}

fn box_center(k: &ConvexBody) -> Vec<f64> {
    let (lo, hi) = k.bounding_box();
    lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect()
}

/// Support map of `Ω₁ − (R(Ω₂ − c₂) + t)`.
struct MovedDifference<'a> {
    a: &'a ConvexBody,
    b: &'a ConvexBody,
    c2: &'a [f64],
    rot: &'a DMatrix<f64>,
    t: &'a [f64],
}

impl SupportMap for MovedDifference<'_> {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn support_point(&self, u: &[f64], out: &mut [f64]) {
        let n = u.len();
        SupportMap::support_point(self.a, u, out);
        // h_{RB}(−u) = h_B(−Rᵀu).
        let mut v = vec![0.0; n];
        for j in 0..n {
            v[j] = -(0..n).map(|i| self.rot[(i, j)] * u[i]).sum::<f64>();
        }
        let mut y = vec![0.0; n];
        SupportMap::support_point(self.b, &v, &mut y);
        for i in 0..n {
            let ry: f64 = (0..n).map(|j| self.rot[(i, j)] * (y[j] - self.c2[j])).sum();
            out[i] -= ry + self.t[i];
        }
    }
}

/// `∫ χ(Ω₁ ∩ gΩ₂) dg` by sampling rotations and translations.
pub fn kinematic_integral(o1: &ConvexBody, o2: &ConvexBody, measure: &MotionMeasure, mc: &McConfig) -> Result<McEstimate> {
    let n = measure.group.real_dim();
    check_dim(n, o1.dim())?;
    check_dim(n, o2.dim())?;
    let c2 = box_center(o2);
    let rho2 = circumradius(o2, &c2);
    let (lo, hi) = measure.resolve(o1, rho2)?;
    let vol = box_volume(&lo, &hi);
    let c1 = box_center(o1);
    let reach = circumradius(o1, &c1) + rho2;
    let opts = GjkOptions::default();
    run_mc(mc, |rng| {
        let rot = measure.group.sample_rotation(rng);
        let mut t = vec![0.0; n];
        uniform_in_box(rng, &lo, &hi, &mut t);
        if dist(&t, &c1) > reach {
            return Ok(0.0);
        }
        let diff = MovedDifference { a: o1, b: o2, c2: &c2, rot: &rot, t: &t };
        let out = gjk(&diff, &vec![0.0; n], Some(0.0), &opts)?;
        Ok(if out.within(0.0, opts.tol) { vol } else { 0.0 })
    })
}

/// `κ_0 .. κ_n` with `∫ χ(Ω₁ ∩ gΩ₂) dg = Σ κ_k V_k(Ω₁) V_{n−k}(Ω₂)`.
#[derive(Clone, Debug, Serialize)]
pub struct KappaTable {
    pub n: usize,
    pub kappa: Vec<f64>,
    /// Largest relative defect over the ball equations used.
    pub residual: f64,
    pub condition: f64,
}

/// Default radius pairs `(1, j/2)`, `j = 1 .. n+2`.
pub fn default_ball_radii(n: usize) -> Vec<(f64, f64)> {
    (1..=n + 2).map(|j| (1.0, 0.5 * j as f64)).collect()
}

/// Solves `ω_n (r + s)ⁿ = Σ_k κ_k (ω_n r^k)(ω_n s^{n−k})` over the given
/// radius pairs. The left side is the measure of translations bringing two
/// balls into contact; the right uses `V_k(B_r) = ω_n r^k`.
pub fn derive_kappa(n: usize, radii: &[(f64, f64)]) -> Result<KappaTable> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let mut ratios: Vec<f64> = Vec::new();
    for &(r, s) in radii {
        if !(r > 0.0 && s > 0.0) {
            return Err(Error::InvalidArgument(format!("radii must be positive, got ({r}, {s})")));
        }
        let q = r / s;
        if ratios.iter().all(|x| ((x - q) / q).abs() > 1e-9) {
            ratios.push(q);
        }
    }
    if ratios.len() < n + 1 {
        return Err(Error::Singular(format!(
            "{} distinct radius ratios cannot determine {} constants",
            ratios.len(),
            n + 1
        )));
    }
    let w = unit_ball_volume(n);
    // Each row is divided by ω_n (r+s)ⁿ so all equations weigh the same.
    let rows = radii.len();
    let a = DMatrix::from_fn(rows, n + 1, |i, k| {
        let (r, s) = radii[i];
        w * r.powi(k as i32) * s.powi((n - k) as i32) / (r + s).powi(n as i32)
    });
    let b = vec![1.0; rows];
    let (kappa, condition) = least_squares(&a, &b, 1e12)?;
    let residual = radii
        .iter()
        .map(|&(r, s)| {
            let lhs = w * (r + s).powi(n as i32);
            let rhs: f64 = (0..=n).map(|k| kappa[k] * w * r.powi(k as i32) * w * s.powi((n - k) as i32)).sum();
            ((lhs - rhs) / lhs).abs()
        })
        .fold(0.0, f64::max);
    Ok(KappaTable { n, kappa, residual, condition })
}

/// `a·b` with first-order error propagation.
pub(crate) fn product_estimate(a: &McEstimate, b: &McEstimate) -> McEstimate {
    let stderr = ((a.mean * b.stderr).powi(2) + (b.mean * a.stderr).powi(2)).sqrt();
    McEstimate { mean: a.mean * b.mean, stderr, samples: a.samples.max(b.samples), seed: a.seed }
}

#[derive(Clone, Debug, Serialize)]
pub struct KinematicCheck {
    pub n: usize,
    pub lhs: McEstimate,
    pub rhs: McEstimate,
    pub kappa: Vec<f64>,
    pub z: f64,
    pub pass: bool,
}

/// Compares the sampled kinematic integral over rigid motions with
/// `Σ κ_k V_k(Ω₁) V_{n−k}(Ω₂)`. Intrinsic volumes come from closed forms
/// where available and from the Steiner route otherwise.
pub fn principal_kinematic_check(o1: &ConvexBody, o2: &ConvexBody, n: usize, mc: &McConfig) -> Result<KinematicCheck> {
    check_dim(n, o1.dim())?;
    check_dim(n, o2.dim())?;
    let table = derive_kappa(n, &default_ball_radii(n))?;
    let lhs = kinematic_integral(o1, o2, &MotionMeasure::iso(n), &mc.child(0))?;
    let mut terms = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let a = intrinsic_volume_with(o1, k, IntrinsicRoute::Auto, &mc.child(1).child(k as u64))?;
        let b = intrinsic_volume_with(o2, n - k, IntrinsicRoute::Auto, &mc.child(2).child(k as u64))?;
        terms.push((table.kappa[k], product_estimate(&a, &b)));
    }
    let rhs = McEstimate::linear_combination(&terms);
    // Both sides can be exact (e.g. against a point); rounding then decides.
    let z = (lhs.mean - rhs.mean).abs() / lhs.stderr.hypot(rhs.stderr).max(1e-12 * rhs.mean.abs());
    Ok(KinematicCheck { n, lhs, rhs, kappa: table.kappa, z, pass: z < 3.0 })
}

/// `κ_k = C(n, k) / ω_n`, the closed form the ball system reduces to.
pub fn kappa_closed_form(n: usize) -> Vec<f64> {
    (0..=n).map(|k| binomial(n, k) / unit_ball_volume(n)).collect()
}

#[cfg(test)]
mod tests;
