//! `U_{k,p}(K) = ∫ V_{k−2p}(K ∩ E) dE` over complex affine `(m−p)`-planes.
//!
//! `dE` is the Haar probability on the direction times Lebesgue measure on
//! the translation in the `2p`-dimensional real complement. Translations are
//! drawn from the bounding box of the projection of `K` onto the complement
//! (inflated by a relative 1e-6); samples whose plane misses `K` contribute 0.

use nalgebra::DMatrix;
use rand::{Rng, RngCore};
use serde::Serialize;

use super::unitary::sample_complex_plane;
use crate::bodies::{gjk, slice, AffineSubspace, ConvexBody, GjkOptions, Slice, SupportMap};
use crate::error::{check_dim, Error, Result};
use crate::intrinsic::{exact_intrinsic_volumes, intrinsic_volume_with, IntrinsicRoute};
use crate::linalg::{rank, unit_ball_volume};
use crate::mc::{run_mc, McConfig, McEstimate, McRng};
use crate::valgebra::{Invariance, Valuation, ValuationMeta};

/// Nested sample budget for slice intrinsic volumes without a closed form.
pub const SLICE_STEINER_SAMPLES: usize = 4_000;

const WINDOW_INFLATION: f64 = 1e-6;

/// Valid `p` for degree `k` on ℂ^m: `0 ≤ p ≤ min(k, 2m − k) / 2`.
pub fn valid_p(m: usize, k: usize) -> Vec<usize> {
    if k > 2 * m {
        return vec![];
    }
    (0..=k.min(2 * m - k) / 2).collect()
}

/// Dimension of the space of unitarily invariant, translation invariant,
/// continuous valuations of degree `k` on ℂ^m.
pub fn basis_dimension(m: usize, k: usize) -> usize {
    valid_p(m, k).len()
}

fn check_range(n: usize, m: usize, k: usize, p: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidArgument("complex dimension must be positive".into()));
    }
    check_dim(2 * m, n)?;
    if 2 * p > k || k > 2 * m {
        return Err(Error::InvalidArgument(format!("need 0 ≤ 2p ≤ k ≤ 2m, got m={m} k={k} p={p}")));
    }
    Ok(())
}

/// Support map of the orthogonal projection of a body onto `span(Q)`, in
/// the coordinates of `Q`.
struct Projected<'a> {
    body: &'a ConvexBody,
    basis: &'a DMatrix<f64>,
}

impl SupportMap for Projected<'_> {
    fn dim(&self) -> usize {
        self.basis.ncols()
    }

    fn support_point(&self, w: &[f64], out: &mut [f64]) {
        let n = self.basis.nrows();
        let mut u = vec![0.0; n];
        for (c, wc) in w.iter().enumerate() {
            for (r, ur) in u.iter_mut().enumerate() {
                *ur += self.basis[(r, c)] * wc;
            }
        }
        let mut x = vec![0.0; n];
        SupportMap::support_point(self.body, &u, &mut x);
        for (c, o) in out.iter_mut().enumerate() {
            *o = (0..n).map(|r| self.basis[(r, c)] * x[r]).sum();
        }
    }
}

/// A complex affine plane together with the translation window it was drawn
/// from.
#[derive(Clone, Debug)]
pub struct GrassmannSample {
    pub subspace: AffineSubspace,
    /// Real orthonormal basis of the orthogonal complement (`2p` columns).
    pub complement: DMatrix<f64>,
    /// Translation in complement coordinates.
    pub translation: Vec<f64>,
    pub window_volume: f64,
}

struct Draw {
    plane: DMatrix<f64>,
    complement: DMatrix<f64>,
    translation: Vec<f64>,
    window_volume: f64,
}

fn draw(k: &ConvexBody, m: usize, p: usize, rng: &mut McRng) -> Result<Draw> {
    let (plane, complement) = sample_complex_plane(m, m - p, rng);
    let q = 2 * p;
    let mut translation = vec![0.0; q];
    let mut window_volume = 1.0;
    for c in 0..q {
        let u: Vec<f64> = complement.column(c).iter().cloned().collect();
        let neg: Vec<f64> = u.iter().map(|v| -v).collect();
        let hi = k.support(&u)?;
        let lo = -k.support(&neg)?;
        let pad = WINDOW_INFLATION * (hi - lo);
        let (lo, hi) = (lo - pad, hi + pad);
        translation[c] = lo + (hi - lo) * rng.random::<f64>();
        window_volume *= hi - lo;
    }
    Ok(Draw { plane, complement, translation, window_volume })
}

/// One draw from `dE` restricted to the window of `K`.
pub fn sample_grassmann(k: &ConvexBody, m: usize, p: usize, rng: &mut McRng) -> Result<GrassmannSample> {
    check_range(k.dim(), m, 2 * p, p)?;
    let d = draw(k, m, p, rng)?;
    let base = &d.complement * nalgebra::DVector::from_column_slice(&d.translation);
    let subspace = AffineSubspace::new(base.iter().cloned().collect(), d.plane)?;
    Ok(GrassmannSample { subspace, complement: d.complement, translation: d.translation, window_volume: d.window_volume })
}

/// `V_j` of a slice, in its own coordinates: closed form when available,
/// otherwise a small nested Steiner fit.
fn slice_intrinsic_volume(body: &ConvexBody, j: usize, rng: &mut McRng) -> Result<f64> {
    match exact_intrinsic_volumes(body) {
        Ok(v) => Ok(v[j]),
        Err(Error::UnsupportedExact(_)) => {
            let mc = McConfig::new(SLICE_STEINER_SAMPLES, rng.next_u64());
            Ok(intrinsic_volume_with(body, j, IntrinsicRoute::Auto, &mc)?.mean)
        }
        Err(e) => Err(e),
    }
}

/// Monte Carlo estimate of `U_{k,p}(K)` for `K ⊂ ℂ^m = ℝ^{2m}`.
pub fn u_kp(k: &ConvexBody, m: usize, deg: usize, p: usize, mc: &McConfig) -> Result<McEstimate> {
    check_range(k.dim(), m, deg, p)?;
    if p == 0 {
        return intrinsic_volume_with(k, deg, IntrinsicRoute::Auto, mc);
    }
    let j = deg - 2 * p;
    let slice_dim = 2 * (m - p);
    let opts = GjkOptions::default();
    run_mc(mc, |rng| {
        let d = draw(k, m, p, rng)?;
        if d.window_volume == 0.0 {
            return Ok(0.0);
        }
        if j == 0 {
            // Only whether the plane meets K matters.
            let proj = Projected { body: k, basis: &d.complement };
            let out = gjk(&proj, &d.translation, Some(0.0), &opts)?;
            let hit = out.within(0.0, opts.tol);
            return Ok(if hit { d.window_volume * unit_ball_volume(slice_dim) } else { 0.0 });
        }
        let base = &d.complement * nalgebra::DVector::from_column_slice(&d.translation);
        let e = AffineSubspace::new(base.iter().cloned().collect(), d.plane)?;
        match slice(k, &e)? {
            Slice::Empty => Ok(0.0),
            Slice::Body(b) => Ok(d.window_volume * slice_intrinsic_volume(&b, j, rng)?),
        }
    })
}

/// `U_{k,p}` on ℂ^m as a valuation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ukp {
    pub m: usize,
    pub k: usize,
    pub p: usize,
}

impl Ukp {
    pub fn new(m: usize, k: usize, p: usize) -> Result<Self> {
        check_range(2 * m, m, k, p)?;
        Ok(Ukp { m, k, p })
    }
}

impl Valuation for Ukp {
    fn evaluate(&self, k: &ConvexBody, mc: &McConfig) -> Result<McEstimate> {
        u_kp(k, self.m, self.k, self.p, mc)
    }

    fn meta(&self) -> ValuationMeta {
        ValuationMeta::even_invariant(Some(self.k), Invariance::U)
    }

    fn name(&self) -> String {
        format!("U_{{{},{}}} on C^{}", self.k, self.p, self.m)
    }
}

/// Evaluation matrix `M[body][p] = U_{k,p}(body)` and its numerical rank.
#[derive(Clone, Debug, Serialize)]
pub struct BasisRank {
    pub m: usize,
    pub k: usize,
    pub ps: Vec<usize>,
    pub values: Vec<Vec<McEstimate>>,
    /// Singular values of the column-normalized matrix.
    pub singular_values: Vec<f64>,
    /// Frobenius norm of the column-normalized standard errors.
    pub noise: f64,
    pub threshold: f64,
    pub rank: usize,
    pub expected: usize,
}

impl BasisRank {
    pub fn independent(&self) -> bool {
        self.rank == self.expected
    }
}

/// Numerical rank of the `U_{k,p}` evaluation matrix over a body family.
/// Columns are normalized first (rank is unchanged) and singular values
/// below `max(10·noise, 1e-9·σ_max)` are dropped.
pub fn basis_rank(deg: usize, m: usize, bodies: &[ConvexBody], mc: &McConfig) -> Result<BasisRank> {
    let ps = valid_p(m, deg);
    if ps.is_empty() {
        return Err(Error::InvalidArgument(format!("degree {deg} exceeds 2m = {}", 2 * m)));
    }
    if bodies.len() < ps.len() {
        return Err(Error::InvalidArgument(format!(
            "need at least {} bodies for degree {deg}, got {}",
            ps.len(),
            bodies.len()
        )));
    }
    let mut values = Vec::with_capacity(bodies.len());
    for (b, body) in bodies.iter().enumerate() {
        let row = ps
            .iter()
            .map(|&p| u_kp(body, m, deg, p, &mc.child(b as u64).child(p as u64)))
            .collect::<Result<Vec<_>>>()?;
        values.push(row);
    }
    let (r, c) = (bodies.len(), ps.len());
    let mut mat = DMatrix::from_fn(r, c, |i, j| values[i][j].mean);
    let mut err = DMatrix::from_fn(r, c, |i, j| values[i][j].stderr);
    for j in 0..c {
        let s = mat.column(j).norm();
        if s == 0.0 {
            return Err(Error::Degenerate(format!("U_{{{deg},{}}} vanishes on the whole family", ps[j])));
        }
        mat.column_mut(j).scale_mut(1.0 / s);
        err.column_mut(j).scale_mut(1.0 / s);
    }
    let noise = err.norm();
    let (_, sv) = rank(&mat, 0.0);
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let threshold = (10.0 * noise).max(1e-9 * smax);
    let rank = sv.iter().filter(|&&s| s > threshold).count();
    Ok(BasisRank { m, k: deg, ps: ps.clone(), values, singular_values: sv, noise, threshold, rank, expected: ps.len() })
}

/// `{D × [0,1]², B⁴, [0,1]⁴}` for ℂ², extended by a polydisk and a box
/// with unequal sides in each complex coordinate.
pub fn default_family(m: usize) -> Result<Vec<ConvexBody>> {
    if m != 2 {
        let n = 2 * m;
        let mut hi = vec![1.0; n];
        for (i, h) in hi.iter_mut().enumerate() {
            *h = 1.0 + 0.5 * i as f64;
        }
        return Ok(vec![
            ConvexBody::unit_ball(n),
            ConvexBody::unit_cube(n),
            ConvexBody::cuboid(&vec![0.0; n], &hi)?,
            ConvexBody::product(vec![ConvexBody::unit_ball(2), ConvexBody::unit_cube(n - 2)])?,
        ]);
    }
    let disk = ConvexBody::unit_ball(2);
    Ok(vec![
        ConvexBody::product(vec![disk.clone(), ConvexBody::unit_cube(2)])?,
        ConvexBody::unit_ball(4),
        ConvexBody::unit_cube(4),
        ConvexBody::product(vec![disk.clone(), disk.scaled(0.5)?])?,
        ConvexBody::cuboid(&[0.0; 4], &[2.0, 0.25, 1.0, 1.0])?,
    ])
}
