//! Intrinsic volumes `V_0 .. V_n`, normalized so that `V_i(Bⁿ) = ω_n` for
//! every `i`, by two independent routes: boundary curvature integrals and
//! coefficients of the Steiner polynomial `vol(K + εD) = Σ c_j ε^j`.
//! Also the operator `(Λφ)(K) = d/dε|₀ φ(K + εD)`.

mod curvature;

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use curvature::{
    curvature_intrinsic_volume, curvature_intrinsic_volumes, CurvatureBoundary, ParamAxis, ParamDomain,
};

use crate::bodies::exact::standard_intrinsic_volumes;
use crate::bodies::{parallel_volume_replicates, ConvexBody, RadialRule, VolumeMethod};
use crate::error::{Error, Result};
use crate::linalg::{binomial, elementary_symmetric, pseudo_inverse, unit_ball_volume};
use crate::mc::{box_volume, run_mc_vec, uniform_in_box, Accumulator, McConfig, McEstimate};
use crate::valgebra::{hadwiger_decompose, Valuation, ValuationMeta};

const MAX_TABLE_DIM: usize = 16;

/// Largest Vandermonde condition number accepted by [`steiner_fit`].
pub const MAX_STEINER_CONDITION: f64 = 1e8;

fn gamma_table() -> &'static Vec<Vec<f64>> {
    static TABLE: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    TABLE.get_or_init(|| (0..=MAX_TABLE_DIM).map(derive_gamma_row).collect())
}

/// Pins `γ_{n,i}` in `V_i = γ_{n,i} c_{n−i}` by matching the unit ball:
/// its Steiner coefficients come from expanding `ω_n (1 + ε)ⁿ`, and its
/// curvature-formula values from the sphere, where every principal
/// curvature is 1 and the boundary measure is `n ω_n`.
fn derive_gamma_row(n: usize) -> Vec<f64> {
    let w = unit_ball_volume(n);
    let mut poly = vec![w];
    for _ in 0..n {
        let mut next = vec![0.0; poly.len() + 1];
        for (j, c) in poly.iter().enumerate() {
            next[j] += c;
            next[j + 1] += c;
        }
        poly = next;
    }
    let area = n as f64 * w;
    let ones = vec![1.0; n.saturating_sub(1)];
    let e = elementary_symmetric(&ones);
    (0..=n)
        .map(|i| {
            let target = if i == n {
                w
            } else {
                let j = n - 1 - i;
                e[j] * area / (n as f64 * binomial(n - 1, j))
            };
            target / poly[n - i]
        })
        .collect()
}

/// `γ_{n,i}`.
pub fn gamma(n: usize, i: usize) -> f64 {
    assert!(i <= n, "index {i} exceeds dimension {n}");
    if n <= MAX_TABLE_DIM {
        gamma_table()[n][i]
    } else {
        derive_gamma_row(n)[i]
    }
}

/// Classical intrinsic volumes (`V_0 = 1`) to the normalization used here.
pub fn from_classical(n: usize, v: &[f64]) -> Vec<f64> {
    (0..=n).map(|i| gamma(n, i) * unit_ball_volume(n - i) * v[i]).collect()
}

/// Inverse of [`from_classical`].
pub fn to_classical(n: usize, v: &[f64]) -> Vec<f64> {
    (0..=n).map(|i| v[i] / (gamma(n, i) * unit_ball_volume(n - i))).collect()
}

/// Closed-form `V_0 .. V_n` where the body family allows it.
pub fn exact_intrinsic_volumes(k: &ConvexBody) -> Result<Vec<f64>> {
    Ok(from_classical(k.dim(), &standard_intrinsic_volumes(k)?))
}

/// Fitted Steiner polynomial.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SteinerCoeffs {
    pub n: usize,
    pub radii: Vec<f64>,
    /// `c_0 .. c_n`.
    pub coeffs: Vec<McEstimate>,
    /// `vol(K + εD)` at each radius.
    pub volumes: Vec<McEstimate>,
    /// RMS of fit residuals at the radii.
    pub residual: f64,
    /// RMS standard error of those residuals.
    pub noise: f64,
    /// Condition number of the column-scaled Vandermonde matrix.
    pub condition: f64,
}

impl SteinerCoeffs {
    pub fn values(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.mean).collect()
    }

    /// Residual within three noise levels (or at rounding level for
    /// exact volumes).
    pub fn residual_consistent(&self) -> bool {
        let scale = self.volumes.iter().map(|v| v.mean.abs()).fold(0.0, f64::max);
        self.residual <= 3.0 * self.noise + 1e-10 * scale.max(1e-300)
    }

    /// `V_i = γ_{n,i} c_{n−i}`.
    pub fn intrinsic_volume(&self, i: usize) -> McEstimate {
        self.coeffs[self.n - i].scale(gamma(self.n, i))
    }
}

/// `ε ∈ {0.1, 0.2, …, 0.1(n+2)}` times the diameter (unit scale for points).
pub fn default_radii(k: &ConvexBody) -> Vec<f64> {
    let d = k.diameter();
    let d = if d > 0.0 { d } else { 1.0 };
    (1..=k.dim() + 2).map(|j| 0.1 * j as f64 * d).collect()
}

/// Least-squares fit of the degree-`n` Steiner polynomial to volumes of
/// parallel bodies. With box sampling all radii share the same points, so
/// the coefficient errors account for the correlation between radii.
pub fn steiner_fit(k: &ConvexBody, radii: Option<&[f64]>, method: VolumeMethod, mc: &McConfig) -> Result<SteinerCoeffs> {
    let n = k.dim();
    let radii = match radii {
        Some(r) => r.to_vec(),
        None => default_radii(k),
    };
    if radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(Error::InvalidArgument("Steiner radii must be positive".into()));
    }
    let mut sorted = radii.clone();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    if sorted.len() < n + 1 {
        return Err(Error::InvalidArgument(format!("need at least {} distinct radii, got {}", n + 1, sorted.len())));
    }
    let m = radii.len();
    let emax = sorted[sorted.len() - 1];
    let a = DMatrix::from_fn(m, n + 1, |r, j| (radii[r] / emax).powi(j as i32));
    let (pinv, condition) = pseudo_inverse(&a, MAX_STEINER_CONDITION)?;
    let unscale: Vec<f64> = (0..=n).map(|j| emax.powi(-(j as i32))).collect();
    // Coefficients and residuals as linear maps of the volume vector.
    let resid_map = DMatrix::identity(m, m) - &a * &pinv;
    let project = |y: &[f64], out: &mut [f64]| {
        let yv = DVector::from_column_slice(y);
        let b = &pinv * &yv;
        let r = &resid_map * &yv;
        for j in 0..=n {
            out[j] = b[j] * unscale[j];
        }
        out[n + 1..n + 1 + m].copy_from_slice(y);
        for i in 0..m {
            out[n + 1 + m + i] = r[i];
        }
    };
    let width = n + 1 + 2 * m;
    let est: Vec<McEstimate> = match method {
        VolumeMethod::Exact => {
            let y: Vec<f64> = radii.iter().map(|&e| k.parallel_body(e)?.exact_volume()).collect::<Result<_>>()?;
            let mut out = vec![0.0; width];
            project(&y, &mut out);
            out.into_iter().map(McEstimate::exact).collect()
        }
        VolumeMethod::MonteCarlo => {
            let (mut lo, mut hi) = k.bounding_box();
            let pad = emax * (1.0 + 1e-9) + 1e-12;
            lo.iter_mut().for_each(|v| *v -= pad);
            hi.iter_mut().for_each(|v| *v += pad);
            let vb = box_volume(&lo, &hi);
            run_mc_vec(mc, width, |rng, out| {
                let mut x = vec![0.0; n];
                uniform_in_box(rng, &lo, &hi, &mut x);
                let mut y = vec![0.0; m];
                if k.dist_le(&x, emax, 0.0)? {
                    let d = k.distance(&x)?;
                    for (yr, &e) in y.iter_mut().zip(&radii) {
                        if d <= e {
                            *yr = vb;
                        }
                    }
                }
                project(&y, out);
                Ok(())
            })?
        }
        VolumeMethod::Radial { nodes, replicates } => {
            let reps = parallel_volume_replicates(k, &radii, RadialRule { nodes, replicates }, mc)?;
            let mut accs = vec![Accumulator::default(); width];
            let mut out = vec![0.0; width];
            for y in &reps {
                project(y, &mut out);
                for (acc, v) in accs.iter_mut().zip(&out) {
                    acc.push(*v);
                }
            }
            accs.iter().map(|a| a.estimate(mc.seed())).collect()
        }
    };
    let coeffs = est[..=n].to_vec();
    let volumes = est[n + 1..n + 1 + m].to_vec();
    let resid = &est[n + 1 + m..];
    let rms = |f: &dyn Fn(&McEstimate) -> f64| (resid.iter().map(|e| f(e).powi(2)).sum::<f64>() / m as f64).sqrt();
    Ok(SteinerCoeffs {
        n,
        radii,
        coeffs,
        volumes,
        residual: rms(&|e| e.mean),
        noise: rms(&|e| e.stderr),
        condition,
    })
}

/// How [`intrinsic_volume_with`] obtains its value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntrinsicRoute {
    Exact,
    Steiner(VolumeMethod),
    /// Closed form when available, otherwise the sampled Steiner route.
    Auto,
}

/// `V_i(K)` by the Steiner route with box sampling.
pub fn intrinsic_volume(k: &ConvexBody, i: usize, mc: &McConfig) -> Result<McEstimate> {
    intrinsic_volume_with(k, i, IntrinsicRoute::Steiner(VolumeMethod::MonteCarlo), mc)
}

pub fn intrinsic_volume_with(k: &ConvexBody, i: usize, route: IntrinsicRoute, mc: &McConfig) -> Result<McEstimate> {
    let n = k.dim();
    if i > n {
        return Err(Error::InvalidArgument(format!("intrinsic volume index {i} exceeds dimension {n}")));
    }
    match route {
        IntrinsicRoute::Exact => Ok(McEstimate::exact(exact_intrinsic_volumes(k)?[i])),
        IntrinsicRoute::Steiner(method) => Ok(steiner_fit(k, None, method, mc)?.intrinsic_volume(i)),
        IntrinsicRoute::Auto => match exact_intrinsic_volumes(k) {
            Ok(v) => Ok(McEstimate::exact(v[i])),
            Err(Error::UnsupportedExact(_)) => intrinsic_volume_with(k, i, IntrinsicRoute::Steiner(VolumeMethod::MonteCarlo), mc),
            Err(e) => Err(e),
        },
    }
}

/// `V_i` as a valuation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntrinsicVolume {
    pub i: usize,
    pub route: IntrinsicRoute,
}

impl IntrinsicVolume {
    pub fn new(i: usize) -> Self {
        IntrinsicVolume { i, route: IntrinsicRoute::Auto }
    }

    pub fn exact(i: usize) -> Self {
        IntrinsicVolume { i, route: IntrinsicRoute::Exact }
    }
}

impl Valuation for IntrinsicVolume {
    fn evaluate(&self, k: &ConvexBody, mc: &McConfig) -> Result<McEstimate> {
        intrinsic_volume_with(k, self.i, self.route, mc)
    }

    fn meta(&self) -> ValuationMeta {
        ValuationMeta::even_invariant(Some(self.i), crate::valgebra::Invariance::O)
    }

    fn name(&self) -> String {
        format!("V_{}", self.i)
    }
}

/// Step schedule `h_j = h0 / 2^j`, `j < levels`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaSchedule {
    pub h0: f64,
    pub levels: usize,
}

impl Default for LambdaSchedule {
    fn default() -> Self {
        LambdaSchedule { h0: 0.1, levels: 6 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaResult {
    pub value: f64,
    /// Larger of the extrapolation gap and the propagated sampling error.
    pub error: f64,
    pub level: usize,
}

/// `(Λφ)(K)` from one-sided difference quotients
/// `(φ(K + hD) − φ(K)) / h = Λφ(K) + a h + b h² + …`, extrapolated by
/// Richardson's scheme with ratio 2.
pub fn lambda_apply(phi: &dyn Valuation, k: &ConvexBody, schedule: LambdaSchedule, mc: &McConfig) -> Result<LambdaResult> {
    if !(schedule.h0 > 0.0) || schedule.levels < 2 {
        return Err(Error::InvalidArgument("step schedule needs h0 > 0 and at least two levels".into()));
    }
    let levels = schedule.levels;
    let f0 = phi.evaluate(k, mc)?;
    let mut quot = Vec::with_capacity(levels);
    for j in 0..levels {
        let h = schedule.h0 / 2f64.powi(j as i32);
        let fh = phi.evaluate(&k.parallel_body(h)?, mc)?;
        quot.push(McEstimate::linear_combination(&[(1.0 / h, fh), (-1.0 / h, f0)]));
    }
    // Tableau rows over levels, columns over elimination order.
    let mut table: Vec<Vec<McEstimate>> = vec![quot];
    for c in 1..levels {
        let prev = &table[c - 1];
        let f = 2f64.powi(c as i32);
        let next: Vec<McEstimate> = (1..prev.len())
            .map(|j| McEstimate::linear_combination(&[(f / (f - 1.0), prev[j]), (-1.0 / (f - 1.0), prev[j - 1])]))
            .collect();
        table.push(next);
    }
    let diag: Vec<McEstimate> = (0..levels).map(|c| table[c][0]).collect();
    if diag.iter().any(|d| !d.mean.is_finite()) {
        return Err(Error::Divergence("non-finite difference quotient".into()));
    }
    let gaps: Vec<f64> = (1..levels).map(|c| (diag[c].mean - diag[c - 1].mean).abs()).collect();
    let scale = diag.iter().map(|d| d.mean.abs()).fold(f0.mean.abs(), f64::max).max(1e-300);
    let (best, gap) = gaps.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &g)| if g < acc.1 { (i, g) } else { acc });
    if gaps.len() >= 2 && gaps.windows(2).all(|w| w[1] > w[0]) && gaps[0] > 1e-12 * scale {
        return Err(Error::Divergence(format!("Richardson gaps grow monotonically: {gaps:?}")));
    }
    let chosen = diag[best + 1];
    Ok(LambdaResult { value: chosen.mean, error: gap.max(chosen.stderr), level: best + 1 })
}

/// `Λφ` as a valuation, evaluated by [`lambda_apply`].
pub struct LambdaOf<'a> {
    pub phi: &'a dyn Valuation,
    pub schedule: LambdaSchedule,
}

impl Valuation for LambdaOf<'_> {
    fn evaluate(&self, k: &ConvexBody, mc: &McConfig) -> Result<McEstimate> {
        let r = lambda_apply(self.phi, k, self.schedule, mc)?;
        Ok(McEstimate { mean: r.value, stderr: r.error, samples: 0, seed: mc.seed() })
    }

    fn meta(&self) -> ValuationMeta {
        let m = self.phi.meta();
        ValuationMeta { degree: m.degree.map(|d| d.saturating_sub(1)), ..m }
    }

    fn name(&self) -> String {
        format!("Λ{}", self.phi.name())
    }
}

/// Matrix of `Λ` on `span(V_0 .. V_n)`: column `k` holds the coordinates
/// of `ΛV_k`, found numerically by extrapolated differences and Hadwiger
/// decomposition on balls.
pub fn lambda_matrix(n: usize, schedule: LambdaSchedule) -> Result<DMatrix<f64>> {
    let mc = McConfig::new(1, 0);
    let mut m = DMatrix::zeros(n + 1, n + 1);
    for k in 0..=n {
        let v = IntrinsicVolume::exact(k);
        let lv = LambdaOf { phi: &v, schedule };
        let fit = hadwiger_decompose(&lv, n, None, &mc)?;
        for i in 0..=n {
            m[(i, k)] = fit.coeffs[i];
        }
    }
    Ok(m)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LefschetzEntry {
    pub k: usize,
    /// Coefficient of `V_{n−k}` in `Λ^{2k−n} V_k`.
    pub value: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LefschetzReport {
    pub n: usize,
    pub matrix: Vec<Vec<f64>>,
    /// Shift entries `Λ[k−1][k]`.
    pub shift: Vec<f64>,
    /// Largest entry off the first superdiagonal.
    pub off_shift: f64,
    pub entries: Vec<LefschetzEntry>,
    pub holds: bool,
}

/// Checks that `Λ^{2k−n}` maps `V_k` to a nonzero multiple of `V_{n−k}`
/// for every `k > n/2`.
pub fn lefschetz_check(n: usize, schedule: LambdaSchedule, tol: f64) -> Result<LefschetzReport> {
    let m = lambda_matrix(n, schedule)?;
    let shift: Vec<f64> = (1..=n).map(|k| m[(k - 1, k)]).collect();
    let mut off_shift: f64 = 0.0;
    for i in 0..=n {
        for j in 0..=n {
            if i + 1 != j {
                off_shift = off_shift.max(m[(i, j)].abs());
            }
        }
    }
    let mut entries = Vec::new();
    for k in (n / 2 + 1)..=n {
        let mut p = DMatrix::identity(n + 1, n + 1);
        for _ in 0..(2 * k - n) {
            p = &m * p;
        }
        entries.push(LefschetzEntry { k, value: p[(n - k, k)] });
    }
    let holds = shift.iter().all(|s| s.abs() > tol) && entries.iter().all(|e| e.value.abs() > tol);
    Ok(LefschetzReport {
        n,
        matrix: (0..=n).map(|i| (0..=n).map(|j| m[(i, j)]).collect()).collect(),
        shift,
        off_shift,
        entries,
        holds,
    })
}
