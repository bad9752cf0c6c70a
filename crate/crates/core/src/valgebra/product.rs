//! Product of representatives. For `φ = μ(· + A)` and `ψ = ν(· + B)` the
//! product is the exterior product `μ ⊠ ν` evaluated on `ΔK + A × B` in
//! `V × V`, i.e. the `μ⊗ν`-measure of
//! `{(x, y) : K ∩ (x − A) ∩ (y − B) ≠ ∅}`. Membership is decided by the
//! distance from `(x, y)` to that convex set, whose support function in
//! direction `(u, v)` is `h_K(u + v) + h_A(u) + h_B(v)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{GRep, GTerm};
use crate::bodies::{gjk, ConvexBody, GjkOptions, SupportMap, VolumeMethod};
use crate::error::{check_dim, Error, Result};
use crate::linalg::rank;
use crate::mc::{box_volume, run_mc, uniform_in_box, McConfig, McEstimate};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductConfig {
    /// Permit ambient dimension above 2 (sampling happens in `2n`
    /// dimensions).
    pub allow_high_dim: bool,
    /// Volume method for the `χ`-cross terms with constant densities.
    pub method: VolumeMethod,
    /// Distance slack of the membership test.
    pub gap_tol: f64,
}

impl Default for ProductConfig {
    fn default() -> Self {
        ProductConfig { allow_high_dim: false, method: VolumeMethod::MonteCarlo, gap_tol: 1e-9 }
    }
}

/// `ΔK + A × {0} + {0} × B` as a support map in `V × V`.
struct DiagonalSum<'a> {
    k: &'a ConvexBody,
    a: &'a ConvexBody,
    b: &'a ConvexBody,
}

impl SupportMap for DiagonalSum<'_> {
    fn dim(&self) -> usize {
        2 * self.k.dim()
    }

    fn support_point(&self, d: &[f64], out: &mut [f64]) {
        let n = self.k.dim();
        let (u, v) = d.split_at(n);
        let w: Vec<f64> = u.iter().zip(v).map(|(a, b)| a + b).collect();
        let mut pk = vec![0.0; n];
        let mut pa = vec![0.0; n];
        let mut pb = vec![0.0; n];
        SupportMap::support_point(self.k, &w, &mut pk);
        SupportMap::support_point(self.a, u, &mut pa);
        SupportMap::support_point(self.b, v, &mut pb);
        for i in 0..n {
            out[i] = pk[i] + pa[i];
            out[n + i] = pk[i] + pb[i];
        }
    }
}

fn single_point(b: &ConvexBody) -> Option<Vec<f64>> {
    if b.diameter() == 0.0 {
        let (lo, _) = b.bounding_box();
        Some(lo)
    } else {
        None
    }
}

/// `∫∫ p(x) q(y) 1{K ∩ (x − A) ∩ (y − B) ≠ ∅} dx dy`.
fn cross_term(s: &GTerm, t: &GTerm, k: &ConvexBody, cfg: &ProductConfig, mc: &McConfig) -> Result<McEstimate> {
    let n = k.dim();
    let pa = single_point(&s.body);
    let pb = single_point(&t.body);
    if pa.is_some() && pb.is_some() {
        // The set is an n-dimensional copy of K inside V × V.
        return Ok(McEstimate::exact(0.0));
    }
    let ka = ConvexBody::minkowski_sum(vec![k.clone(), s.body.clone()])?;
    let kb = ConvexBody::minkowski_sum(vec![k.clone(), t.body.clone()])?;
    let (mut lo, hi_a) = ka.bounding_box();
    let (lo_b, mut hi) = kb.bounding_box();
    lo.extend(lo_b);
    let mut hi_full = hi_a;
    hi_full.append(&mut hi);
    let hi = hi_full;
    let vb = box_volume(&lo, &hi);
    let diag = DiagonalSum { k, a: &s.body, b: &t.body };
    let opts = GjkOptions::default();
    let tol = cfg.gap_tol;
    run_mc(mc, |rng| {
        let mut z = vec![0.0; 2 * n];
        uniform_in_box(rng, &lo, &hi, &mut z);
        let (x, y) = z.split_at(n);
        if !ka.dist_le(x, 0.0, tol)? || !kb.dist_le(y, 0.0, tol)? {
            return Ok(0.0);
        }
        let hit = if let Some(a) = &pa {
            // z − a ∈ K with z = x − a, and y − z ∈ B.
            let zk: Vec<f64> = x.iter().zip(a).map(|(u, v)| u - v).collect();
            let r: Vec<f64> = y.iter().zip(&zk).map(|(u, v)| u - v).collect();
            k.dist_le(&zk, 0.0, tol)? && t.body.dist_le(&r, 0.0, tol)?
        } else if let Some(b) = &pb {
            let zk: Vec<f64> = y.iter().zip(b).map(|(u, v)| u - v).collect();
            let r: Vec<f64> = x.iter().zip(&zk).map(|(u, v)| u - v).collect();
            k.dist_le(&zk, 0.0, tol)? && s.body.dist_le(&r, 0.0, tol)?
        } else {
            gjk(&diag, &z, Some(0.0), &opts)?.within(0.0, tol)
        };
        Ok(if hit { vb * s.density.eval(x) * t.density.eval(y) } else { 0.0 })
    })
}

/// `(φ·ψ)(K)`. Writing `φ = φ' + aχ` and `ψ = ψ' + bχ` with `χ` the unit,
/// `φψ = φ'ψ' + aψ' + bφ' + ab`.
pub fn valuation_product(phi: &GRep, psi: &GRep, k: &ConvexBody, cfg: &ProductConfig, mc: &McConfig) -> Result<McEstimate> {
    let n = k.dim();
    check_dim(phi.dim(), n)?;
    check_dim(psi.dim(), n)?;
    if n > 2 && !cfg.allow_high_dim {
        return Err(Error::InvalidArgument(format!(
            "product sampling in dimension {} needs an explicit override",
            2 * n
        )));
    }
    let mut parts = Vec::new();
    let cross = phi.terms.len() * psi.terms.len();
    for (i, s) in phi.terms.iter().enumerate() {
        for (j, t) in psi.terms.iter().enumerate() {
            let c = mc.child((i * psi.terms.len() + j) as u64);
            parts.push((1.0, cross_term(s, t, k, cfg, &c)?));
        }
    }
    if phi.chi != 0.0 && !psi.terms.is_empty() {
        parts.push((phi.chi, psi.evaluate_terms(k, cfg.method, &mc.child(cross as u64))?));
    }
    if psi.chi != 0.0 && !phi.terms.is_empty() {
        parts.push((psi.chi, phi.evaluate_terms(k, cfg.method, &mc.child(cross as u64 + 1))?));
    }
    Ok(McEstimate::linear_combination(&parts).add_exact(phi.chi * psi.chi))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairingMatrix {
    pub degrees: Vec<usize>,
    /// `M[i][j]`: `(b_i·b_j)(K) / vol(K)` averaged over the bodies when
    /// `deg b_i + deg b_j = n`, else 0.
    pub matrix: Vec<Vec<f64>>,
    /// Relative spread of the ratio across bodies per entry.
    pub spread: Vec<Vec<f64>>,
    pub singular_values: Vec<f64>,
    pub rank: usize,
}

/// Pairing of a graded basis against the top degree, with a consistency
/// check that each product is proportional to the volume.
pub fn pairing_matrix(
    basis: &[(GRep, usize)],
    bodies: &[ConvexBody],
    cfg: &ProductConfig,
    mc: &McConfig,
) -> Result<PairingMatrix> {
    let n = bodies.first().map(|b| b.dim()).ok_or_else(|| Error::InvalidArgument("no test bodies".into()))?;
    let m = basis.len();
    let vols: Vec<f64> = bodies
        .iter()
        .enumerate()
        .map(|(i, b)| match b.exact_volume() {
            Ok(v) => Ok(v),
            Err(Error::UnsupportedExact(_)) => Ok(b.volume(VolumeMethod::MonteCarlo, &mc.child(1_000_000 + i as u64))?.mean),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let mut matrix = vec![vec![0.0; m]; m];
    let mut spread = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            if basis[i].1 + basis[j].1 != n {
                continue;
            }
            let ratios: Vec<f64> = bodies
                .iter()
                .enumerate()
                .map(|(b, k)| {
                    let c = mc.child(((i * m + j) * bodies.len() + b) as u64);
                    Ok(valuation_product(&basis[i].0, &basis[j].0, k, cfg, &c)?.mean / vols[b])
                })
                .collect::<Result<_>>()?;
            let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
            let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let s = if mean != 0.0 { (hi - lo) / mean.abs() } else { f64::INFINITY };
            if s > 0.10 {
                return Err(Error::InconsistentProduct { spread: s });
            }
            matrix[i][j] = mean;
            spread[i][j] = s;
        }
    }
    let dm = DMatrix::from_fn(m, m, |i, j| matrix[i][j]);
    let smax = dm.clone().svd(false, false).singular_values.max();
    let (r, sv) = rank(&dm, 1e-3 * smax);
    Ok(PairingMatrix { degrees: basis.iter().map(|b| b.1).collect(), matrix, spread, singular_values: sv, rank: r })
}
