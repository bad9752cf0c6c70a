use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{HadwigerCombination, Valuation};
use crate::bodies::{ConvexBody, Facet, Polytope, Shape};
use crate::error::{Error, Result};
use crate::intrinsic::exact_intrinsic_volumes;
use crate::linalg::{pseudo_inverse, unit_ball_volume};
use crate::mc::{McConfig, McEstimate};

/// Vandermonde-type systems beyond this condition number are rejected.
const MAX_CONDITION: f64 = 1e8;

/// `Σ_j w_j e_j` for independent estimates `e_j`.
fn combine(weights: impl Iterator<Item = f64>, values: &[McEstimate]) -> McEstimate {
    let terms: Vec<(f64, McEstimate)> = weights.zip(values.iter().copied()).collect();
    McEstimate::linear_combination(&terms)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdditivityReport {
    /// `φ(K1∪K2) − φ(K1) − φ(K2) + φ(K1∩K2)`.
    pub residual: f64,
    pub stderr: f64,
    pub z: f64,
    /// Whether `K1 ∩ K2` was empty (contributing 0).
    pub empty_intersection: bool,
}

fn polytope_of(k: &ConvexBody) -> Result<&Polytope> {
    match k.shape() {
        Shape::Polytope(p) => Ok(p),
        _ => Err(Error::Unsupported(format!("additivity check needs polytopes, got {}", k.kind()))),
    }
}

/// Inclusion–exclusion residual on two polytopes whose union is convex.
pub fn check_additivity(phi: &dyn Valuation, k1: &ConvexBody, k2: &ConvexBody, mc: &McConfig) -> Result<AdditivityReport> {
    let (p1, p2) = (polytope_of(k1)?, polytope_of(k2)?);
    let n = p1.dim();
    let mut pts = p1.vertices().to_vec();
    pts.extend(p2.vertices().iter().cloned());
    let union = ConvexBody::polytope(pts)?;
    let mut hs: Vec<Facet> = p1.halfspaces();
    hs.extend(p2.halfspaces());
    let inter = Polytope::from_halfspaces(n, &hs)?.map(ConvexBody::from_polytope);
    let vi = inter.as_ref().map(|b| b.exact_volume()).transpose()?.unwrap_or(0.0);
    let (vu, v1, v2) = (union.exact_volume()?, k1.exact_volume()?, k2.exact_volume()?);
    if (vu - (v1 + v2 - vi)).abs() > 1e-9 * vu.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "union is not convex: hull volume {vu} vs inclusion-exclusion {}",
            v1 + v2 - vi
        )));
    }
    let fu = phi.evaluate(&union, &mc.child(0))?;
    let f1 = phi.evaluate(k1, &mc.child(1))?;
    let f2 = phi.evaluate(k2, &mc.child(2))?;
    let fi = match &inter {
        Some(b) => phi.evaluate(b, &mc.child(3))?,
        None => McEstimate::exact(0.0),
    };
    let r = McEstimate::linear_combination(&[(1.0, fu), (-1.0, f1), (-1.0, f2), (1.0, fi)]);
    // Rounding floor for zero-variance evaluations.
    let scale = [fu, f1, f2, fi].iter().map(|e| e.mean.abs()).fold(0.0, f64::max);
    Ok(AdditivityReport {
        residual: r.mean,
        stderr: r.stderr,
        z: r.mean.abs() / r.stderr.max(1e-12 * scale).max(f64::MIN_POSITIVE),
        empty_intersection: inter.is_none(),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParityReport {
    /// `φ(−K) − φ(K)` per body.
    pub differences: Vec<McEstimate>,
    pub max_z: f64,
}

/// Compares `φ(−K)` with `φ(K)` on each body.
pub fn check_parity(phi: &dyn Valuation, bodies: &[ConvexBody], mc: &McConfig) -> Result<ParityReport> {
    let mut differences = Vec::new();
    let mut max_z: f64 = 0.0;
    for (i, k) in bodies.iter().enumerate() {
        let c = mc.child(i as u64);
        let a = phi.evaluate(&k.reflected(), &c.child(0))?;
        let b = phi.evaluate(k, &c.child(1))?;
        let d = McEstimate::linear_combination(&[(1.0, a), (-1.0, b)]);
        let z = if d.stderr == 0.0 && d.mean.abs() <= 1e-12 * (a.mean.abs() + b.mean.abs()) {
            0.0
        } else {
            d.z_against(0.0)
        };
        max_z = max_z.max(z);
        differences.push(d);
    }
    Ok(ParityReport { differences, max_z })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolynomialityFit {
    pub degree: u32,
    /// Monomial exponents with fitted coefficients.
    pub coeffs: Vec<(Vec<u32>, f64)>,
    /// RMS of the fit residuals.
    pub residual: f64,
    /// RMS residual expected from sampling noise alone.
    pub noise: f64,
    pub condition: f64,
    pub consistent: bool,
}

/// Exponent vectors of total degree at most `d` in `n` variables.
fn monomials(n: usize, d: u32) -> Vec<Vec<u32>> {
    let mut out = vec![];
    let mut cur = vec![0u32; n];
    fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur[i] = e;
            rec(i + 1, left - e, cur, out);
        }
        cur[i] = 0;
    }
    rec(0, d, &mut cur, &mut out);
    out.sort_by_key(|e| (e.iter().sum::<u32>(), std::cmp::Reverse(e.clone())));
    out
}

/// Fits `x ↦ φ(K + x)` over the translation grid by a polynomial of total
/// degree `d` and compares the residual with the sampling noise.
pub fn check_polynomiality(
    phi: &dyn Valuation,
    k: &ConvexBody,
    translations: &[Vec<f64>],
    d: u32,
    mc: &McConfig,
) -> Result<PolynomialityFit> {
    let n = k.dim();
    let mons = monomials(n, d);
    let m = translations.len();
    if m < mons.len() {
        return Err(Error::InvalidArgument(format!(
            "underdetermined grid: {m} translations for {} monomials",
            mons.len()
        )));
    }
    let a = DMatrix::from_fn(m, mons.len(), |r, c| {
        mons[c].iter().zip(&translations[r]).map(|(&e, &x)| x.powi(e as i32)).product()
    });
    let (pinv, condition) = pseudo_inverse(&a, 1e10).map_err(|e| match e {
        Error::IllConditioned { condition } if !condition.is_finite() => {
            Error::InvalidArgument("underdetermined grid: translations do not span the monomials".into())
        }
        e => e,
    })?;
    let vals: Vec<McEstimate> = translations
        .iter()
        .enumerate()
        .map(|(j, x)| phi.evaluate(&k.translated(x)?, &mc.child(j as u64)))
        .collect::<Result<_>>()?;
    let y = DVector::from_iterator(m, vals.iter().map(|v| v.mean));
    let c = &pinv * &y;
    let r = &y - &a * &c;
    let hat = &a * &pinv;
    let residual = (r.norm_squared() / m as f64).sqrt();
    let noise = ((0..m).map(|j| (1.0 - hat[(j, j)]).max(0.0) * vals[j].stderr.powi(2)).sum::<f64>() / m as f64).sqrt();
    let scale = vals.iter().map(|v| v.mean.abs()).fold(0.0, f64::max);
    Ok(PolynomialityFit {
        degree: d,
        coeffs: mons.into_iter().zip(c.iter().cloned()).collect(),
        residual,
        noise,
        condition,
        consistent: residual <= 3.0 * noise + 1e-9 * scale.max(1e-300),
    })
}

/// Solves `φ(λ_j K) = Σ_k λ_j^k φ_k(K)` for the components `φ_0 .. φ_n`.
pub fn grading_solve(lambdas: &[f64], values: &[McEstimate], n: usize) -> Result<Vec<McEstimate>> {
    if lambdas.len() < n + 1 || lambdas.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::InvalidArgument(format!("need at least {} distinct positive scales", n + 1)));
    }
    let a = DMatrix::from_fn(lambdas.len(), n + 1, |j, k| lambdas[j].powi(k as i32));
    let (pinv, _) = pseudo_inverse(&a, MAX_CONDITION)?;
    Ok((0..=n).map(|k| combine((0..lambdas.len()).map(|j| pinv[(k, j)]), values)).collect())
}

/// `φ(λ_j K)` reassembled from components.
pub fn grading_synthesize(lambdas: &[f64], components: &[McEstimate]) -> Vec<McEstimate> {
    lambdas.iter().map(|l| combine((0..components.len()).map(|k| l.powi(k as i32)), components)).collect()
}

/// Homogeneous components `φ_k(K)`, `k = 0..n`, from evaluations on
/// dilates of `K` about the origin.
pub fn homogeneous_components(
    phi: &dyn Valuation,
    k: &ConvexBody,
    lambdas: &[f64],
    mc: &McConfig,
) -> Result<Vec<McEstimate>> {
    let n = k.dim();
    if lambdas.len() < n + 1 {
        return Err(Error::InvalidArgument(format!("need at least {} scales", n + 1)));
    }
    let vals: Vec<McEstimate> = lambdas
        .iter()
        .enumerate()
        .map(|(j, &l)| phi.evaluate(&k.scaled(l)?, &mc.child(j as u64)))
        .collect::<Result<_>>()?;
    grading_solve(lambdas, &vals, n)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HadwigerFit {
    /// Coordinates in the basis `V_0 .. V_n`.
    pub coeffs: Vec<f64>,
    pub stderr: Vec<f64>,
    pub radii: Vec<f64>,
    pub condition: f64,
    /// `φ` on the held-out unit cube.
    pub held_out: McEstimate,
    /// `Σ a_i V_i` on the unit cube.
    pub predicted: f64,
    /// `|held_out − predicted|`.
    pub residual: f64,
}

impl HadwigerFit {
    pub fn held_out_z(&self) -> f64 {
        self.held_out.z_against(self.predicted)
    }
}

/// Coordinates of an `SO(n)`-invariant valuation in the basis
/// `V_0 .. V_n`, probed on centered balls where `V_i(B_r) = ω_n rⁱ`, and
/// validated on the unit cube.
pub fn hadwiger_decompose(phi: &dyn Valuation, n: usize, radii: Option<&[f64]>, mc: &McConfig) -> Result<HadwigerFit> {
    let radii: Vec<f64> = match radii {
        Some(r) => r.to_vec(),
        None => (1..=n + 2).map(|j| 0.4 * j as f64).collect(),
    };
    if radii.len() < n + 1 || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidArgument(format!("need at least {} positive probe radii", n + 1)));
    }
    let w = unit_ball_volume(n);
    let a = DMatrix::from_fn(radii.len(), n + 1, |j, i| w * radii[j].powi(i as i32));
    let (pinv, condition) = pseudo_inverse(&a, MAX_CONDITION)
        .map_err(|e| Error::Singular(format!("probe system: {e}")))?;
    let vals: Vec<McEstimate> = radii
        .iter()
        .enumerate()
        .map(|(j, &r)| phi.evaluate(&ConvexBody::ball(vec![0.0; n], r)?, &mc.child(j as u64)))
        .collect::<Result<_>>()?;
    let est: Vec<McEstimate> = (0..=n).map(|i| combine((0..radii.len()).map(|j| pinv[(i, j)]), &vals)).collect();
    let cube = ConvexBody::unit_cube(n);
    let vc = exact_intrinsic_volumes(&cube)?;
    let coeffs: Vec<f64> = est.iter().map(|e| e.mean).collect();
    let predicted: f64 = coeffs.iter().zip(&vc).map(|(a, v)| a * v).sum();
    let held_out = phi.evaluate(&cube, &mc.child(radii.len() as u64))?;
    Ok(HadwigerFit {
        stderr: est.iter().map(|e| e.stderr).collect(),
        coeffs,
        radii,
        condition,
        residual: (held_out.mean - predicted).abs(),
        held_out,
        predicted,
    })
}

/// `Σ a_i V_i` with closed-form intrinsic volumes.
pub fn hadwiger_synthesize(coeffs: &[f64]) -> HadwigerCombination {
    HadwigerCombination::exact(coeffs.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::VolumeMethod;
    use crate::valgebra::{GRep, Polynomial, Volume};
    use std::f64::consts::PI;

    fn exact() -> McConfig {
        McConfig::new(1, 0)
    }

    #[test]
    fn volume_is_additive_on_abutting_squares() {
        let a = ConvexBody::cuboid(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let b = ConvexBody::cuboid(&[1.0, 0.0], &[2.0, 1.0]).unwrap();
        let r = check_additivity(&Volume::exact(), &a, &b, &exact()).unwrap();
        assert!(r.residual.abs() < 1e-12);
        assert!(!r.empty_intersection);
        // Non-convex union is rejected.
        let c = ConvexBody::cuboid(&[1.0, 1.0], &[2.0, 2.0]).unwrap();
        assert!(check_additivity(&Volume::exact(), &a, &c, &exact()).is_err());
    }

    #[test]
    fn half_perimeter_is_additive() {
        let a = ConvexBody::cuboid(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let b = ConvexBody::cuboid(&[1.0, 0.0], &[2.0, 1.0]).unwrap();
        // 3 − 2 − 2 + 1 (the shared edge has V_1 = 1).
        let v1 = crate::intrinsic::IntrinsicVolume::exact(1);
        let r = check_additivity(&v1, &a, &b, &exact()).unwrap();
        assert!(r.residual.abs() < 1e-12, "{r:?}");
    }

    #[test]
    fn quadratic_density_is_additive() {
        let a = ConvexBody::cuboid(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let b = ConvexBody::cuboid(&[0.0, 1.0], &[1.0, 1.5]).unwrap();
        let g = GRep::zero(2).with_term(Polynomial::power(2, 0, 2, 1.0), ConvexBody::unit_ball(2)).unwrap();
        let r = check_additivity(&g, &a, &b, &McConfig::new(100_000, 8)).unwrap();
        assert!(r.z < 4.0, "{r:?}");
    }

    #[test]
    fn translation_behaviour_of_densities() {
        let k = ConvexBody::unit_cube(2);
        let grid: Vec<Vec<f64>> =
            (0..4).flat_map(|i| (0..4).map(move |j| vec![0.5 * i as f64 - 0.7, 0.4 * j as f64 - 0.5])).collect();
        let vol = check_polynomiality(&Volume::exact(), &k, &grid, 0, &exact()).unwrap();
        assert!(vol.consistent && vol.residual < 1e-12);
        let lin = GRep::zero(2).with_term(Polynomial::power(2, 0, 1, 1.0), ConvexBody::unit_ball(2)).unwrap();
        let f = check_polynomiality(&lin, &k, &grid, 1, &McConfig::new(40_000, 2)).unwrap();
        assert!(f.consistent, "{f:?}");
        // Slope in x₁ is vol(K + D) = 1 + 4 + π.
        let slope = f.coeffs.iter().find(|(e, _)| e == &vec![1, 0]).unwrap().1;
        assert!((slope - (5.0 + PI)).abs() < 0.2, "{slope}");
        assert!(check_polynomiality(&lin, &k, &grid[..2], 1, &exact()).is_err());
        let line: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, 0.0]).collect();
        assert!(check_polynomiality(&lin, &k, &line, 1, &exact()).is_err());
    }

    #[test]
    fn grading_of_parallel_volume() {
        let sq = ConvexBody::unit_cube(2);
        let g = GRep::parallel_volume(2);
        let phi = crate::valgebra::FnValuation::new("vol(K+D)", Default::default(), move |k, mc| {
            g.evaluate_with(k, VolumeMethod::Exact, mc)
        });
        let comps = homogeneous_components(&phi, &sq, &[0.5, 1.0, 1.5, 2.0], &exact()).unwrap();
        for (c, want) in comps.iter().zip([PI, 4.0, 1.0]) {
            assert!((c.mean - want).abs() < 1e-9, "{comps:?}");
        }
        let again = grading_solve(&[0.5, 1.0, 1.5, 2.0], &grading_synthesize(&[0.5, 1.0, 1.5, 2.0], &comps), 2).unwrap();
        for (a, b) in comps.iter().zip(&again) {
            assert!((a.mean - b.mean).abs() < 1e-9);
        }
        let v = homogeneous_components(&Volume::exact(), &sq, &[0.5, 1.0, 2.0], &exact()).unwrap();
        assert!(v[0].mean.abs() < 1e-12 && v[1].mean.abs() < 1e-12 && (v[2].mean - 1.0).abs() < 1e-12);
        assert!(homogeneous_components(&Volume::exact(), &sq, &[1.0, 1.0 + 1e-12, 2.0], &exact()).is_err());
    }

    #[test]
    fn hadwiger_examples() {
        let vol = hadwiger_decompose(&Volume::exact(), 3, None, &exact()).unwrap();
        for (i, a) in vol.coeffs.iter().enumerate() {
            assert!((a - if i == 3 { 1.0 } else { 0.0 }).abs() < 1e-9, "{vol:?}");
        }
        let syn = hadwiger_decompose(&hadwiger_synthesize(&[2.0, 0.0, 3.0]), 2, None, &exact()).unwrap();
        for (a, b) in syn.coeffs.iter().zip([2.0, 0.0, 3.0]) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!(syn.residual < 1e-9);
        // vol(K + D) = V_2 + 2V_1 + V_0 since V_0 ≡ π = πχ in the plane.
        let g = GRep::parallel_volume(2);
        let phi = crate::valgebra::FnValuation::new("vol(K+D)", Default::default(), move |k, mc| {
            g.evaluate_with(k, VolumeMethod::Exact, mc)
        });
        let f = hadwiger_decompose(&phi, 2, None, &exact()).unwrap();
        for (a, b) in f.coeffs.iter().zip([1.0, 2.0, 1.0]) {
            assert!((a - b).abs() < 1e-9, "{f:?}");
        }
        assert!(f.residual < 1e-9);
        assert!(hadwiger_decompose(&Volume::exact(), 2, Some(&[1.0, 1.0, 1.0]), &exact()).is_err());
    }

    #[test]
    fn parity_of_translation_invariant_and_odd_examples() {
        let bodies = vec![
            ConvexBody::polytope(vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.3, 1.0]]).unwrap(),
            ConvexBody::cuboid(&[0.5, 0.5], &[1.0, 2.0]).unwrap(),
        ];
        let r = check_parity(&hadwiger_synthesize(&[1.0, 1.0, 1.0]), &bodies, &exact()).unwrap();
        assert_eq!(r.max_z, 0.0);
        // ∫_K x₁ flips sign under reflection.
        let odd = GRep::zero(2).with_term(Polynomial::power(2, 0, 1, 1.0), ConvexBody::point(vec![0.0; 2]).unwrap()).unwrap();
        let r = check_parity(&odd, &bodies, &McConfig::new(50_000, 1)).unwrap();
        assert!(r.max_z > 10.0);
    }
}
