use serde::{Deserialize, Serialize};

use super::{Invariance, Parity, Polynomial, Valuation, ValuationMeta};
use crate::bodies::{BodySpec, ConvexBody, VolumeMethod};
use crate::error::{check_dim, Error, Result};
use crate::mc::{box_volume, run_mc, uniform_in_box, McConfig, McEstimate};

/// Densities beyond this degree are rejected.
pub const MAX_DENSITY_DEGREE: u32 = 12;

/// One summand `K ↦ ∫_{K+A} p`.
#[derive(Clone, Debug)]
pub struct GTerm {
    pub density: Polynomial,
    pub body: ConvexBody,
}

/// `K ↦ Σ_i ∫_{K+A_i} p_i + c·χ(K)`, with `χ` kept as a formal unit.
#[derive(Clone, Debug)]
pub struct GRep {
    n: usize,
    pub chi: f64,
    pub terms: Vec<GTerm>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermSpec {
    density: Polynomial,
    body: BodySpec,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GRepSpec {
    #[serde(default)]
    chi: f64,
    #[serde(default)]
    terms: Vec<TermSpec>,
    /// Needed only when there are no terms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
}

impl GRep {
    pub fn zero(n: usize) -> Self {
        GRep { n, chi: 0.0, terms: vec![] }
    }

    pub fn chi_only(n: usize, c: f64) -> Self {
        GRep { n, chi: c, terms: vec![] }
    }

    /// `K ↦ vol(K)`.
    pub fn volume(n: usize) -> Self {
        GRep::zero(n).with_term(Polynomial::constant(n, 1.0), ConvexBody::point(vec![0.0; n]).unwrap()).unwrap()
    }

    /// `K ↦ vol(K + D)`.
    pub fn parallel_volume(n: usize) -> Self {
        GRep::zero(n).with_term(Polynomial::constant(n, 1.0), ConvexBody::unit_ball(n)).unwrap()
    }

    /// `V_1` in the plane, from `vol(K + D) = V_2 + 2V_1 + π χ`.
    pub fn plane_v1() -> Self {
        let mut g = GRep::parallel_volume(2).scaled(0.5);
        g = g.with_term(Polynomial::constant(2, -0.5), ConvexBody::point(vec![0.0; 2]).unwrap()).unwrap();
        g.chi = -std::f64::consts::FRAC_PI_2;
        g
    }

    pub fn with_term(mut self, density: Polynomial, body: ConvexBody) -> Result<Self> {
        check_dim(self.n, density.dim())?;
        check_dim(self.n, body.dim())?;
        if density.degree() > MAX_DENSITY_DEGREE {
            return Err(Error::InvalidArgument(format!(
                "density degree {} exceeds the supported maximum {MAX_DENSITY_DEGREE}",
                density.degree()
            )));
        }
        self.terms.push(GTerm { density, body });
        Ok(self)
    }

    pub fn with_chi(mut self, c: f64) -> Self {
        self.chi = c;
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn scaled(&self, s: f64) -> Self {
        GRep {
            n: self.n,
            chi: self.chi * s,
            terms: self.terms.iter().map(|t| GTerm { density: t.density.scale(s), body: t.body.clone() }).collect(),
        }
    }

    pub fn sum(&self, other: &GRep) -> Result<Self> {
        check_dim(self.n, other.n)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(GRep { n: self.n, chi: self.chi + other.chi, terms })
    }

    pub fn density_degree(&self) -> u32 {
        self.terms.iter().map(|t| t.density.degree()).max().unwrap_or(0)
    }

    /// Whether every density is constant (then the valuation is
    /// translation invariant).
    pub fn translation_invariant(&self) -> bool {
        self.terms.iter().all(|t| t.density.degree() == 0)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: GRepSpec = serde_json::from_str(s)?;
        let n = match (spec.terms.first(), spec.dim) {
            (Some(t), _) => t.density.dim(),
            (None, Some(n)) => n,
            (None, None) => return Err(Error::InvalidArgument("chi-only representative needs `dim`".into())),
        };
        let mut g = GRep::chi_only(n, spec.chi);
        for t in spec.terms {
            g = g.with_term(t.density, t.body.build()?)?;
        }
        Ok(g)
    }

    pub fn to_json(&self) -> Result<String> {
        let spec = GRepSpec {
            chi: self.chi,
            terms: self
                .terms
                .iter()
                .map(|t| TermSpec { density: t.density.clone(), body: BodySpec::describe(&t.body) })
                .collect(),
            dim: if self.terms.is_empty() { Some(self.n) } else { None },
        };
        Ok(serde_json::to_string(&spec)?)
    }

    /// `∫_{K+A} p` for one term. Constant densities use `method` for the
    /// volume; other densities are integrated by sampling the bounding box.
    pub fn term_integral(term: &GTerm, k: &ConvexBody, method: VolumeMethod, mc: &McConfig) -> Result<McEstimate> {
        check_dim(term.body.dim(), k.dim())?;
        let s = ConvexBody::minkowski_sum(vec![k.clone(), term.body.clone()])?;
        if let Some(c) = term.density.as_constant() {
            if c == 0.0 {
                return Ok(McEstimate::exact(0.0));
            }
            return Ok(s.volume(method, mc)?.scale(c));
        }
        let (lo, hi) = s.bounding_box();
        let vb = box_volume(&lo, &hi);
        let n = k.dim();
        run_mc(mc, |rng| {
            let mut x = vec![0.0; n];
            uniform_in_box(rng, &lo, &hi, &mut x);
            Ok(if s.dist_le(&x, 0.0, 0.0)? { vb * term.density.eval(&x) } else { 0.0 })
        })
    }

    /// The terms only, without the `χ` coefficient.
    pub fn evaluate_terms(&self, k: &ConvexBody, method: VolumeMethod, mc: &McConfig) -> Result<McEstimate> {
        check_dim(self.n, k.dim())?;
        let vals = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| Ok((1.0, GRep::term_integral(t, k, method, &mc.child(i as u64))?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(McEstimate::linear_combination(&vals))
    }

    pub fn evaluate_with(&self, k: &ConvexBody, method: VolumeMethod, mc: &McConfig) -> Result<McEstimate> {
        Ok(self.evaluate_terms(k, method, mc)?.add_exact(self.chi))
    }
}

impl Valuation for GRep {
    fn evaluate(&self, k: &ConvexBody, mc: &McConfig) -> Result<McEstimate> {
        self.evaluate_with(k, VolumeMethod::MonteCarlo, mc)
    }

    fn meta(&self) -> ValuationMeta {
        let invariance = Invariance::None;
        let parity = if self.translation_invariant()
            && self.terms.iter().all(|t| {
                let r = t.body.reflected();
                crate::bodies::hausdorff_distance(&r, &t.body, 64).map(|d| d < 1e-12).unwrap_or(false)
            }) {
            Parity::Even
        } else {
            Parity::Mixed
        };
        let degree = if self.terms.is_empty() { Some(0) } else { None };
        ValuationMeta { degree, parity, invariance }
    }

    fn name(&self) -> String {
        format!("grep[{} terms, chi {}]", self.terms.len(), self.chi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn point_structuring_body_gives_volume() {
        let k = ConvexBody::cuboid(&[0.0, 0.0], &[2.0, 1.5]).unwrap();
        let v = GRep::volume(2).evaluate(&k, &McConfig::new(100_000, 3)).unwrap();
        // The box fills its own bounding box, so every sample hits.
        assert!((v.mean - 3.0).abs() < 1e-6, "{v:?}");
        let e = GRep::volume(2).evaluate_with(&k, VolumeMethod::Exact, &McConfig::new(1, 0)).unwrap();
        assert_eq!(e.mean, 3.0);
    }

    #[test]
    fn unit_ball_structuring_body_on_square() {
        let sq = ConvexBody::unit_cube(2);
        let v = GRep::parallel_volume(2).evaluate(&sq, &McConfig::new(400_000, 4)).unwrap();
        assert!(v.z_against(1.0 + 4.0 + PI) < 4.0, "{v:?}");
    }

    #[test]
    fn chi_only_is_constant() {
        let g = GRep::chi_only(3, 2.5);
        let v = g.evaluate(&ConvexBody::unit_ball(3), &McConfig::new(10, 0)).unwrap();
        assert_eq!(v.mean, 2.5);
        assert_eq!(v.stderr, 0.0);
    }

    #[test]
    fn linear_density_on_box() {
        // ∫_{[0,2]×[0,1]} x₁ = 2.
        let k = ConvexBody::cuboid(&[0.0, 0.0], &[2.0, 1.0]).unwrap();
        let g = GRep::zero(2).with_term(Polynomial::power(2, 0, 1, 1.0), ConvexBody::point(vec![0.0; 2]).unwrap()).unwrap();
        let v = g.evaluate(&k, &McConfig::new(200_000, 5)).unwrap();
        assert!(v.z_against(2.0) < 4.0, "{v:?}");
    }

    #[test]
    fn json_round_trip_and_errors() {
        let text = r#"{"chi": 1.5, "terms": [{"density": {"0,0": 1.0}, "body": {"type":"ball","center":[0,0],"radius":1}}]}"#;
        let g = GRep::from_json(text).unwrap();
        assert_eq!(g.dim(), 2);
        assert_eq!(g.chi, 1.5);
        let back = GRep::from_json(&g.to_json().unwrap()).unwrap();
        assert_eq!(back.terms.len(), 1);
        let e = back.evaluate_with(&ConvexBody::unit_cube(2), VolumeMethod::Exact, &McConfig::new(1, 0)).unwrap();
        assert!((e.mean - (1.0 + 4.0 + PI + 1.5)).abs() < 1e-12);
        let deep = Polynomial::power(2, 0, 13, 1.0);
        assert!(GRep::zero(2).with_term(deep, ConvexBody::unit_ball(2)).is_err());
        assert!(GRep::from_json(r#"{"chi": 1}"#).is_err());
        assert_eq!(GRep::from_json(r#"{"chi": 1, "dim": 2}"#).unwrap().dim(), 2);
    }
}
