//! Valuations as evaluators on convex bodies, the representatives
//! `K ↦ μ(K + A)` with polynomial densities, grading and Hadwiger
//! decompositions, and the product of valuations.

mod checks;
mod grep;
mod line;
mod polynomial;
mod product;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use checks::{
    check_additivity, check_parity, check_polynomiality, grading_solve, grading_synthesize, hadwiger_decompose,
    hadwiger_synthesize, homogeneous_components, AdditivityReport, HadwigerFit, ParityReport, PolynomialityFit,
};
pub use grep::{GRep, GTerm};
pub use line::LineValuation;
pub use polynomial::Polynomial;
pub use product::{pairing_matrix, valuation_product, PairingMatrix, ProductConfig};

use crate::bodies::{ConvexBody, VolumeMethod};
use crate::error::Result;
use crate::intrinsic::{intrinsic_volume_with, IntrinsicRoute};
use crate::mc::{McConfig, McEstimate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

/// Group under which a valuation is known to be invariant (beyond
/// translations where applicable).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Invariance {
    None,
    SO,
    O,
    U,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValuationMeta {
    pub degree: Option<usize>,
    pub parity: Parity,
    pub invariance: Invariance,
}

impl Default for ValuationMeta {
    fn default() -> Self {
        ValuationMeta { degree: None, parity: Parity::Mixed, invariance: Invariance::None }
    }
}

impl ValuationMeta {
    pub fn even_invariant(degree: Option<usize>, invariance: Invariance) -> Self {
        ValuationMeta { degree, parity: Parity::Even, invariance }
    }
}

/// A (possibly sampled) valuation. Evaluators must be pure: the same body
/// and configuration give the same estimate.
pub trait Valuation: Send + Sync {
    fn evaluate(&self, k: &ConvexBody, mc: &McConfig) -> Result<McEstimate>;

    fn meta(&self) -> ValuationMeta {
        ValuationMeta::default()
    }

    fn name(&self) -> String {
        "valuation".into()
    }
}

/// Lebesgue volume.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Volume {
    pub method: VolumeMethod,
}

impl Volume {
    pub fn exact() -> Self {
        Volume { method: VolumeMethod::Exact }
    }
}

impl Valuation for Volume {
    fn evaluate(&self, k: &ConvexBody, mc: &McConfig) -> Result<McEstimate> {
        k.volume(self.method, mc)
    }

    fn meta(&self) -> ValuationMeta {
        ValuationMeta::even_invariant(None, Invariance::O)
    }

    fn name(&self) -> String {
        "vol".into()
    }
}

/// Euler characteristic: 1 on every nonempty convex body.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EulerCharacteristic;

impl Valuation for EulerCharacteristic {
    fn evaluate(&self, _k: &ConvexBody, _mc: &McConfig) -> Result<McEstimate> {
        Ok(McEstimate::exact(1.0))
    }

    fn meta(&self) -> ValuationMeta {
        ValuationMeta::even_invariant(Some(0), Invariance::O)
    }

    fn name(&self) -> String {
        "chi".into()
    }
}

/// `Σ a_i V_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct HadwigerCombination {
    pub coeffs: Vec<f64>,
    pub route: IntrinsicRoute,
}

impl HadwigerCombination {
    pub fn exact(coeffs: Vec<f64>) -> Self {
        HadwigerCombination { coeffs, route: IntrinsicRoute::Exact }
    }
}

impl Valuation for HadwigerCombination {
    fn evaluate(&self, k: &ConvexBody, mc: &McConfig) -> Result<McEstimate> {
        let mut terms = Vec::new();
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a != 0.0 {
                terms.push((a, intrinsic_volume_with(k, i, self.route, &mc.child(i as u64))?));
            }
        }
        Ok(McEstimate::linear_combination(&terms))
    }

    fn meta(&self) -> ValuationMeta {
        let nz: Vec<usize> = (0..self.coeffs.len()).filter(|&i| self.coeffs[i] != 0.0).collect();
        let degree = if nz.len() == 1 { Some(nz[0]) } else { None };
        ValuationMeta::even_invariant(degree, Invariance::O)
    }

    fn name(&self) -> String {
        format!("hadwiger{:?}", self.coeffs)
    }
}

type Evaluator = dyn Fn(&ConvexBody, &McConfig) -> Result<McEstimate> + Send + Sync;

/// Valuation from a closure.
pub struct FnValuation {
    f: Box<Evaluator>,
    meta: ValuationMeta,
    name: String,
}

impl FnValuation {
    pub fn new<F>(name: &str, meta: ValuationMeta, f: F) -> Self
    where
        F: Fn(&ConvexBody, &McConfig) -> Result<McEstimate> + Send + Sync + 'static,
    {
        FnValuation { f: Box::new(f), meta, name: name.into() }
    }
}

impl Valuation for FnValuation {
    fn evaluate(&self, k: &ConvexBody, mc: &McConfig) -> Result<McEstimate> {
        (self.f)(k, mc)
    }

    fn meta(&self) -> ValuationMeta {
        self.meta
    }

    fn name(&self) -> String {
        self.name.clone()
    }
}

/// `Σ w_i φ_i`, each summand on its own sub-stream.
#[derive(Clone, Default)]
pub struct LinearCombination {
    pub terms: Vec<(f64, Arc<dyn Valuation>)>,
}

impl LinearCombination {
    pub fn new() -> Self {
        LinearCombination::default()
    }

    pub fn with(mut self, w: f64, phi: Arc<dyn Valuation>) -> Self {
        self.terms.push((w, phi));
        self
    }
}

impl Valuation for LinearCombination {
    fn evaluate(&self, k: &ConvexBody, mc: &McConfig) -> Result<McEstimate> {
        let vals = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, (w, p))| Ok((*w, p.evaluate(k, &mc.child(i as u64))?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(McEstimate::linear_combination(&vals))
    }

    fn meta(&self) -> ValuationMeta {
        let metas: Vec<ValuationMeta> = self.terms.iter().map(|(_, p)| p.meta()).collect();
        let Some(first) = metas.first().copied() else {
            return ValuationMeta::default();
        };
        let degree = if metas.iter().all(|m| m.degree == first.degree) { first.degree } else { None };
        let parity = if metas.iter().all(|m| m.parity == first.parity) { first.parity } else { Parity::Mixed };
        let invariance =
            if metas.iter().all(|m| m.invariance == first.invariance) { first.invariance } else { Invariance::None };
        ValuationMeta { degree, parity, invariance }
    }

    fn name(&self) -> String {
        self.terms.iter().map(|(w, p)| format!("{w}·{}", p.name())).collect::<Vec<_>>().join(" + ")
    }
}
