use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polynomial density in `n` real variables, stored as exponent vectors.
/// Serialized as a map from comma-separated exponents to coefficients,
/// e.g. `{"2,0": 1.0, "0,0": -0.5}` for `x₁² − ½`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, f64>", into = "BTreeMap<String, f64>")]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Polynomial { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Polynomial::zero(n).with_term(vec![0; n], c)
    }

    pub fn monomial(exponents: Vec<u32>, c: f64) -> Self {
        let n = exponents.len();
        Polynomial::zero(n).with_term(exponents, c)
    }

    /// `c · x_i^power`.
    pub fn power(n: usize, i: usize, power: u32, c: f64) -> Self {
        let mut e = vec![0; n];
        e[i] = power;
        Polynomial::monomial(e, c)
    }

    pub fn with_term(mut self, exponents: Vec<u32>, c: f64) -> Self {
        assert_eq!(exponents.len(), self.n, "exponent vector length");
        if c != 0.0 {
            *self.terms.entry(exponents).or_insert(0.0) += c;
        }
        self.terms.retain(|_, v| *v != 0.0);
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, f64)> {
        self.terms.iter().map(|(k, v)| (k, *v))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree (0 for the zero polynomial).
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// The constant value when the polynomial has degree 0.
    pub fn as_constant(&self) -> Option<f64> {
        if self.degree() == 0 {
            Some(self.terms.values().sum())
        } else {
            None
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(x).map(|(&k, &v)| v.powi(k as i32)).product::<f64>())
            .sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut p = Polynomial::zero(self.n);
        for (e, c) in &self.terms {
            p = p.with_term(e.clone(), c * s);
        }
        p
    }

    pub fn add(&self, other: &Polynomial) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let mut p = self.clone();
        for (e, c) in &other.terms {
            p = p.with_term(e.clone(), *c);
        }
        Ok(p)
    }
}

impl TryFrom<BTreeMap<String, f64>> for Polynomial {
    type Error = Error;

    fn try_from(map: BTreeMap<String, f64>) -> Result<Self> {
        let mut n = None;
        let mut p = Polynomial::zero(0);
        for (key, c) in map {
            let e: Vec<u32> = key
                .split(',')
                .map(|s| s.trim().parse::<u32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::InvalidArgument(format!("bad monomial key {key:?}")))?;
            match n {
                None => {
                    n = Some(e.len());
                    p = Polynomial::zero(e.len());
                }
                Some(m) if m != e.len() => {
                    return Err(Error::InvalidArgument(format!("monomial {key:?} has {} exponents, expected {m}", e.len())));
                }
                _ => {}
            }
            p = p.with_term(e, c);
        }
        if n.is_none() {
            return Err(Error::InvalidArgument("density needs at least one monomial".into()));
        }
        Ok(p)
    }
}

impl From<Polynomial> for BTreeMap<String, f64> {
    fn from(p: Polynomial) -> Self {
        let mut map: BTreeMap<String, f64> =
            p.terms.iter().map(|(e, c)| (e.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","), *c)).collect();
        if map.is_empty() {
            map.insert(vec!["0"; p.n].join(","), 0.0);
        }
        map
    }
}

/// Univariate polynomial helpers on dense coefficient vectors (lowest
/// degree first).
pub(crate) mod uni {
    pub fn eval(p: &[f64], x: f64) -> f64 {
        p.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; a.len().max(b.len())];
        for (i, c) in a.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in b.iter().enumerate() {
            out[i] += c;
        }
        out
    }

    pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
        if a.is_empty() || b.is_empty() {
            return vec![];
        }
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }

    pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
        a.iter().map(|c| c * s).collect()
    }

    /// Antiderivative vanishing at 0.
    pub fn integral(a: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; a.len() + 1];
        for (i, c) in a.iter().enumerate() {
            out[i + 1] = c / (i + 1) as f64;
        }
        out
    }

    pub fn derivative(a: &[f64]) -> Vec<f64> {
        a.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect()
    }

    /// `x ↦ p(x + s)`.
    pub fn shift(p: &[f64], s: f64) -> Vec<f64> {
        let mut out = vec![0.0; p.len()];
        // Horner in polynomial arithmetic: out = (...(c_d)(x+s) + c_{d−1})...
        for c in p.iter().rev() {
            let mut next = vec![0.0; out.len()];
            for i in 0..out.len() {
                if i + 1 < next.len() {
                    next[i + 1] += out[i];
                }
                next[i] += s * out[i];
            }
            next[0] += c;
            out = next;
        }
        out
    }
}
