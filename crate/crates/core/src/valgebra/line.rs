//! Exact product of polynomial valuations on the line.
//!
//! Every valuation on intervals has the form `φ([s, t]) = ∫_s^t f + h(s)`
//! with `h(s) = φ({s})`. For `μ(· + [a₀, a₁])` with density `p` and
//! antiderivative `P`, `f(z) = p(z + a₁)` and `h(s) = P(s + a₁) − P(s + a₀)`.
//! Sweeping the rectangle `A × B` along the diagonal gives the product
//! `h = h_φ h_ψ`, `f = f_φ h_ψ + f_ψ h_φ`.

use super::polynomial::uni;
use super::{GRep, Polynomial};
use crate::bodies::ConvexBody;
use crate::error::{check_dim, Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct LineValuation {
    /// `f`, dense coefficients.
    pub f: Vec<f64>,
    /// `h`, dense coefficients.
    pub h: Vec<f64>,
}

fn dense(p: &Polynomial) -> Vec<f64> {
    let mut out = vec![0.0; p.degree() as usize + 1];
    for (e, c) in p.terms() {
        out[e[0] as usize] += c;
    }
    out
}

fn sparse(p: &[f64]) -> Polynomial {
    let mut q = Polynomial::zero(1);
    for (k, &c) in p.iter().enumerate() {
        q = q.with_term(vec![k as u32], c);
    }
    q
}

impl LineValuation {
    pub fn from_grep(g: &GRep) -> Result<Self> {
        check_dim(1, g.dim())?;
        let mut f = vec![];
        let mut h = vec![g.chi];
        for t in &g.terms {
            let a1 = t.body.support(&[1.0])?;
            let a0 = -t.body.support(&[-1.0])?;
            let p = dense(&t.density);
            let big = uni::integral(&p);
            f = uni::add(&f, &uni::shift(&p, a1));
            h = uni::add(&h, &uni::add(&uni::shift(&big, a1), &uni::scale(&uni::shift(&big, a0), -1.0)));
        }
        Ok(LineValuation { f, h })
    }

    pub fn eval_interval(&self, s: f64, t: f64) -> f64 {
        let big = uni::integral(&self.f);
        uni::eval(&big, t) - uni::eval(&big, s) + uni::eval(&self.h, s)
    }

    pub fn evaluate(&self, k: &ConvexBody) -> Result<f64> {
        check_dim(1, k.dim())?;
        Ok(self.eval_interval(-k.support(&[-1.0])?, k.support(&[1.0])?))
    }

    pub fn product(&self, other: &LineValuation) -> LineValuation {
        LineValuation {
            f: uni::add(&uni::mul(&self.f, &other.h), &uni::mul(&other.f, &self.h)),
            h: uni::mul(&self.h, &other.h),
        }
    }

    /// A representative: `χ` carries `h(0)`, and the rest of `h` is the
    /// left-endpoint valuation `∫_{s−1}^{s} ρ = ∫_{K+[−1,0]} ρ − ∫_K ρ`,
    /// where `R(s) − R(s−1) = h(s) − h(0)` and `ρ = R'`.
    pub fn to_grep(&self) -> Result<GRep> {
        let h0 = uni::eval(&self.h, 0.0);
        let mut ht = self.h.clone();
        if !ht.is_empty() {
            ht[0] = 0.0;
        }
        while ht.last() == Some(&0.0) {
            ht.pop();
        }
        // Unknowns r_1 .. r_{d+1}; s^k − (s−1)^k has degree k−1 with
        // leading coefficient k, so the system is triangular.
        let d1 = ht.len();
        let mut r = vec![0.0; d1 + 1];
        let cols: Vec<Vec<f64>> = (1..=d1)
            .map(|k| {
                let mut mono = vec![0.0; k + 1];
                mono[k] = 1.0;
                let diff = uni::add(&mono, &uni::scale(&uni::shift(&mono, -1.0), -1.0));
                diff[..k].to_vec()
            })
            .collect();
        for row in (0..d1).rev() {
            let k = row + 1;
            let mut rhs = ht[row];
            for kk in k + 1..=d1 {
                rhs -= r[kk] * cols[kk - 1][row];
            }
            let piv = cols[k - 1][row];
            if piv == 0.0 {
                return Err(Error::Singular("difference operator".into()));
            }
            r[k] = rhs / piv;
        }
        let rho = uni::derivative(&r);
        let origin = ConvexBody::point(vec![0.0])?;
        let mut g = GRep::chi_only(1, h0);
        let f_minus_rho = uni::add(&self.f, &uni::scale(&rho, -1.0));
        if f_minus_rho.iter().any(|&c| c != 0.0) {
            g = g.with_term(sparse(&f_minus_rho), origin)?;
        }
        if rho.iter().any(|&c| c != 0.0) {
            g = g.with_term(sparse(&rho), ConvexBody::cuboid(&[-1.0], &[0.0])?)?;
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::VolumeMethod;
    use crate::mc::McConfig;
    use crate::valgebra::{valuation_product, ProductConfig, Valuation};

    fn seg(a: f64, b: f64) -> ConvexBody {
        ConvexBody::cuboid(&[a], &[b]).unwrap()
    }

    fn sample_reps() -> Vec<GRep> {
        vec![
            GRep::zero(1).with_term(Polynomial::power(1, 0, 1, 1.0), seg(-0.5, 0.25)).unwrap().with_chi(0.3),
            GRep::zero(1)
                .with_term(Polynomial::constant(1, 2.0).add(&Polynomial::power(1, 0, 2, -1.0)).unwrap(), seg(0.0, 1.0))
                .unwrap(),
            GRep::zero(1).with_term(Polynomial::power(1, 0, 1, 0.5), seg(-1.0, 1.0)).unwrap().with_chi(-1.0),
        ]
    }

    #[test]
    fn representation_matches_direct_integration() {
        let mc = McConfig::new(1, 0);
        for g in sample_reps() {
            let l = LineValuation::from_grep(&g).unwrap();
            for k in [seg(0.0, 1.0), seg(-0.3, 2.2), seg(1.5, 1.5)] {
                let direct = exact_line_grep(&g, &k);
                assert!((l.evaluate(&k).unwrap() - direct).abs() < 1e-12);
                let back = l.to_grep().unwrap();
                assert!((exact_line_grep(&back, &k) - direct).abs() < 1e-10);
                let _ = back.evaluate_with(&k, VolumeMethod::Exact, &mc);
            }
        }
    }

    /// `Σ ∫_{K+A} p + χ` in closed form on the line.
    fn exact_line_grep(g: &GRep, k: &ConvexBody) -> f64 {
        let (s, t) = (-k.support(&[-1.0]).unwrap(), k.support(&[1.0]).unwrap());
        let mut total = g.chi;
        for term in &g.terms {
            let (a0, a1) = (-term.body.support(&[-1.0]).unwrap(), term.body.support(&[1.0]).unwrap());
            let big = uni::integral(&dense(&term.density));
            total += uni::eval(&big, t + a1) - uni::eval(&big, s + a0);
        }
        total
    }

    #[test]
    fn product_formula_matches_sampling() {
        let reps = sample_reps();
        let k = seg(-0.2, 0.9);
        for (i, a) in reps.iter().enumerate() {
            for (j, b) in reps.iter().enumerate().skip(i) {
                let exact = LineValuation::from_grep(a).unwrap().product(&LineValuation::from_grep(b).unwrap());
                let mc = McConfig::new(200_000, (10 * i + j) as u64);
                let est = valuation_product(a, b, &k, &ProductConfig::default(), &mc).unwrap();
                assert!(est.z_against(exact.evaluate(&k).unwrap()) < 4.0, "{i}{j}: {est:?}");
            }
        }
    }

    #[test]
    fn associativity_through_sampled_products() {
        let reps = sample_reps();
        let (a, b, c) = (&reps[0], &reps[1], &reps[2]);
        let la = LineValuation::from_grep(a).unwrap();
        let lb = LineValuation::from_grep(b).unwrap();
        let lc = LineValuation::from_grep(c).unwrap();
        let ab = la.product(&lb).to_grep().unwrap();
        let bc = lb.product(&lc).to_grep().unwrap();
        let k = seg(0.1, 1.3);
        let cfg = ProductConfig::default();
        let left = valuation_product(&ab, c, &k, &cfg, &McConfig::new(300_000, 1)).unwrap();
        let right = valuation_product(a, &bc, &k, &cfg, &McConfig::new(300_000, 2)).unwrap();
        assert!(left.z_score(&right) < 4.0, "{left:?} {right:?}");
        let exact = la.product(&lb).product(&lc).evaluate(&k).unwrap();
        assert!(left.z_against(exact) < 4.0);
        // χ-only representatives evaluate exactly.
        let unit = GRep::chi_only(1, 1.0);
        assert_eq!(unit.evaluate(&k, &McConfig::new(1, 0)).unwrap().mean, 1.0);
    }
}
