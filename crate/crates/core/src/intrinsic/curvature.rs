//! Intrinsic volumes from boundary curvature:
//! `V_i = (1/n) C(n−1, n−1−i)⁻¹ ∫_{∂K} e_{n−1−i}(k_1, …, k_{n−1}) dσ`
//! for `i < n`, with `e_j` the elementary symmetric polynomials of the
//! principal curvatures, and `V_n = (1/n) ∫_{∂K} ⟨x, ν⟩ dσ`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{binomial, elementary_symmetric, gauss_legendre};

type ParamFn<T> = Box<dyn Fn(&[f64]) -> T + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamAxis {
    pub lo: f64,
    pub hi: f64,
    /// Periodic axes use the trapezoid rule, the others Gauss–Legendre.
    pub periodic: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParamDomain {
    /// A finite boundary (the two endpoints of a segment); the parameter is
    /// the point index and `dσ` is counting measure.
    Points(usize),
    Grid(Vec<ParamAxis>),
}

/// A `C²` parameterized convex boundary with closed-form curvatures.
pub struct CurvatureBoundary {
    pub n: usize,
    pub domain: ParamDomain,
    pub position: ParamFn<Vec<f64>>,
    /// Principal curvatures `k_1 .. k_{n−1}`.
    pub curvatures: ParamFn<Vec<f64>>,
    /// Density of the boundary measure with respect to the parameter.
    pub density: ParamFn<f64>,
    /// `⟨x(s), ν(s)⟩`.
    pub normal_support: ParamFn<f64>,
}

impl CurvatureBoundary {
    /// The two endpoints of `[−a, a]`.
    pub fn segment(a: f64) -> Self {
        CurvatureBoundary {
            n: 1,
            domain: ParamDomain::Points(2),
            position: Box::new(move |s| vec![if s[0] < 0.5 { -a } else { a }]),
            curvatures: Box::new(|_| vec![]),
            density: Box::new(|_| 1.0),
            normal_support: Box::new(move |_| a),
        }
    }

    /// Plane curve given by its support function `h(θ)` and derivatives
    /// (`θ` is the angle of the outer normal). The radius of curvature is
    /// `h + h''` and arc length is `(h + h'') dθ`.
    pub fn support_curve<H, H1, H2>(h: H, dh: H1, d2h: H2) -> Self
    where
        H: Fn(f64) -> f64 + Send + Sync + Clone + 'static,
        H1: Fn(f64) -> f64 + Send + Sync + 'static,
        H2: Fn(f64) -> f64 + Send + Sync + Clone + 'static,
    {
        let (h1, h2, h3, h4) = (h.clone(), h.clone(), h.clone(), h);
        let (r1, r2) = (d2h.clone(), d2h);
        CurvatureBoundary {
            n: 2,
            domain: ParamDomain::Grid(vec![ParamAxis { lo: 0.0, hi: 2.0 * PI, periodic: true }]),
            position: Box::new(move |s| {
                let (c, si) = (s[0].cos(), s[0].sin());
                let (hv, dv) = (h1(s[0]), dh(s[0]));
                vec![hv * c - dv * si, hv * si + dv * c]
            }),
            curvatures: Box::new(move |s| vec![1.0 / (h2(s[0]) + r1(s[0]))]),
            density: Box::new(move |s| h4(s[0]) + r2(s[0])),
            normal_support: Box::new(move |s| h3(s[0])),
        }
    }

    pub fn circle(r: f64) -> Self {
        CurvatureBoundary::support_curve(move |_| r, |_| 0.0, |_| 0.0)
    }

    /// Ellipse `x²/a² + y²/b² ≤ 1`: `h(θ) = √(a² cos²θ + b² sin²θ)` and
    /// radius of curvature `a² b² / h³`.
    pub fn ellipse(a: f64, b: f64) -> Self {
        let h = move |t: f64| (a * a * t.cos().powi(2) + b * b * t.sin().powi(2)).sqrt();
        let dh = move |t: f64| (b * b - a * a) * t.sin() * t.cos() / h(t);
        let d2h = move |t: f64| a * a * b * b / h(t).powi(3) - h(t);
        CurvatureBoundary::support_curve(h, dh, d2h)
    }

    /// Ellipsoid `Σ x_i² / a_i² ≤ 1` in ℝ³, parameterized by polar and
    /// azimuthal angles. With `p² = Σ x_i² / a_i⁴`, the Gaussian curvature is
    /// `1 / (a²b²c² p⁴)` and the mean curvature
    /// `(a² + b² + c² − |x|²) / (2 a²b²c² p³)`.
    pub fn ellipsoid(a: f64, b: f64, c: f64) -> Self {
        let pos = move |s: &[f64]| {
            let (st, ct) = (s[0].sin(), s[0].cos());
            vec![a * st * s[1].cos(), b * st * s[1].sin(), c * ct]
        };
        let p = move |x: &[f64]| (x[0] * x[0] / a.powi(4) + x[1] * x[1] / b.powi(4) + x[2] * x[2] / c.powi(4)).sqrt();
        let abc2 = (a * b * c).powi(2);
        CurvatureBoundary {
            n: 3,
            domain: ParamDomain::Grid(vec![
                ParamAxis { lo: 0.0, hi: PI, periodic: false },
                ParamAxis { lo: 0.0, hi: 2.0 * PI, periodic: true },
            ]),
            position: Box::new(pos),
            curvatures: Box::new(move |s| {
                let x = pos(s);
                let pp = p(&x);
                let gauss = 1.0 / (abc2 * pp.powi(4));
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let mean = (a * a + b * b + c * c - r2) / (2.0 * abc2 * pp.powi(3));
                let disc = (mean * mean - gauss).max(0.0).sqrt();
                vec![mean + disc, mean - disc]
            }),
            density: Box::new(move |s| {
                let (st, ct) = (s[0].sin(), s[0].cos());
                let (sp, cp) = (s[1].sin(), s[1].cos());
                st * ((b * c * st * cp).powi(2) + (a * c * st * sp).powi(2) + (a * b * ct).powi(2)).sqrt()
            }),
            normal_support: Box::new(move |s| 1.0 / p(&pos(s))),
        }
    }

    pub fn sphere(r: f64) -> Self {
        CurvatureBoundary::ellipsoid(r, r, r)
    }

    /// `∫_{∂K} f dσ` by tensor quadrature, doubling the node count until
    /// successive values agree to `rel_tol`.
    pub fn integrate<F>(&self, f: F, rel_tol: f64) -> Result<f64>
    where
        F: Fn(&[f64]) -> Result<f64>,
    {
        match &self.domain {
            ParamDomain::Points(k) => {
                let mut s = 0.0;
                for i in 0..*k {
                    let p = [i as f64];
                    s += f(&p)? * (self.density)(&p);
                }
                Ok(s)
            }
            ParamDomain::Grid(axes) => {
                let mut nodes = 16usize;
                let mut last = self.tensor_rule(axes, nodes, &f)?;
                let cap = if axes.len() == 1 { 1 << 16 } else { 1 << 10 };
                while nodes < cap {
                    nodes *= 2;
                    let next = self.tensor_rule(axes, nodes, &f)?;
                    if (next - last).abs() <= rel_tol * next.abs().max(1e-300) {
                        return Ok(next);
                    }
                    last = next;
                }
                Ok(last)
            }
        }
    }

    fn tensor_rule<F>(&self, axes: &[ParamAxis], nodes: usize, f: &F) -> Result<f64>
    where
        F: Fn(&[f64]) -> Result<f64>,
    {
        let rules: Vec<(Vec<f64>, Vec<f64>)> = axes
            .iter()
            .map(|ax| {
                let len = ax.hi - ax.lo;
                if ax.periodic {
                    let x = (0..nodes).map(|j| ax.lo + len * j as f64 / nodes as f64).collect();
                    (x, vec![len / nodes as f64; nodes])
                } else {
                    let (x, w) = gauss_legendre(nodes);
                    (
                        x.iter().map(|t| ax.lo + 0.5 * len * (t + 1.0)).collect(),
                        w.iter().map(|w| 0.5 * len * w).collect(),
                    )
                }
            })
            .collect();
        let mut idx = vec![0usize; axes.len()];
        let mut s = 0.0;
        let mut p = vec![0.0; axes.len()];
        loop {
            let mut w = 1.0;
            for (d, &i) in idx.iter().enumerate() {
                p[d] = rules[d].0[i];
                w *= rules[d].1[i];
            }
            s += w * f(&p)? * (self.density)(&p);
            let mut d = 0;
            loop {
                if d == axes.len() {
                    return Ok(s);
                }
                idx[d] += 1;
                if idx[d] < nodes {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
        }
    }
}

/// `V_i` by quadrature of the curvature integral (`0 ≤ i ≤ n`).
pub fn curvature_intrinsic_volume(boundary: &CurvatureBoundary, i: usize) -> Result<f64> {
    let n = boundary.n;
    if i > n {
        return Err(Error::InvalidArgument(format!("intrinsic volume index {i} exceeds dimension {n}")));
    }
    let tol = 1e-13;
    if i == n {
        return Ok(boundary.integrate(|s| Ok((boundary.normal_support)(s)), tol)? / n as f64);
    }
    let j = n - 1 - i;
    let integral = boundary.integrate(
        |s| {
            let k = (boundary.curvatures)(s);
            if let Some(&bad) = k.iter().find(|&&x| x < -1e-12 || !x.is_finite()) {
                return Err(Error::NonConvex { curvature: bad });
            }
            Ok(elementary_symmetric(&k)[j])
        },
        tol,
    )?;
    Ok(integral / (n as f64 * binomial(n - 1, j)))
}

/// All of `V_0 .. V_n` by the curvature route.
pub fn curvature_intrinsic_volumes(boundary: &CurvatureBoundary) -> Result<Vec<f64>> {
    (0..=boundary.n).map(|i| curvature_intrinsic_volume(boundary, i)).collect()
}
