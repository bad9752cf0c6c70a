use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{check_dim, Error, Result};
use crate::linalg::dot;

/// `{ c + R y : Σ (y_i / a_i)² ≤ 1 }` with `R` orthogonal.
#[derive(Clone, Debug)]
pub struct Ellipsoid {
    center: Vec<f64>,
    /// Columns are the principal axes.
    axes: DMatrix<f64>,
    semi_axes: Vec<f64>,
}

impl Ellipsoid {
    /// From a symmetric positive-definite shape matrix `Q`:
    /// `{ x : (x − c)ᵀ Q⁻¹ (x − c) ≤ 1 }`.
    pub fn from_shape(center: Vec<f64>, shape: DMatrix<f64>) -> Result<Self> {
        let n = center.len();
        if shape.nrows() != n || shape.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: shape.nrows() });
        }
        let asym = (&shape - shape.transpose()).norm();
        if !(asym <= 1e-12 * shape.norm().max(1.0)) {
            return Err(Error::InvalidBody("ellipsoid shape matrix must be symmetric".into()));
        }
        let eig = SymmetricEigen::new(shape);
        if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::InvalidBody("ellipsoid shape matrix must be positive definite".into()));
        }
        let semi_axes = eig.eigenvalues.iter().map(|l| l.sqrt()).collect();
        Ok(Ellipsoid { center, axes: eig.eigenvectors, semi_axes })
    }

    /// Axis-aligned ellipsoid.
    pub fn from_semi_axes(center: Vec<f64>, semi_axes: Vec<f64>) -> Result<Self> {
        check_dim(center.len(), semi_axes.len())?;
        if semi_axes.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidBody("semi-axes must be positive".into()));
        }
        let n = center.len();
        Ok(Ellipsoid { center, axes: DMatrix::identity(n, n), semi_axes })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn semi_axes(&self) -> &[f64] {
        &self.semi_axes
    }

    pub fn axes(&self) -> &DMatrix<f64> {
        &self.axes
    }

    /// Shape matrix `Q = R diag(a²) Rᵀ`.
    pub fn shape(&self) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&DVector::from_iterator(self.dim(), self.semi_axes.iter().map(|a| a * a)));
        &self.axes * d * self.axes.transpose()
    }

    fn to_local(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|j| (0..n).map(|i| self.axes[(i, j)] * (x[i] - self.center[i])).sum())
            .collect()
    }

    fn from_local(&self, y: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|i| self.center[i] + (0..n).map(|j| self.axes[(i, j)] * y[j]).sum::<f64>()).collect()
    }

    pub fn volume(&self) -> f64 {
        crate::linalg::unit_ball_volume(self.dim()) * self.semi_axes.iter().product::<f64>()
    }

    pub fn support(&self, u: &[f64]) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for j in 0..n {
            let w: f64 = (0..n).map(|i| self.axes[(i, j)] * u[i]).sum();
            s += (self.semi_axes[j] * w).powi(2);
        }
        dot(&self.center, u) + s.sqrt()
    }

    pub fn support_point(&self, u: &[f64], out: &mut [f64]) {
        let n = self.dim();
        let mut y = vec![0.0; n];
        let mut s = 0.0;
        for j in 0..n {
            let w: f64 = (0..n).map(|i| self.axes[(i, j)] * u[i]).sum();
            let a2 = self.semi_axes[j] * self.semi_axes[j];
            y[j] = a2 * w;
            s += a2 * w * w;
        }
        let s = s.sqrt();
        for i in 0..n {
            out[i] = self.center[i];
            if s > 0.0 {
                out[i] += (0..n).map(|j| self.axes[(i, j)] * y[j]).sum::<f64>() / s;
            }
        }
    }

    /// Gauge `Σ (y_i / a_i)²` of `x` in local coordinates.
    pub fn gauge_sq(&self, x: &[f64]) -> f64 {
        self.to_local(x).iter().zip(&self.semi_axes).map(|(y, a)| (y / a).powi(2)).sum()
    }

    /// Nearest point and distance. Outside points solve
    /// `Σ (a_i y_i / (t + a_i²))² = 1` for `t ≥ 0` by Newton's method from
    /// `t = 0`; the function is convex and decreasing there, so the
    /// iterates increase monotonically to the root.
    pub fn nearest(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let y = self.to_local(x);
        let a = &self.semi_axes;
        let g: f64 = y.iter().zip(a).map(|(y, a)| (y / a).powi(2)).sum();
        if g <= 1.0 {
            return (0.0, x.to_vec());
        }
        let mut t = 0.0f64;
        for _ in 0..200 {
            let mut f = -1.0;
            let mut df = 0.0;
            for (yi, ai) in y.iter().zip(a) {
                let a2 = ai * ai;
                let q = ai * yi / (t + a2);
                f += q * q;
                df -= 2.0 * q * q / (t + a2);
            }
            if df == 0.0 {
                break;
            }
            let step = f / df;
            t -= step;
            if step.abs() <= 1e-15 * t.abs().max(1e-300) {
                break;
            }
        }
        let z: Vec<f64> = y.iter().zip(a).map(|(yi, ai)| ai * ai * yi / (t + ai * ai)).collect();
        let d = crate::linalg::dist(&z, &y);
        (d, self.from_local(&z))
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        self.nearest(x).0
    }

    pub fn translated(&self, v: &[f64]) -> Ellipsoid {
        Ellipsoid {
            center: self.center.iter().zip(v).map(|(a, b)| a + b).collect(),
            axes: self.axes.clone(),
            semi_axes: self.semi_axes.clone(),
        }
    }

    /// Intersection with `{ b + Q y }` in the coordinates `y`; `None` when
    /// the slice is empty or a single point.
    pub fn slice(&self, base: &[f64], q: &DMatrix<f64>) -> Result<Option<Ellipsoid>> {
        let n = self.dim();
        let ainv2 = DMatrix::from_diagonal(&DVector::from_iterator(n, self.semi_axes.iter().map(|a| 1.0 / (a * a))));
        let w0 = DVector::from_vec(self.to_local(base));
        let m = self.axes.transpose() * q;
        let p = m.transpose() * &ainv2 * &m;
        let qv = m.transpose() * &ainv2 * &w0;
        let s = (w0.transpose() * &ainv2 * &w0)[(0, 0)];
        let pinv = p.clone().try_inverse().ok_or_else(|| Error::Singular("ellipsoid slice".into()))?;
        let y0 = -(&pinv * &qv);
        let rho = 1.0 - s + (qv.transpose() * &pinv * &qv)[(0, 0)];
        if rho <= 0.0 {
            return Ok(None);
        }
        let mut shape = pinv * rho;
        shape = (&shape + shape.transpose()) * 0.5;
        Ellipsoid::from_shape(y0.iter().cloned().collect(), shape).map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn shape_and_axes_agree() {
        let q = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0]);
        let e = Ellipsoid::from_shape(vec![0.0, 0.0], q).unwrap();
        assert!((e.volume() - 2.0 * PI).abs() < 1e-12);
        assert!((e.support(&[1.0, 0.0]) - 2.0).abs() < 1e-12);
        assert!((e.support(&[0.0, 1.0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distance_on_axis() {
        let e = Ellipsoid::from_semi_axes(vec![0.0, 0.0, 0.0], vec![1.0, 1.0, 2.0]).unwrap();
        assert!((e.distance(&[0.0, 0.0, 3.0]) - 1.0).abs() < 1e-12);
        assert!((e.distance(&[3.0, 0.0, 0.0]) - 2.0).abs() < 1e-12);
        assert_eq!(e.distance(&[0.5, 0.0, 1.0]), 0.0);
    }

    #[test]
    fn nearest_point_is_on_boundary_with_normal_residual() {
        let e = Ellipsoid::from_semi_axes(vec![1.0, -1.0], vec![2.0, 0.5]).unwrap();
        let x = [4.0, 3.0];
        let (d, p) = e.nearest(&x);
        assert!((e.gauge_sq(&p) - 1.0).abs() < 1e-12);
        let u: Vec<f64> = x.iter().zip(&p).map(|(a, b)| (a - b) / d).collect();
        assert!((e.support(&u) - dot(&p, &u)).abs() < 1e-10);
    }

    #[test]
    fn central_slice_of_ellipsoid() {
        let e = Ellipsoid::from_semi_axes(vec![0.0; 3], vec![1.0, 2.0, 3.0]).unwrap();
        let q = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let s = e.slice(&[0.0, 0.0, 1.5], &q).unwrap().unwrap();
        // z = 1.5 shrinks the cross-section by √(1 − 1/4).
        let f = (0.75f64).sqrt();
        let mut ax = s.semi_axes().to_vec();
        ax.sort_by(f64::total_cmp);
        assert!((ax[0] - f).abs() < 1e-12 && (ax[1] - 2.0 * f).abs() < 1e-12);
        assert!(e.slice(&[0.0, 0.0, 3.5], &q).unwrap().is_none());
    }
}
