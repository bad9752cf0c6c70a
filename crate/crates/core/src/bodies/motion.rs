use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::gaussian_vector;
use crate::mc::McRng;

/// `x ↦ R x + t` with `R` orthogonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigidMotion {
    dim: usize,
    /// Row-major `R`.
    rotation: Vec<f64>,
    translation: Vec<f64>,
}

impl RigidMotion {
    pub fn new(rotation: DMatrix<f64>, translation: Vec<f64>) -> Result<Self> {
        let n = rotation.nrows();
        if rotation.ncols() != n {
            return Err(Error::InvalidArgument("rotation must be square".into()));
        }
        check_dim(n, translation.len())?;
        let defect = (rotation.transpose() * &rotation - DMatrix::identity(n, n)).norm();
        if !(defect <= 1e-10) {
            return Err(Error::InvalidArgument(format!("rotation is not orthogonal (defect {defect:e})")));
        }
        if translation.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("translation must be finite".into()));
        }
        let mut rows = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                rows.push(rotation[(i, j)]);
            }
        }
        Ok(RigidMotion { dim: n, rotation: rows, translation })
    }

    pub fn identity(n: usize) -> Self {
        RigidMotion::new(DMatrix::identity(n, n), vec![0.0; n]).unwrap()
    }

    pub fn translation(t: Vec<f64>) -> Self {
        RigidMotion::new(DMatrix::identity(t.len(), t.len()), t).unwrap()
    }

    pub fn rotation_only(r: DMatrix<f64>) -> Result<Self> {
        let n = r.nrows();
        RigidMotion::new(r, vec![0.0; n])
    }

    /// Haar-distributed rotation in SO(n) followed by a translation.
    pub fn random(rng: &mut McRng, n: usize, translation: Vec<f64>) -> Result<Self> {
        RigidMotion::new(haar_rotation(rng, n), translation)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rotation_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.rotation)
    }

    pub fn translation_vector(&self) -> &[f64] {
        &self.translation
    }

    pub fn is_identity_rotation(&self) -> bool {
        let n = self.dim;
        (0..n).all(|i| (0..n).all(|j| self.rotation[i * n + j] == if i == j { 1.0 } else { 0.0 }))
    }

    /// `R v`.
    pub fn rotate(&self, v: &[f64], out: &mut [f64]) {
        let n = self.dim;
        for i in 0..n {
            out[i] = (0..n).map(|j| self.rotation[i * n + j] * v[j]).sum();
        }
    }

    /// `Rᵀ v`.
    pub fn rotate_back(&self, v: &[f64], out: &mut [f64]) {
        let n = self.dim;
        for j in 0..n {
            out[j] = (0..n).map(|i| self.rotation[i * n + j] * v[i]).sum();
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.rotate(x, &mut out);
        for (o, t) in out.iter_mut().zip(&self.translation) {
            *o += t;
        }
        out
    }

    /// `Rᵀ (x − t)`.
    pub fn apply_inverse(&self, x: &[f64]) -> Vec<f64> {
        let d: Vec<f64> = x.iter().zip(&self.translation).map(|(a, b)| a - b).collect();
        let mut out = vec![0.0; self.dim];
        self.rotate_back(&d, &mut out);
        out
    }

    pub fn inverse(&self) -> RigidMotion {
        let rt = self.rotation_matrix().transpose();
        let mut t = vec![0.0; self.dim];
        self.rotate_back(&self.translation, &mut t);
        RigidMotion::new(rt, t.iter().map(|v| -v).collect()).unwrap()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &RigidMotion) -> RigidMotion {
        let r = self.rotation_matrix() * other.rotation_matrix();
        let t = self.apply(&other.translation);
        RigidMotion::new(r, t).unwrap()
    }

    pub fn determinant(&self) -> f64 {
        self.rotation_matrix().determinant()
    }
}

/// Haar-distributed element of SO(n): QR of a Gaussian matrix with the
/// sign of each column fixed by the diagonal of R, then one column flipped
/// if the determinant is negative.
pub fn haar_rotation(rng: &mut McRng, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_column_slice(n, n, &gaussian_vector(rng, n * n));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            let mut col = q.column_mut(j);
            col.neg_mut();
        }
    }
    if n > 0 && q.determinant() < 0.0 {
        let mut col = q.column_mut(0);
        col.neg_mut();
    }
    q
}

/// Haar-distributed element of O(n).
pub fn haar_orthogonal(rng: &mut McRng, n: usize) -> DMatrix<f64> {
    let mut q = haar_rotation(rng, n);
    if rand::Rng::random::<bool>(rng) && n > 0 {
        let mut col = q.column_mut(0);
        col.neg_mut();
    }
    q
}
