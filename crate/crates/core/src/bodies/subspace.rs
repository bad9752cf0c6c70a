use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::linalg::orthogonal_complement;

/// `{ base + Q y : y ∈ ℝᵈ }` with orthonormal columns `Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineSubspace {
    base: Vec<f64>,
    directions: DMatrix<f64>,
    complex_compatible: bool,
}

/// Ambient complex structure: coordinates pair up as `z_j = x_{2j} + i x_{2j+1}`
/// and `J (x_{2j}, x_{2j+1}) = (−x_{2j+1}, x_{2j})`.
pub(crate) fn apply_j(v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for j in 0..v.len() / 2 {
        out[2 * j] = -v[2 * j + 1];
        out[2 * j + 1] = v[2 * j];
    }
    out
}

impl AffineSubspace {
    pub fn new(base: Vec<f64>, directions: DMatrix<f64>) -> Result<Self> {
        check_dim(base.len(), directions.nrows())?;
        let d = directions.ncols();
        let gram = directions.transpose() * &directions;
        let defect = (gram - DMatrix::identity(d, d)).norm();
        if !(defect <= 1e-10) {
            return Err(Error::InvalidArgument(format!(
                "subspace directions are not orthonormal (Gram defect {defect:e})"
            )));
        }
        let complex_compatible = span_is_j_invariant(&directions);
        Ok(AffineSubspace { base, directions, complex_compatible })
    }

    /// Coordinate subspace spanned by the listed axes.
    pub fn coordinate(base: Vec<f64>, axes: &[usize]) -> Result<Self> {
        let n = base.len();
        let mut q = DMatrix::zeros(n, axes.len());
        for (j, &a) in axes.iter().enumerate() {
            if a >= n {
                return Err(Error::InvalidArgument(format!("axis {a} out of range")));
            }
            q[(a, j)] = 1.0;
        }
        AffineSubspace::new(base, q)
    }

    pub fn ambient_dim(&self) -> usize {
        self.base.len()
    }

    pub fn dim(&self) -> usize {
        self.directions.ncols()
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn directions(&self) -> &DMatrix<f64> {
        &self.directions
    }

    pub fn is_complex_compatible(&self) -> bool {
        self.complex_compatible
    }

    /// Orthonormal basis of the orthogonal complement of the direction space.
    pub fn complement(&self) -> DMatrix<f64> {
        orthogonal_complement(&self.directions)
    }

    /// Intrinsic coordinates of the orthogonal projection of `x`.
    pub fn to_coords(&self, x: &[f64]) -> Vec<f64> {
        let d = DVector::from_iterator(x.len(), x.iter().zip(&self.base).map(|(a, b)| a - b));
        (self.directions.transpose() * d).iter().cloned().collect()
    }

    pub fn from_coords(&self, y: &[f64]) -> Vec<f64> {
        let q = &self.directions * DVector::from_column_slice(y);
        q.iter().zip(&self.base).map(|(a, b)| a + b).collect()
    }

    /// Distance from `x` to the subspace.
    pub fn distance(&self, x: &[f64]) -> f64 {
        let p = self.from_coords(&self.to_coords(x));
        crate::linalg::dist(&p, x)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.distance(x) <= tol
    }
}

fn span_is_j_invariant(q: &DMatrix<f64>) -> bool {
    let n = q.nrows();
    if n % 2 != 0 {
        return false;
    }
    for j in 0..q.ncols() {
        let col: Vec<f64> = q.column(j).iter().cloned().collect();
        let jv = DVector::from_vec(apply_j(&col));
        let proj = q * (q.transpose() * &jv);
        if (proj - &jv).norm() > 1e-10 {
            return false;
        }
    }
    true
}
