use nalgebra::{Complex, DMatrix};
use rand_distr::{Distribution, StandardNormal};

use crate::mc::McRng;

/// The complex structure on ℝ^{2m}: `z_j = x_{2j} + i x_{2j+1}`, so `J`
/// acts blockwise as `(x, y) ↦ (−y, x)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ComplexStructure {
    pub m: usize,
}

impl ComplexStructure {
    pub fn new(m: usize) -> Self {
        ComplexStructure { m }
    }

    pub fn real_dim(&self) -> usize {
        2 * self.m
    }

    pub fn j(&self) -> DMatrix<f64> {
        let n = 2 * self.m;
        let mut j = DMatrix::zeros(n, n);
        for k in 0..self.m {
            j[(2 * k + 1, 2 * k)] = 1.0;
            j[(2 * k, 2 * k + 1)] = -1.0;
        }
        j
    }

    /// `‖R J − J R‖_F`.
    pub fn commutator_norm(&self, r: &DMatrix<f64>) -> f64 {
        let j = self.j();
        (r * &j - &j * r).norm()
    }
}

/// Real `2m × 2m` form of a complex `m × m` matrix.
pub fn realify(u: &DMatrix<Complex<f64>>) -> DMatrix<f64> {
    let m = u.nrows();
    let mut r = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        for k in 0..u.ncols() {
            let z = u[(i, k)];
            r[(2 * i, 2 * k)] = z.re;
            r[(2 * i, 2 * k + 1)] = -z.im;
            r[(2 * i + 1, 2 * k)] = z.im;
            r[(2 * i + 1, 2 * k + 1)] = z.re;
        }
    }
    r
}

/// Haar-distributed element of U(m) (QR of a complex Ginibre matrix with
/// the phases of `diag(R)` moved into `Q`).
pub fn sample_unitary_complex(m: usize, rng: &mut McRng) -> DMatrix<Complex<f64>> {
    let g = DMatrix::from_fn(m, m, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex::new(re, im)
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..m {
        let d = r[(k, k)];
        let a = d.norm();
        let phase = if a > 0.0 { d / a } else { Complex::new(1.0, 0.0) };
        for i in 0..m {
            q[(i, k)] *= phase;
        }
    }
    q
}

/// Haar-distributed unitary as a real orthogonal matrix commuting with `J`.
pub fn sample_unitary(m: usize, rng: &mut McRng) -> DMatrix<f64> {
    realify(&sample_unitary_complex(m, rng))
}

/// Uniformly distributed complex `d`-plane through the origin in ℂ^m,
/// returned as `(orthonormal real basis of the plane, basis of its
/// orthogonal complement)`. The plane is the image of the first `d`
/// complex coordinates under a Haar unitary, so both bases are
/// `J`-invariant.
pub fn sample_complex_plane(m: usize, d: usize, rng: &mut McRng) -> (DMatrix<f64>, DMatrix<f64>) {
    let u = sample_unitary(m, rng);
    let plane = u.columns(0, 2 * d).into_owned();
    let comp = u.columns(2 * d, 2 * (m - d)).into_owned();
    (plane, comp)
}

/// Real basis of the complex span of the given real vectors (columns),
/// orthonormalized; used to close a real frame under `J`.
pub fn complex_closure(v: &DMatrix<f64>) -> DMatrix<f64> {
    let n = v.nrows();
    let cs = ComplexStructure::new(n / 2);
    let mut cols: Vec<nalgebra::DVector<f64>> = Vec::new();
    let j = cs.j();
    for k in 0..v.ncols() {
        for w in [v.column(k).into_owned(), &j * v.column(k)] {
            let mut w = w;
            for b in &cols {
                let c = b.dot(&w);
                w -= b * c;
            }
            for b in &cols {
                let c = b.dot(&w);
                w -= b * c;
            }
            let r = w.norm();
            if r > 1e-10 {
                cols.push(w / r);
            }
        }
    }
    if cols.is_empty() {
        return DMatrix::zeros(n, 0);
    }
    DMatrix::from_columns(&cols)
}
