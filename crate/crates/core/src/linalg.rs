//! Small dense helpers shared by the geometric and fitting code.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::mc::McRng;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// Volume of the unit ball in ℝⁿ.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / n as f64 * unit_ball_volume(n - 2),
    }
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Elementary symmetric polynomials e_0..e_len of `xs`.
pub fn elementary_symmetric(xs: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; xs.len() + 1];
    e[0] = 1.0;
    for (i, &x) in xs.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            e[j] += e[j - 1] * x;
        }
    }
    e
}

/// Matrix condition number σ_max / σ_min (infinite when rank deficient).
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Moore–Penrose pseudo-inverse of a full-column-rank matrix, with its
/// condition number. Fails when the condition number exceeds `max_cond`.
pub fn pseudo_inverse(a: &DMatrix<f64>, max_cond: f64) -> Result<(DMatrix<f64>, f64)> {
    let cond = condition_number(a);
    if !cond.is_finite() || cond > max_cond {
        return Err(Error::IllConditioned { condition: cond });
    }
    let svd = a.clone().svd(true, true);
    let pinv = svd
        .pseudo_inverse(0.0)
        .map_err(|e| Error::Singular(e.to_string()))?;
    Ok((pinv, cond))
}

/// Least-squares solution of `a x ≈ b`.
pub fn least_squares(a: &DMatrix<f64>, b: &[f64], max_cond: f64) -> Result<(Vec<f64>, f64)> {
    let (pinv, cond) = pseudo_inverse(a, max_cond)?;
    let x = &pinv * DVector::from_column_slice(b);
    Ok((x.iter().cloned().collect(), cond))
}

/// Numerical rank with singular values above `threshold`.
pub fn rank(a: &DMatrix<f64>, threshold: f64) -> (usize, Vec<f64>) {
    let sv: Vec<f64> = a.clone().svd(false, false).singular_values.iter().cloned().collect();
    let r = sv.iter().filter(|&&s| s > threshold).count();
    (r, sv)
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Solves the small dense system `m x = b` (row-major `m`, size k×k) in
/// place by Gaussian elimination with partial pivoting. Returns `false`
/// when a pivot falls below `eps` relative to the largest diagonal.
pub(crate) fn solve_small(m: &mut [f64], b: &mut [f64], k: usize, eps: f64) -> bool {
    let scale = (0..k).map(|i| m[i * k + i].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for col in 0..k {
        let mut piv = col;
        for r in col + 1..k {
            if m[r * k + col].abs() > m[piv * k + col].abs() {
                piv = r;
            }
        }
        if m[piv * k + col].abs() <= eps * scale {
            return false;
        }
        if piv != col {
            for c in 0..k {
                m.swap(piv * k + c, col * k + c);
            }
            b.swap(piv, col);
        }
        let d = m[col * k + col];
        for r in col + 1..k {
            let f = m[r * k + col] / d;
            if f != 0.0 {
                for c in col..k {
                    m[r * k + c] -= f * m[col * k + c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    for r in (0..k).rev() {
        let mut s = b[r];
        for c in r + 1..k {
            s -= m[r * k + c] * b[c];
        }
        b[r] = s / m[r * k + r];
    }
    true
}

/// Determinant of a small square matrix (row-major).
pub(crate) fn det_small(m: &[f64], k: usize) -> f64 {
    let mut a = m.to_vec();
    let mut det = 1.0;
    for col in 0..k {
        let mut piv = col;
        for r in col + 1..k {
            if a[r * k + col].abs() > a[piv * k + col].abs() {
                piv = r;
            }
        }
        if a[piv * k + col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            for c in 0..k {
                a.swap(piv * k + c, col * k + c);
            }
            det = -det;
        }
        let d = a[col * k + col];
        det *= d;
        for r in col + 1..k {
            let f = a[r * k + col] / d;
            for c in col..k {
                a[r * k + c] -= f * a[col * k + c];
            }
        }
    }
    det
}

pub fn gaussian_vector(rng: &mut McRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Uniform direction on the unit sphere in ℝⁿ.
pub fn random_direction(rng: &mut McRng, n: usize) -> Vec<f64> {
    loop {
        let g = gaussian_vector(rng, n);
        let r = norm(&g);
        if r > 1e-300 {
            return g.iter().map(|x| x / r).collect();
        }
    }
}

/// Orthonormal basis (as columns) of the orthogonal complement of the
/// column span of `v` (columns of `v` must be orthonormal).
pub fn orthogonal_complement(v: &DMatrix<f64>) -> DMatrix<f64> {
    let n = v.nrows();
    let d = v.ncols();
    let mut basis: Vec<DVector<f64>> = (0..d).map(|j| v.column(j).into_owned()).collect();
    let mut out: Vec<DVector<f64>> = Vec::new();
    for i in 0..n {
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        for b in basis.iter() {
            let c = b.dot(&e);
            e -= b * c;
        }
        // second pass for stability
        for b in basis.iter() {
            let c = b.dot(&e);
            e -= b * c;
        }
        let r = e.norm();
        if r > 1e-8 {
            let e = e / r;
            basis.push(e.clone());
            out.push(e);
            if out.len() == n - d {
                break;
            }
        }
    }
    if out.is_empty() {
        return DMatrix::zeros(n, 0);
    }
    DMatrix::from_columns(&out)
}
