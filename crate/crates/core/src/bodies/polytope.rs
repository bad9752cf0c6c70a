//! Convex polytopes held in both vertex and half-space form.
//!
//! Hulls are found by brute force: in the plane by a monotone chain, in
//! higher dimensions by testing every hyperplane through `n` input points.
//! The point sets used here are small (boxes, simplices, unions of two
//! boxes), so the combinatorial cost is irrelevant next to Monte Carlo.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{det_small, dot, norm, orthogonal_complement, solve_small};

use super::gjk::{gjk, GjkOptions, PointCloud, SupportMap};

/// Outer unit normal and offset of a supporting half-space `⟨a, x⟩ ≤ b`.
#[derive(Clone, Debug, PartialEq)]
pub struct Facet {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Clone, Debug)]
enum Hull {
    Full { facets: Vec<Facet> },
    /// Lower-dimensional polytope living in `origin + span(basis)`.
    Flat {
        origin: Vec<f64>,
        basis: DMatrix<f64>,
        normals: DMatrix<f64>,
        inner: Option<Box<Polytope>>,
    },
}

#[derive(Clone, Debug)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    hull: Hull,
    scale: f64,
    volume: OnceLock<f64>,
}

fn coordinate_scale(points: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .flat_map(|p| p.iter())
        .fold(0.0f64, |m, x| m.max(x.abs()))
        .max(1.0)
}

impl Polytope {
    /// Convex hull of a finite point set.
    pub fn from_points(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidBody("polytope needs at least one vertex".into()));
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidBody("non-finite vertex coordinate".into()));
            }
        }
        let scale = coordinate_scale(&points);
        let tol = 1e-10 * scale;
        let points = dedupe(points, tol);
        let origin = points[0].clone();
        let basis = affine_basis(&points, &origin, tol);
        let d = basis.ncols();
        if d == dim {
            let (vertices, facets) = full_hull(dim, &points, tol)?;
            return Ok(Polytope { dim, vertices, hull: Hull::Full { facets }, scale, volume: OnceLock::new() });
        }
        let normals = orthogonal_complement(&basis);
        let (vertices, inner) = if d == 0 {
            (vec![origin.clone()], None)
        } else {
            let local: Vec<Vec<f64>> = points.iter().map(|p| to_frame(p, &origin, &basis)).collect();
            let inner = Polytope::from_points(d, local)?;
            let verts = inner.vertices.iter().map(|y| from_frame(y, &origin, &basis)).collect();
            (verts, Some(Box::new(inner)))
        };
        Ok(Polytope {
            dim,
            vertices,
            hull: Hull::Flat { origin, basis, normals, inner },
            scale,
            volume: OnceLock::new(),
        })
    }

    /// Axis-aligned box `[lo, hi]` with its facets written down directly.
    pub fn cuboid(lo: &[f64], hi: &[f64]) -> Result<Self> {
        let n = lo.len();
        if hi.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: hi.len() });
        }
        if lo.iter().zip(hi).any(|(l, h)| !(l.is_finite() && h.is_finite() && h >= l)) {
            return Err(Error::InvalidBody("box bounds must satisfy lo ≤ hi".into()));
        }
        if n > 20 {
            return Err(Error::InvalidBody("box dimension too large".into()));
        }
        let vertices: Vec<Vec<f64>> = (0..1usize << n)
            .map(|mask| (0..n).map(|i| if mask & (1 << i) != 0 { hi[i] } else { lo[i] }).collect())
            .collect();
        if lo.iter().zip(hi).any(|(l, h)| h == l) {
            return Polytope::from_points(n, vertices);
        }
        let mut facets = Vec::with_capacity(2 * n);
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            facets.push(Facet { normal: e.clone(), offset: hi[i] });
            e[i] = -1.0;
            facets.push(Facet { normal: e, offset: -lo[i] });
        }
        let scale = coordinate_scale(&vertices);
        Ok(Polytope { dim: n, vertices, hull: Hull::Full { facets }, scale, volume: OnceLock::new() })
    }

    /// Bounded intersection of half-spaces `⟨a_i, x⟩ ≤ b_i`; `None` when empty.
    pub fn from_halfspaces(dim: usize, halfspaces: &[Facet]) -> Result<Option<Self>> {
        if dim == 0 {
            return Err(Error::InvalidArgument("zero-dimensional polytope".into()));
        }
        let scale = halfspaces.iter().fold(1.0f64, |m, h| m.max(h.offset.abs()));
        let tol = 1e-10 * scale;
        let m = halfspaces.len();
        if m < dim + 1 {
            return Err(Error::InvalidBody("half-space system is unbounded".into()));
        }
        let mut found: Vec<Vec<f64>> = Vec::new();
        let mut idx: Vec<usize> = (0..dim).collect();
        let mut mat = vec![0.0; dim * dim];
        let mut rhs = vec![0.0; dim];
        loop {
            for (r, &i) in idx.iter().enumerate() {
                mat[r * dim..(r + 1) * dim].copy_from_slice(&halfspaces[i].normal);
                rhs[r] = halfspaces[i].offset;
            }
            let mut a = mat.clone();
            let mut x = rhs.clone();
            if solve_small(&mut a, &mut x, dim, 1e-12) {
                let feasible = halfspaces.iter().all(|h| dot(&h.normal, &x) <= h.offset + tol);
                if feasible && !found.iter().any(|p| crate::linalg::dist(p, &x) <= 1e-9 * scale) {
                    found.push(x);
                }
            }
            if !next_combination(&mut idx, m) {
                break;
            }
        }
        if found.is_empty() {
            return Ok(None);
        }
        Polytope::from_points(dim, found).map(Some)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    /// Dimension of the affine hull.
    pub fn affine_dim(&self) -> usize {
        match &self.hull {
            Hull::Full { .. } => self.dim,
            Hull::Flat { basis, .. } => basis.ncols(),
        }
    }

    pub fn is_full_dimensional(&self) -> bool {
        matches!(self.hull, Hull::Full { .. })
    }

    pub fn facets(&self) -> Option<&[Facet]> {
        match &self.hull {
            Hull::Full { facets } => Some(facets),
            Hull::Flat { .. } => None,
        }
    }

    /// Lower-dimensional polytopes expressed in an orthonormal frame of their
    /// affine hull: `(origin, basis, polytope in frame coordinates)`.
    pub fn flat_frame(&self) -> Option<(&[f64], &DMatrix<f64>, Option<&Polytope>)> {
        match &self.hull {
            Hull::Full { .. } => None,
            Hull::Flat { origin, basis, inner, .. } => Some((origin, basis, inner.as_deref())),
        }
    }

    /// Half-space description valid for flat polytopes too (equalities
    /// appear as opposite pairs).
    pub fn halfspaces(&self) -> Vec<Facet> {
        match &self.hull {
            Hull::Full { facets } => facets.clone(),
            Hull::Flat { origin, basis, normals, inner } => {
                let mut out = Vec::new();
                for j in 0..normals.ncols() {
                    let a: Vec<f64> = normals.column(j).iter().cloned().collect();
                    let b = dot(&a, origin);
                    out.push(Facet { normal: a.iter().map(|v| -v).collect(), offset: -b });
                    out.push(Facet { normal: a, offset: b });
                }
                if let Some(inner) = inner {
                    for f in inner.halfspaces() {
                        let a = basis * DVector::from_column_slice(&f.normal);
                        let a: Vec<f64> = a.iter().cloned().collect();
                        let b = f.offset + dot(&a, origin);
                        out.push(Facet { normal: a, offset: b });
                    }
                }
                out
            }
        }
    }

    pub fn support(&self, u: &[f64]) -> f64 {
        self.vertices.iter().map(|v| dot(v, u)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn support_point(&self, u: &[f64], out: &mut [f64]) {
        PointCloud { dim: self.dim, points: &self.vertices }.support_point(u, out);
    }

    /// Largest violation `max_i ⟨a_i, x⟩ − b_i`; a lower bound on the
    /// distance when positive, and `≤ 0` exactly for interior points.
    /// Only meaningful for full-dimensional polytopes.
    pub fn max_violation(&self, x: &[f64]) -> Option<f64> {
        match &self.hull {
            Hull::Full { facets } => {
                Some(facets.iter().map(|f| dot(&f.normal, x) - f.offset).fold(f64::NEG_INFINITY, f64::max))
            }
            Hull::Flat { .. } => None,
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        match &self.hull {
            Hull::Full { facets } => facets.iter().all(|f| dot(&f.normal, x) - f.offset <= tol),
            Hull::Flat { origin, basis, normals, inner } => {
                let d: Vec<f64> = x.iter().zip(origin).map(|(a, b)| a - b).collect();
                let dv = DVector::from_column_slice(&d);
                let off = (normals.transpose() * &dv).norm();
                if off > tol {
                    return false;
                }
                match inner {
                    None => true,
                    Some(inner) => {
                        let y: Vec<f64> = (basis.transpose() * dv).iter().cloned().collect();
                        inner.distance(&y) <= (tol * tol - off * off).max(0.0).sqrt()
                    }
                }
            }
        }
    }

    /// Nearest point and distance.
    pub fn nearest(&self, x: &[f64]) -> (f64, Vec<f64>) {
        if let Some(v) = self.max_violation(x) {
            if v <= 0.0 {
                return (0.0, x.to_vec());
            }
        }
        let cloud = PointCloud { dim: self.dim, points: &self.vertices };
        match gjk(&cloud, x, None, &GjkOptions::precise()) {
            Ok(out) => (out.upper, out.closest),
            // Finite point sets always terminate; keep the best point if the
            // cap is somehow hit.
            Err(_) => {
                let best = self
                    .vertices
                    .iter()
                    .min_by(|a, b| crate::linalg::dist(a, x).total_cmp(&crate::linalg::dist(b, x)))
                    .unwrap();
                (crate::linalg::dist(best, x), best.clone())
            }
        }
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        self.nearest(x).0
    }

    /// Exact `n`-volume (zero for flat polytopes).
    pub fn volume(&self) -> f64 {
        *self.volume.get_or_init(|| match &self.hull {
            Hull::Flat { .. } => 0.0,
            Hull::Full { facets } => {
                if self.dim == 1 {
                    return self.support(&[1.0]) + self.support(&[-1.0]);
                }
                let c = self.centroid();
                facets
                    .iter()
                    .map(|f| (f.offset - dot(&f.normal, &c)) * self.facet_polytope(f).volume())
                    .sum::<f64>()
                    / self.dim as f64
            }
        })
    }

    /// Vertex average (an interior point of full-dimensional polytopes).
    pub fn centroid(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        for v in &self.vertices {
            for (ci, vi) in c.iter_mut().zip(v) {
                *ci += vi;
            }
        }
        c.iter().map(|x| x / self.vertices.len() as f64).collect()
    }

    fn facet_tol(&self) -> f64 {
        1e-9 * self.scale
    }

    /// Vertices lying on a facet.
    pub fn facet_vertices(&self, f: &Facet) -> Vec<Vec<f64>> {
        let tol = self.facet_tol();
        self.vertices.iter().filter(|v| (dot(&f.normal, v) - f.offset).abs() <= tol).cloned().collect()
    }

    /// The facet as a full-dimensional polytope in an orthonormal frame of
    /// its hyperplane.
    pub fn facet_polytope(&self, f: &Facet) -> Polytope {
        let verts = self.facet_vertices(f);
        let nrm = DMatrix::from_column_slice(self.dim, 1, &f.normal);
        let frame = orthogonal_complement(&nrm);
        let origin = verts[0].clone();
        let local: Vec<Vec<f64>> = verts.iter().map(|v| to_frame(v, &origin, &frame)).collect();
        Polytope::from_points(self.dim - 1, local).expect("facet of a valid polytope")
    }

    /// `(n−1)`-volume of the boundary.
    pub fn surface_area(&self) -> f64 {
        match &self.hull {
            Hull::Full { facets } => {
                if self.dim == 1 {
                    2.0
                } else {
                    facets.iter().map(|f| self.facet_polytope(f).volume()).sum()
                }
            }
            Hull::Flat { .. } => 0.0,
        }
    }

    /// Side lengths when the polytope is a full-dimensional axis-aligned box.
    pub fn box_sides(&self) -> Option<Vec<f64>> {
        let facets = self.facets()?;
        if facets.len() != 2 * self.dim {
            return None;
        }
        for f in facets {
            let nonzero = f.normal.iter().filter(|v| v.abs() > 1e-12).count();
            if nonzero != 1 {
                return None;
            }
        }
        Some((0..self.dim).map(|i| {
            let mut e = vec![0.0; self.dim];
            e[i] = 1.0;
            let hi = self.support(&e);
            e[i] = -1.0;
            hi + self.support(&e)
        }).collect())
    }

    pub fn map_vertices(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Polytope> {
        Polytope::from_points(self.dim, self.vertices.iter().map(|v| f(v)).collect())
    }
}

pub(crate) fn to_frame(p: &[f64], origin: &[f64], basis: &DMatrix<f64>) -> Vec<f64> {
    let d: Vec<f64> = p.iter().zip(origin).map(|(a, b)| a - b).collect();
    (basis.transpose() * DVector::from_column_slice(&d)).iter().cloned().collect()
}

pub(crate) fn from_frame(y: &[f64], origin: &[f64], basis: &DMatrix<f64>) -> Vec<f64> {
    (basis * DVector::from_column_slice(y)).iter().zip(origin).map(|(a, b)| a + b).collect()
}

fn dedupe(points: Vec<Vec<f64>>, tol: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    for p in points {
        if !out.iter().any(|q| crate::linalg::dist(q, &p) <= tol) {
            out.push(p);
        }
    }
    out
}

/// Orthonormal basis of the affine hull directions (Gram–Schmidt with
/// re-orthogonalization, pivoting on the farthest remaining point).
fn affine_basis(points: &[Vec<f64>], origin: &[f64], tol: f64) -> DMatrix<f64> {
    let n = origin.len();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut resid: Vec<DVector<f64>> =
        points.iter().map(|p| DVector::from_iterator(n, p.iter().zip(origin).map(|(a, b)| a - b))).collect();
    while basis.len() < n {
        let (best, r) = resid
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.norm()))
            .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if r <= tol {
            break;
        }
        let mut e = resid[best].clone() / r;
        for b in &basis {
            let c = b.dot(&e);
            e -= b * c;
        }
        let e = e.normalize();
        for v in resid.iter_mut() {
            let c = e.dot(v);
            *v -= &e * c;
        }
        basis.push(e);
    }
    if basis.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&basis)
    }
}

fn next_combination(idx: &mut [usize], m: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < m - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Normal to the hyperplane spanned by `n−1` vectors in ℝⁿ (cofactor
/// expansion).
fn generalized_cross(rows: &[Vec<f64>], n: usize) -> Vec<f64> {
    let k = n - 1;
    let mut minor = vec![0.0; k * k];
    (0..n)
        .map(|col| {
            for (r, row) in rows.iter().enumerate() {
                let mut c2 = 0;
                for c in 0..n {
                    if c != col {
                        minor[r * k + c2] = row[c];
                        c2 += 1;
                    }
                }
            }
            let d = det_small(&minor, k);
            if col % 2 == 0 {
                d
            } else {
                -d
            }
        })
        .collect()
}

fn full_hull(dim: usize, points: &[Vec<f64>], tol: f64) -> Result<(Vec<Vec<f64>>, Vec<Facet>)> {
    match dim {
        1 => {
            let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            let hi = points.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
            Ok((
                vec![vec![lo], vec![hi]],
                vec![Facet { normal: vec![1.0], offset: hi }, Facet { normal: vec![-1.0], offset: -lo }],
            ))
        }
        2 => Ok(planar_hull(points, tol)),
        _ => Ok(brute_force_hull(dim, points, tol)),
    }
}

fn planar_hull(points: &[Vec<f64>], tol: f64) -> (Vec<Vec<f64>>, Vec<Facet>) {
    let mut pts: Vec<[f64; 2]> = points.iter().map(|p| [p[0], p[1]]).collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    // tol = 1e-10·scale, so this is 1e-12·scale².
    let ctol = 1e8 * tol * tol;
    let mut hull: Vec<[f64; 2]> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= ctol {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    let verts: Vec<Vec<f64>> = hull.iter().map(|p| vec![p[0], p[1]]).collect();
    let k = hull.len();
    let facets = (0..k)
        .map(|i| {
            let a = hull[i];
            let b = hull[(i + 1) % k];
            let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
            let l = (ex * ex + ey * ey).sqrt();
            let normal = vec![ey / l, -ex / l];
            let offset = normal[0] * a[0] + normal[1] * a[1];
            Facet { normal, offset }
        })
        .collect();
    (verts, facets)
}

fn brute_force_hull(dim: usize, points: &[Vec<f64>], tol: f64) -> (Vec<Vec<f64>>, Vec<Facet>) {
    let m = points.len();
    let mut facets: Vec<Facet> = Vec::new();
    let mut idx: Vec<usize> = (0..dim).collect();
    let mut rows = vec![vec![0.0; dim]; dim - 1];
    loop {
        let p0 = &points[idx[0]];
        for r in 0..dim - 1 {
            for c in 0..dim {
                rows[r][c] = points[idx[r + 1]][c] - p0[c];
            }
        }
        let nrm = generalized_cross(&rows, dim);
        let len = norm(&nrm);
        let edge_scale = rows.iter().map(|r| norm(r)).fold(0.0, f64::max).max(1e-300);
        if len > 1e-9 * edge_scale.powi(dim as i32 - 1) {
            let a: Vec<f64> = nrm.iter().map(|v| v / len).collect();
            let b = dot(&a, p0);
            let mut above = false;
            let mut below = false;
            for p in points {
                let s = dot(&a, p) - b;
                above |= s > tol;
                below |= s < -tol;
                if above && below {
                    break;
                }
            }
            let cand = if !above {
                Some(Facet { normal: a, offset: b })
            } else if !below {
                Some(Facet { normal: a.iter().map(|v| -v).collect(), offset: -b })
            } else {
                None
            };
            if let Some(f) = cand {
                let dup = facets.iter().any(|g| {
                    crate::linalg::dist(&g.normal, &f.normal) <= 1e-9 && (g.offset - f.offset).abs() <= 10.0 * tol
                });
                if !dup {
                    facets.push(f);
                }
            }
        }
        if !next_combination(&mut idx, m) {
            break;
        }
    }
    // A vertex is a point whose incident facet normals span ℝⁿ.
    let vertices = points
        .iter()
        .filter(|p| {
            let normals: Vec<&Facet> = facets.iter().filter(|f| (dot(&f.normal, p) - f.offset).abs() <= 10.0 * tol).collect();
            if normals.len() < dim {
                return false;
            }
            let mat = DMatrix::from_fn(normals.len(), dim, |i, j| normals[i].normal[j]);
            crate::linalg::rank(&mat, 1e-9).0 == dim
        })
        .cloned()
        .collect();
    (vertices, facets)
}
