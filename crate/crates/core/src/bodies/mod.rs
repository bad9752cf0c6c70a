//! Convex bodies as immutable expression trees.
//!
//! A [`ConvexBody`] is cheap to clone (an `Arc` around its [`Shape`]) and
//! answers support, membership and distance queries. Minkowski sums are
//! flattened on construction: every ball and point summand collapses into a
//! single offset and radius, so `K + r D + t` costs one distance query to
//! `K`. Sums of several non-ball bodies fall back to GJK on the combined
//! support map.

mod ellipsoid;
pub mod exact;
mod gjk;
mod json;
mod motion;
mod polytope;
mod slice;
mod subspace;
mod volume;

use std::sync::Arc;

use rand::SeedableRng;
use smallvec::SmallVec;

pub use ellipsoid::Ellipsoid;
pub use gjk::{gjk, GjkOptions, GjkOutcome, PointCloud, SumMap, SupportMap, Verdict};
pub use json::BodySpec;
pub use motion::{haar_orthogonal, haar_rotation, RigidMotion};
pub use polytope::{Facet, Polytope};
pub use slice::{slice, Slice};
pub use subspace::AffineSubspace;
pub use volume::{parallel_volumes_radial, RadialRule, VolumeMethod};
pub(crate) use volume::parallel_volume_replicates;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, norm, unit_ball_volume};
use crate::mc::{McConfig, McEstimate};

type Buf = SmallVec<[f64; 8]>;

fn buf(n: usize) -> Buf {
    SmallVec::from_elem(0.0, n)
}

/// Flattened Minkowski sum `offset + radius·D + Σ rest`.
#[derive(Clone, Debug)]
pub struct MinkSum {
    parts: Vec<ConvexBody>,
    offset: Vec<f64>,
    radius: f64,
    rest: Vec<ConvexBody>,
}

impl MinkSum {
    pub fn parts(&self) -> &[ConvexBody] {
        &self.parts
    }

    /// Total translation contributed by ball centers and point summands.
    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    /// Total radius of the ball summands.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Summands that are neither balls nor points.
    pub fn rest(&self) -> &[ConvexBody] {
        &self.rest
    }
}

#[derive(Clone, Debug)]
pub enum Shape {
    Polytope(Polytope),
    Ball { center: Vec<f64>, radius: f64 },
    Ellipsoid(Ellipsoid),
    MinkSum(MinkSum),
    Scaled { factor: f64, body: ConvexBody },
    Transformed { motion: RigidMotion, body: ConvexBody },
    /// Cartesian product; factor dimensions add up.
    Product(Vec<ConvexBody>),
}

#[derive(Clone, Debug)]
pub struct ConvexBody {
    dim: usize,
    shape: Arc<Shape>,
}

impl ConvexBody {
    fn wrap(dim: usize, shape: Shape) -> Self {
        ConvexBody { dim, shape: Arc::new(shape) }
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidBody(format!("ball radius must be positive, got {radius}")));
        }
        if center.is_empty() || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidBody("ball center must be a finite nonempty vector".into()));
        }
        Ok(ConvexBody::wrap(center.len(), Shape::Ball { center, radius }))
    }

    /// Unit ball centered at the origin.
    pub fn unit_ball(n: usize) -> Self {
        ConvexBody::ball(vec![0.0; n], 1.0).unwrap()
    }

    pub fn polytope(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let dim = vertices.first().map(|v| v.len()).unwrap_or(0);
        if dim == 0 {
            return Err(Error::InvalidBody("polytope needs nonempty vertices".into()));
        }
        Ok(ConvexBody::from_polytope(Polytope::from_points(dim, vertices)?))
    }

    pub fn from_polytope(p: Polytope) -> Self {
        ConvexBody::wrap(p.dim(), Shape::Polytope(p))
    }

    pub fn cuboid(lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.is_empty() {
            return Err(Error::InvalidBody("box needs at least one coordinate".into()));
        }
        Ok(ConvexBody::from_polytope(Polytope::cuboid(lo, hi)?))
    }

    /// `[0, 1]ⁿ`.
    pub fn unit_cube(n: usize) -> Self {
        ConvexBody::cuboid(&vec![0.0; n], &vec![1.0; n]).unwrap()
    }

    pub fn point(x: Vec<f64>) -> Result<Self> {
        ConvexBody::polytope(vec![x])
    }

    pub fn ellipsoid(e: Ellipsoid) -> Self {
        ConvexBody::wrap(e.dim(), Shape::Ellipsoid(e))
    }

    pub fn minkowski_sum(parts: Vec<ConvexBody>) -> Result<Self> {
        let dim = parts.first().map(|p| p.dim).ok_or_else(|| Error::InvalidBody("empty Minkowski sum".into()))?;
        for p in &parts {
            check_dim(dim, p.dim)?;
        }
        let mut offset = vec![0.0; dim];
        let mut radius = 0.0;
        let mut rest = Vec::new();
        let mut flat = Vec::new();
        fn collect(b: &ConvexBody, out: &mut Vec<ConvexBody>) {
            match b.shape() {
                Shape::MinkSum(m) => m.parts.iter().for_each(|p| collect(p, out)),
                _ => out.push(b.clone()),
            }
        }
        parts.iter().for_each(|p| collect(p, &mut flat));
        for p in &flat {
            match p.shape() {
                Shape::Ball { center, radius: r } => {
                    offset.iter_mut().zip(center).for_each(|(o, c)| *o += c);
                    radius += r;
                }
                Shape::Polytope(poly) if poly.vertices().len() == 1 => {
                    offset.iter_mut().zip(&poly.vertices()[0]).for_each(|(o, c)| *o += c);
                }
                _ => rest.push(p.clone()),
            }
        }
        Ok(ConvexBody::wrap(dim, Shape::MinkSum(MinkSum { parts: flat, offset, radius, rest })))
    }

    /// `K + ε D` with `D` the unit ball.
    pub fn parallel_body(&self, eps: f64) -> Result<Self> {
        if eps == 0.0 {
            return Ok(self.clone());
        }
        ConvexBody::minkowski_sum(vec![self.clone(), ConvexBody::ball(vec![0.0; self.dim], eps)?])
    }

    pub fn product(factors: Vec<ConvexBody>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidBody("empty product".into()));
        }
        let dim = factors.iter().map(|f| f.dim).sum();
        Ok(ConvexBody::wrap(dim, Shape::Product(factors)))
    }

    /// `λ K` for `λ > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale factor must be positive, got {factor}")));
        }
        Ok(match self.shape() {
            Shape::Ball { center, radius } => ConvexBody::wrap(
                self.dim,
                Shape::Ball { center: center.iter().map(|c| c * factor).collect(), radius: radius * factor },
            ),
            Shape::Scaled { factor: f, body } => ConvexBody::wrap(self.dim, Shape::Scaled { factor: f * factor, body: body.clone() }),
            _ => ConvexBody::wrap(self.dim, Shape::Scaled { factor, body: self.clone() }),
        })
    }

    pub fn transformed(&self, motion: &RigidMotion) -> Result<Self> {
        check_dim(self.dim, motion.dim())?;
        Ok(match self.shape() {
            Shape::Ball { center, radius } => {
                ConvexBody::wrap(self.dim, Shape::Ball { center: motion.apply(center), radius: *radius })
            }
            Shape::Transformed { motion: inner, body } => {
                ConvexBody::wrap(self.dim, Shape::Transformed { motion: motion.compose(inner), body: body.clone() })
            }
            _ => ConvexBody::wrap(self.dim, Shape::Transformed { motion: motion.clone(), body: self.clone() }),
        })
    }

    pub fn translated(&self, v: &[f64]) -> Result<Self> {
        check_dim(self.dim, v.len())?;
        self.transformed(&RigidMotion::translation(v.to_vec()))
    }

    /// `−K`.
    pub fn reflected(&self) -> Self {
        let n = self.dim;
        let m = RigidMotion::rotation_only(-nalgebra::DMatrix::<f64>::identity(n, n)).unwrap();
        self.transformed(&m).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// Human-readable variant name.
    pub fn kind(&self) -> &'static str {
        match self.shape() {
            Shape::Polytope(_) => "polytope",
            Shape::Ball { .. } => "ball",
            Shape::Ellipsoid(_) => "ellipsoid",
            Shape::MinkSum(_) => "minkowski_sum",
            Shape::Scaled { .. } => "scaled",
            Shape::Transformed { .. } => "transformed",
            Shape::Product(_) => "product",
        }
    }

    /// Support function `h_K(u) = max_{x ∈ K} ⟨x, u⟩` (any `u`, not only
    /// unit vectors).
    pub fn support(&self, u: &[f64]) -> Result<f64> {
        check_dim(self.dim, u.len())?;
        Ok(self.support_unchecked(u))
    }

    fn support_unchecked(&self, u: &[f64]) -> f64 {
        match self.shape() {
            Shape::Polytope(p) => p.support(u),
            Shape::Ball { center, radius } => dot(center, u) + radius * norm(u),
            Shape::Ellipsoid(e) => e.support(u),
            Shape::MinkSum(m) => {
                dot(&m.offset, u) + m.radius * norm(u) + m.rest.iter().map(|b| b.support_unchecked(u)).sum::<f64>()
            }
            Shape::Scaled { factor, body } => factor * body.support_unchecked(u),
            Shape::Transformed { motion, body } => {
                let mut w = buf(self.dim);
                motion.rotate_back(u, &mut w);
                body.support_unchecked(&w) + dot(motion.translation_vector(), u)
            }
            Shape::Product(fs) => {
                let mut start = 0;
                fs.iter()
                    .map(|f| {
                        let h = f.support_unchecked(&u[start..start + f.dim]);
                        start += f.dim;
                        h
                    })
                    .sum()
            }
        }
    }

    fn support_point_impl(&self, u: &[f64], out: &mut [f64]) {
        match self.shape() {
            Shape::Polytope(p) => p.support_point(u, out),
            Shape::Ball { center, radius } => ball_support_point(center, *radius, u, out),
            Shape::Ellipsoid(e) => e.support_point(u, out),
            Shape::MinkSum(m) => {
                ball_support_point(&m.offset, m.radius, u, out);
                let mut tmp = buf(self.dim);
                for b in &m.rest {
                    b.support_point_impl(u, &mut tmp);
                    out.iter_mut().zip(tmp.iter()).for_each(|(o, t)| *o += t);
                }
            }
            Shape::Scaled { factor, body } => {
                body.support_point_impl(u, out);
                out.iter_mut().for_each(|o| *o *= factor);
            }
            Shape::Transformed { motion, body } => {
                let mut w = buf(self.dim);
                motion.rotate_back(u, &mut w);
                let mut p = buf(self.dim);
                body.support_point_impl(&w, &mut p);
                motion.rotate(&p, out);
                out.iter_mut().zip(motion.translation_vector()).for_each(|(o, t)| *o += t);
            }
            Shape::Product(fs) => {
                let mut start = 0;
                for f in fs {
                    f.support_point_impl(&u[start..start + f.dim], &mut out[start..start + f.dim]);
                    start += f.dim;
                }
            }
        }
    }

    /// A maximizer of `⟨x, u⟩` over the body.
    pub fn support_point(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, u.len())?;
        let mut out = vec![0.0; self.dim];
        self.support_point_impl(u, &mut out);
        Ok(out)
    }

    /// Nearest point of the body to `x` and its distance.
    pub fn nearest(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        check_dim(self.dim, x.len())?;
        self.nearest_impl(x)
    }

    fn nearest_impl(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        Ok(match self.shape() {
            Shape::Polytope(p) => p.nearest(x),
            Shape::Ball { center, radius } => ball_nearest(center, *radius, x),
            Shape::Ellipsoid(e) => e.nearest(x),
            Shape::MinkSum(m) => {
                let y: Vec<f64> = x.iter().zip(&m.offset).map(|(a, b)| a - b).collect();
                let (d, p) = match m.rest.len() {
                    0 => (norm(&y), vec![0.0; self.dim]),
                    1 => m.rest[0].nearest_impl(&y)?,
                    _ => {
                        let parts: Vec<&dyn SupportMap> = m.rest.iter().map(|b| b as &dyn SupportMap).collect();
                        let out = gjk(&SumMap { parts: &parts }, &y, None, &GjkOptions::precise())?;
                        (out.upper, out.closest)
                    }
                };
                if d <= m.radius {
                    (0.0, x.to_vec())
                } else {
                    let s = m.radius / d;
                    let q: Vec<f64> =
                        (0..self.dim).map(|i| p[i] + s * (y[i] - p[i]) + m.offset[i]).collect();
                    (d - m.radius, q)
                }
            }
            Shape::Scaled { factor, body } => {
                let y: Vec<f64> = x.iter().map(|v| v / factor).collect();
                let (d, p) = body.nearest_impl(&y)?;
                (d * factor, p.iter().map(|v| v * factor).collect())
            }
            Shape::Transformed { motion, body } => {
                let (d, p) = body.nearest_impl(&motion.apply_inverse(x))?;
                (d, motion.apply(&p))
            }
            Shape::Product(fs) => {
                let mut start = 0;
                let mut d2 = 0.0;
                let mut q = Vec::with_capacity(self.dim);
                for f in fs {
                    let (d, p) = f.nearest_impl(&x[start..start + f.dim])?;
                    d2 += d * d;
                    q.extend(p);
                    start += f.dim;
                }
                (d2.sqrt(), q)
            }
        })
    }

    /// Euclidean distance from `x` to the body.
    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        self.distance_impl(x)
    }

    fn distance_impl(&self, x: &[f64]) -> Result<f64> {
        match self.shape() {
            Shape::Ball { center, radius } => Ok((crate::linalg::dist(center, x) - radius).max(0.0)),
            Shape::Ellipsoid(e) => Ok(e.distance(x)),
            Shape::Polytope(p) => Ok(p.distance(x)),
            Shape::Scaled { factor, body } => {
                let y: Vec<f64> = x.iter().map(|v| v / factor).collect();
                Ok(factor * body.distance_impl(&y)?)
            }
            Shape::Transformed { motion, body } => body.distance_impl(&motion.apply_inverse(x)),
            Shape::MinkSum(m) if m.rest.len() <= 1 => {
                let y: Vec<f64> = x.iter().zip(&m.offset).map(|(a, b)| a - b).collect();
                let d = if m.rest.is_empty() { norm(&y) } else { m.rest[0].distance_impl(&y)? };
                Ok((d - m.radius).max(0.0))
            }
            _ => Ok(self.nearest_impl(x)?.0),
        }
    }

    /// Decides `dist(x, K) ≤ t`, allowing `tol` of slack. Uses closed forms
    /// and early-exit brackets wherever possible.
    pub fn dist_le(&self, x: &[f64], t: f64, tol: f64) -> Result<bool> {
        check_dim(self.dim, x.len())?;
        self.dist_le_impl(x, t, tol)
    }

    fn dist_le_impl(&self, x: &[f64], t: f64, tol: f64) -> Result<bool> {
        match self.shape() {
            Shape::Ball { center, radius } => {
                let r = radius + t + tol;
                let d2: f64 = center.iter().zip(x).map(|(c, v)| (c - v) * (c - v)).sum();
                Ok(d2 <= r * r)
            }
            Shape::Ellipsoid(e) => {
                if e.gauge_sq(x) <= 1.0 {
                    return Ok(true);
                }
                Ok(e.distance(x) <= t + tol)
            }
            Shape::Polytope(p) => {
                if let Some(v) = p.max_violation(x) {
                    if v <= t + tol && v <= 0.0 {
                        return Ok(true);
                    }
                    if v > t + tol {
                        return Ok(false);
                    }
                }
                if t == 0.0 {
                    return Ok(p.contains(x, tol));
                }
                let cloud = PointCloud { dim: self.dim, points: p.vertices() };
                let out = gjk(&cloud, x, Some(t), &GjkOptions::default())?;
                Ok(out.within(t, tol))
            }
            Shape::Scaled { factor, body } => {
                let y: Vec<f64> = x.iter().map(|v| v / factor).collect();
                body.dist_le_impl(&y, t / factor, tol / factor)
            }
            Shape::Transformed { motion, body } => body.dist_le_impl(&motion.apply_inverse(x), t, tol),
            Shape::MinkSum(m) => {
                let y: Vec<f64> = x.iter().zip(&m.offset).map(|(a, b)| a - b).collect();
                let t2 = t + m.radius;
                match m.rest.len() {
                    0 => Ok(norm(&y) <= t2 + tol),
                    1 => m.rest[0].dist_le_impl(&y, t2, tol),
                    _ => {
                        let parts: Vec<&dyn SupportMap> = m.rest.iter().map(|b| b as &dyn SupportMap).collect();
                        let out = gjk(&SumMap { parts: &parts }, &y, Some(t2), &GjkOptions::default())?;
                        Ok(out.within(t2, tol))
                    }
                }
            }
            Shape::Product(fs) => {
                let mut start = 0;
                let mut d2 = 0.0;
                let lim = (t + tol) * (t + tol);
                for f in fs {
                    let d = f.distance_impl(&x[start..start + f.dim])?;
                    d2 += d * d;
                    if d2 > lim {
                        return Ok(false);
                    }
                    start += f.dim;
                }
                Ok(true)
            }
        }
    }

    /// Membership with tolerance: `dist(x, K) ≤ tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        if tol < 0.0 {
            return Err(Error::InvalidArgument("tolerance must be nonnegative".into()));
        }
        self.dist_le(x, 0.0, tol)
    }

    /// Axis-aligned bounding box from support values along `±e_i`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.dim;
        let mut lo = vec![0.0; n];
        let mut hi = vec![0.0; n];
        let mut e = vec![0.0; n];
        for i in 0..n {
            e[i] = 1.0;
            hi[i] = self.support_unchecked(&e);
            e[i] = -1.0;
            lo[i] = -self.support_unchecked(&e);
            e[i] = 0.0;
        }
        (lo, hi)
    }

    /// Diameter (exact for balls, ellipsoids, polytopes and products; an
    /// upper bound for general Minkowski sums).
    pub fn diameter(&self) -> f64 {
        match self.shape() {
            Shape::Ball { radius, .. } => 2.0 * radius,
            Shape::Ellipsoid(e) => 2.0 * e.semi_axes().iter().cloned().fold(0.0, f64::max),
            Shape::Polytope(p) => {
                let v = p.vertices();
                let mut d: f64 = 0.0;
                for i in 0..v.len() {
                    for j in i + 1..v.len() {
                        d = d.max(crate::linalg::dist(&v[i], &v[j]));
                    }
                }
                d
            }
            Shape::MinkSum(m) => 2.0 * m.radius + m.rest.iter().map(|b| b.diameter()).sum::<f64>(),
            Shape::Scaled { factor, body } => factor * body.diameter(),
            Shape::Transformed { body, .. } => body.diameter(),
            Shape::Product(fs) => fs.iter().map(|f| f.diameter().powi(2)).sum::<f64>().sqrt(),
        }
    }

    /// A point of the body, central enough to serve as a radial origin.
    pub fn interior_point(&self) -> Vec<f64> {
        match self.shape() {
            Shape::Ball { center, .. } => center.clone(),
            Shape::Ellipsoid(e) => e.center().to_vec(),
            Shape::Polytope(p) => p.centroid(),
            Shape::MinkSum(m) => {
                let mut c = m.offset.clone();
                for b in &m.rest {
                    c.iter_mut().zip(b.interior_point()).for_each(|(a, b)| *a += b);
                }
                c
            }
            Shape::Scaled { factor, body } => body.interior_point().iter().map(|v| v * factor).collect(),
            Shape::Transformed { motion, body } => motion.apply(&body.interior_point()),
            Shape::Product(fs) => fs.iter().flat_map(|f| f.interior_point()).collect(),
        }
    }

    /// Volume by the requested method.
    pub fn volume(&self, method: VolumeMethod, mc: &McConfig) -> Result<McEstimate> {
        volume::volume(self, method, mc)
    }

    /// Exact volume where a closed form exists.
    pub fn exact_volume(&self) -> Result<f64> {
        exact::exact_volume(self)
    }
}

impl SupportMap for ConvexBody {
    fn dim(&self) -> usize {
        self.dim
    }

    fn support_point(&self, u: &[f64], out: &mut [f64]) {
        self.support_point_impl(u, out)
    }
}

fn ball_support_point(center: &[f64], radius: f64, u: &[f64], out: &mut [f64]) {
    let nu = norm(u);
    for i in 0..center.len() {
        out[i] = center[i] + if nu > 0.0 { radius * u[i] / nu } else { 0.0 };
    }
}

fn ball_nearest(center: &[f64], radius: f64, x: &[f64]) -> (f64, Vec<f64>) {
    let d = crate::linalg::dist(center, x);
    if d <= radius {
        (0.0, x.to_vec())
    } else {
        let s = radius / d;
        (d - radius, center.iter().zip(x).map(|(c, v)| c + s * (v - c)).collect())
    }
}

/// Direction set for Hausdorff estimates. Prefixes are nested, so more
/// directions never lower the estimate: `±e_i` first, then a van der Corput
/// sweep of the circle in 2D or fixed-seed Gaussian directions otherwise.
pub fn direction_sequence(n: usize, count: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    for i in 0..n {
        for s in [1.0, -1.0] {
            if out.len() < count {
                let mut e = vec![0.0; n];
                e[i] = s;
                out.push(e);
            }
        }
    }
    let mut k: u64 = 1;
    let mut rng = crate::mc::McRng::seed_from_u64(0x5EED_D1EC);
    while out.len() < count {
        if n == 2 {
            let mut x = 0.0;
            let mut denom = 1.0;
            let mut m = k;
            while m > 0 {
                denom *= 2.0;
                x += (m & 1) as f64 / denom;
                m >>= 1;
            }
            let th = 2.0 * std::f64::consts::PI * x;
            out.push(vec![th.cos(), th.sin()]);
            k += 1;
        } else {
            out.push(crate::linalg::random_direction(&mut rng, n));
        }
    }
    out
}

/// `max_u |h_A(u) − h_B(u)|` over the first `n_dirs` directions of
/// [`direction_sequence`].
pub fn hausdorff_distance(a: &ConvexBody, b: &ConvexBody, n_dirs: usize) -> Result<f64> {
    check_dim(a.dim, b.dim)?;
    if n_dirs == 0 {
        return Err(Error::InvalidArgument("at least one direction is required".into()));
    }
    Ok(direction_sequence(a.dim, n_dirs)
        .iter()
        .map(|u| (a.support_unchecked(u) - b.support_unchecked(u)).abs())
        .fold(0.0, f64::max))
}

/// Support map of `A − B`.
struct Difference<'a> {
    a: &'a ConvexBody,
    b: &'a ConvexBody,
}

impl SupportMap for Difference<'_> {
    fn dim(&self) -> usize {
        self.a.dim
    }

    fn support_point(&self, u: &[f64], out: &mut [f64]) {
        self.a.support_point_impl(u, out);
        let neg: Buf = u.iter().map(|v| -v).collect();
        let mut tmp = buf(u.len());
        self.b.support_point_impl(&neg, &mut tmp);
        out.iter_mut().zip(tmp.iter()).for_each(|(o, t)| *o -= t);
    }
}

/// Whether `dist(A, B) ≤ tol`, decided by GJK on `A − B` with a certified
/// bracket (gap tolerance 1e-9, 10 000 iterations).
pub fn intersect_nonempty(a: &ConvexBody, b: &ConvexBody, tol: f64) -> Result<bool> {
    check_dim(a.dim, b.dim)?;
    if let (Shape::Ball { center: c1, radius: r1 }, Shape::Ball { center: c2, radius: r2 }) = (a.shape(), b.shape()) {
        return Ok(crate::linalg::dist(c1, c2) <= r1 + r2 + tol);
    }
    let out = gjk(&Difference { a, b }, &vec![0.0; a.dim], Some(tol), &GjkOptions::default())?;
    Ok(out.within(tol, 0.0) || (out.verdict == Verdict::Converged && out.upper <= tol + 1e-9))
}

/// Unit ball volume re-exported for convenience.
pub fn omega(n: usize) -> f64 {
    unit_ball_volume(n)
}

#[cfg(test)]
mod tests;
