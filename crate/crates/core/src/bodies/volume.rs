//! Volume estimators.
//!
//! Besides closed forms and hit-or-miss sampling in a bounding box there is
//! a radial rule: for a body star-shaped about `c`,
//! `vol = (1/n) ∫_{S^{n−1}} ρ(u)ⁿ du` with `ρ` the radial function. For a
//! parallel body `K + εD` the radius along `u` solves
//! `dist(c + t u, K) = ε`, which Newton's method finds from above in a few
//! steps because the distance is convex along the ray. Directions come
//! from a randomly rotated product rule, so replicates are independent and
//! unbiased and their spread is the reported error.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{haar_rotation, ConvexBody, Shape};
use crate::error::{Error, Result};
use crate::linalg::{gauss_legendre, random_direction, unit_ball_volume};
use crate::mc::{box_volume, run_mc, uniform_in_box, Accumulator, McConfig, McEstimate, McRng};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeMethod {
    Exact,
    MonteCarlo,
    /// Randomized radial quadrature with `nodes` directions per replicate.
    Radial { nodes: usize, replicates: usize },
}

impl VolumeMethod {
    pub fn radial_default() -> Self {
        VolumeMethod::Radial { nodes: 1024, replicates: 16 }
    }
}

pub(super) fn volume(body: &ConvexBody, method: VolumeMethod, mc: &McConfig) -> Result<McEstimate> {
    match method {
        VolumeMethod::Exact => Ok(McEstimate::exact(body.exact_volume()?)),
        VolumeMethod::MonteCarlo => {
            let (lo, hi) = body.bounding_box();
            let vb = box_volume(&lo, &hi);
            let n = body.dim();
            run_mc(mc, |rng| {
                let mut x = vec![0.0; n];
                uniform_in_box(rng, &lo, &hi, &mut x);
                Ok(if body.dist_le(&x, 0.0, 0.0)? { vb } else { 0.0 })
            })
        }
        VolumeMethod::Radial { nodes, replicates } => {
            let (core, eps) = split_parallel(body);
            let r = parallel_volumes_radial(&core, &[eps], RadialRule { nodes, replicates }, mc)?;
            Ok(r[0])
        }
    }
}

/// Writes `K` as `core + ε D` when it carries a ball summand.
fn split_parallel(body: &ConvexBody) -> (ConvexBody, f64) {
    if let Shape::MinkSum(m) = body.shape() {
        if m.radius() > 0.0 && !m.rest().is_empty() {
            let mut parts = m.rest().to_vec();
            if m.offset().iter().any(|v| *v != 0.0) {
                parts.push(ConvexBody::point(m.offset().to_vec()).unwrap());
            }
            let core = ConvexBody::minkowski_sum(parts).unwrap();
            return (core, m.radius());
        }
    }
    (body.clone(), 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialRule {
    pub nodes: usize,
    pub replicates: usize,
}

/// Largest `t` with `dist(c + t u, K) ≤ ε` (`ε > 0`), or the exit point of
/// the ray from `K` when `ε = 0`.
fn radial_extent(k: &ConvexBody, c: &[f64], u: &[f64], eps: f64) -> Result<f64> {
    let n = c.len();
    let cu: f64 = c.iter().zip(u).map(|(a, b)| a * b).sum();
    let hi0 = k.support(u)? - cu + eps;
    let mut x = vec![0.0; n];
    let at = |t: f64, x: &mut Vec<f64>| {
        for i in 0..n {
            x[i] = c[i] + t * u[i];
        }
    };
    if eps > 0.0 {
        // Newton from the right: g(t) = dist(c + t u, K) is convex and
        // increasing past the exit point, so tangents undershoot g and the
        // iterates decrease monotonically to the root.
        let mut t = hi0.max(0.0);
        for _ in 0..100 {
            at(t, &mut x);
            let (g, p) = k.nearest(&x)?;
            if g <= eps {
                return Ok(t);
            }
            let slope: f64 = (0..n).map(|i| u[i] * (x[i] - p[i])).sum::<f64>() / g;
            if !(slope > 0.0) {
                break;
            }
            let step = (g - eps) / slope;
            t -= step;
            if step <= 1e-15 * t.abs().max(1e-300) {
                return Ok(t);
            }
        }
        // Fall back to bisection on the bracket [0, t].
        let (mut lo, mut hi) = (0.0, t);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            at(mid, &mut x);
            if k.distance(&x)? <= eps {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    } else {
        let (mut lo, mut hi) = (0.0, hi0.max(0.0));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            at(mid, &mut x);
            if k.dist_le(&x, 0.0, 0.0)? {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// One replicate of the rule: directions with weights summing to the
/// surface area of the sphere.
fn radial_directions(rng: &mut McRng, n: usize, nodes: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let area = n as f64 * unit_ball_volume(n);
    match n {
        1 => (vec![vec![1.0], vec![-1.0]], vec![1.0, 1.0]),
        2 => {
            let m = nodes.max(4);
            let phase: f64 = rng.random::<f64>() * 2.0 * std::f64::consts::PI / m as f64;
            let dirs = (0..m)
                .map(|j| {
                    let th = phase + 2.0 * std::f64::consts::PI * j as f64 / m as f64;
                    vec![th.cos(), th.sin()]
                })
                .collect();
            (dirs, vec![area / m as f64; m])
        }
        3 => {
            let nz = ((nodes as f64 / 2.0).sqrt().round() as usize).max(2);
            let nphi = 2 * nz;
            let (z, wz) = gauss_legendre(nz);
            let rot = haar_rotation(rng, 3);
            let phase: f64 = rng.random::<f64>() * 2.0 * std::f64::consts::PI / nphi as f64;
            let mut dirs = Vec::with_capacity(nz * nphi);
            let mut w = Vec::with_capacity(nz * nphi);
            for (zi, wi) in z.iter().zip(&wz) {
                let s = (1.0 - zi * zi).max(0.0).sqrt();
                for j in 0..nphi {
                    let ph = phase + 2.0 * std::f64::consts::PI * j as f64 / nphi as f64;
                    let v = nalgebra::Vector3::new(s * ph.cos(), s * ph.sin(), *zi);
                    let r = &rot * nalgebra::DVector::from_column_slice(v.as_slice());
                    dirs.push(r.iter().cloned().collect());
                    w.push(wi * 2.0 * std::f64::consts::PI / nphi as f64);
                }
            }
            (dirs, w)
        }
        _ => {
            let m = nodes.max(1);
            let dirs = (0..m).map(|_| random_direction(rng, n)).collect();
            (dirs, vec![area / m as f64; m])
        }
    }
}

/// `vol(K + ε D)` for each `ε` in `eps` by randomized radial quadrature.
/// All radii share the directions of a replicate.
pub fn parallel_volumes_radial(k: &ConvexBody, eps: &[f64], rule: RadialRule, mc: &McConfig) -> Result<Vec<McEstimate>> {
    let per_rep = parallel_volume_replicates(k, eps, rule, mc)?;
    let mut accs = vec![Accumulator::default(); eps.len()];
    for rep in &per_rep {
        for (a, v) in accs.iter_mut().zip(rep) {
            a.push(*v);
        }
    }
    Ok(accs.iter().map(|a| a.estimate(mc.seed())).collect())
}

/// Per-replicate volumes, `[replicate][radius]`.
pub(crate) fn parallel_volume_replicates(
    k: &ConvexBody,
    eps: &[f64],
    rule: RadialRule,
    mc: &McConfig,
) -> Result<Vec<Vec<f64>>> {
    use rayon::prelude::*;
    if rule.replicates < 2 {
        return Err(Error::InvalidArgument("radial quadrature needs at least two replicates".into()));
    }
    if eps.iter().any(|e| !(*e >= 0.0)) {
        return Err(Error::InvalidArgument("radii must be nonnegative".into()));
    }
    let n = k.dim();
    let c = k.interior_point();
    (0..rule.replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = mc.stream.child(r as u64).rng();
            let (dirs, w) = radial_directions(&mut rng, n, rule.nodes);
            let mut out = vec![0.0; eps.len()];
            for (u, wu) in dirs.iter().zip(&w) {
                for (o, &e) in out.iter_mut().zip(eps) {
                    let t = radial_extent(k, &c, u, e)?;
                    *o += wu * t.powi(n as i32) / n as f64;
                }
            }
            Ok(out)
        })
        .collect()
}
