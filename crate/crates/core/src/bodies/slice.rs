use nalgebra::{DMatrix, DVector};

use super::{AffineSubspace, ConvexBody, Facet, Polytope, Shape};
use crate::error::{check_dim, Error, Result};
use crate::linalg::dot;

/// Result of intersecting a body with an affine subspace.
#[derive(Clone, Debug)]
pub enum Slice {
    /// The intersection is empty (or a single point in a positive-dimensional
    /// subspace, which carries no volume in any degree but zero).
    Empty,
    /// `K ∩ E` in the intrinsic coordinates of `E`.
    Body(ConvexBody),
}

impl Slice {
    pub fn is_empty(&self) -> bool {
        matches!(self, Slice::Empty)
    }

    pub fn body(&self) -> Option<&ConvexBody> {
        match self {
            Slice::Empty => None,
            Slice::Body(b) => Some(b),
        }
    }
}

/// `K ∩ E` expressed in the coordinates of `E`.
pub fn slice(body: &ConvexBody, e: &AffineSubspace) -> Result<Slice> {
    check_dim(body.dim(), e.ambient_dim())?;
    if e.dim() == 0 {
        return Err(Error::InvalidArgument("zero-dimensional slices are membership tests".into()));
    }
    slice_frame(body, e.base(), e.directions())
}

fn slice_frame(body: &ConvexBody, base: &[f64], q: &DMatrix<f64>) -> Result<Slice> {
    let d = q.ncols();
    match body.shape() {
        Shape::Ball { center, radius } => {
            let diff: Vec<f64> = center.iter().zip(base).map(|(c, b)| c - b).collect();
            let y0: Vec<f64> = (q.transpose() * DVector::from_column_slice(&diff)).iter().cloned().collect();
            let h2 = dot(&diff, &diff) - dot(&y0, &y0);
            let r2 = radius * radius - h2;
            if r2 <= 0.0 {
                return Ok(Slice::Empty);
            }
            Ok(Slice::Body(ConvexBody::ball(y0, r2.sqrt())?))
        }
        Shape::Ellipsoid(el) => Ok(match el.slice(base, q)? {
            None => Slice::Empty,
            Some(s) => Slice::Body(ConvexBody::ellipsoid(s)),
        }),
        Shape::Polytope(p) => {
            let mut hs = Vec::new();
            let scale = p.vertices().iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
            for f in p.halfspaces() {
                let a: Vec<f64> = (q.transpose() * DVector::from_column_slice(&f.normal)).iter().cloned().collect();
                let b = f.offset - dot(&f.normal, base);
                if crate::linalg::norm(&a) <= 1e-12 {
                    if b < -1e-10 * scale {
                        return Ok(Slice::Empty);
                    }
                    continue;
                }
                hs.push(Facet { normal: a, offset: b });
            }
            match Polytope::from_halfspaces(d, &hs)? {
                None => Ok(Slice::Empty),
                Some(poly) => Ok(Slice::Body(ConvexBody::from_polytope(poly))),
            }
        }
        Shape::Scaled { factor, body } => {
            let b: Vec<f64> = base.iter().map(|v| v / factor).collect();
            Ok(match slice_frame(body, &b, q)? {
                Slice::Empty => Slice::Empty,
                Slice::Body(s) => Slice::Body(s.scaled(*factor)?),
            })
        }
        Shape::Transformed { motion, body } => {
            let b = motion.apply_inverse(base);
            let r = motion.rotation_matrix();
            let q2 = r.transpose() * q;
            slice_frame(body, &b, &q2)
        }
        Shape::MinkSum(_) | Shape::Product(_) => {
            Err(Error::Unsupported(format!("slicing a {} body", body.kind())))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_slices_follow_pythagoras() {
        let b = ConvexBody::unit_ball(3);
        let e = AffineSubspace::coordinate(vec![0.0, 0.0, 0.6], &[0, 1]).unwrap();
        match slice(&b, &e).unwrap() {
            Slice::Body(s) => match s.shape() {
                Shape::Ball { radius, .. } => assert!((radius - 0.8).abs() < 1e-14),
                _ => panic!("expected a ball"),
            },
            Slice::Empty => panic!("nonempty"),
        }
        let far = AffineSubspace::coordinate(vec![0.0, 0.0, 1.5], &[0, 1]).unwrap();
        assert!(slice(&b, &far).unwrap().is_empty());
    }

    #[test]
    fn cube_midplane_is_square() {
        let c = ConvexBody::cuboid(&[-1.0; 3], &[1.0; 3]).unwrap();
        let e = AffineSubspace::coordinate(vec![0.0; 3], &[0, 1]).unwrap();
        let s = slice(&c, &e).unwrap();
        let s = s.body().unwrap();
        assert!((s.exact_volume().unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(s.bounding_box(), (vec![-1.0, -1.0], vec![1.0, 1.0]));
    }

    #[test]
    fn transformed_and_scaled_slices() {
        let c = ConvexBody::unit_cube(2).scaled(2.0).unwrap().translated(&[1.0, 0.0]).unwrap();
        let e = AffineSubspace::coordinate(vec![0.0, 1.0], &[0]).unwrap();
        let s = slice(&c, &e).unwrap();
        let (lo, hi) = s.body().unwrap().bounding_box();
        assert!((lo[0] - 1.0).abs() < 1e-14 && (hi[0] - 3.0).abs() < 1e-14);
    }
}
