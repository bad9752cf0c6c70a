use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{ConvexBody, Ellipsoid, RigidMotion, Shape};
use crate::error::{Error, Result};

/// Serialized body literal, e.g. `{"type":"ball","center":[0,0],"radius":1}`.
/// The ambient dimension is inferred from the vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Polytope {
        vertices: Vec<Vec<f64>>,
    },
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Point {
        coords: Vec<f64>,
    },
    /// Either a shape matrix `Q` (`(x−c)ᵀQ⁻¹(x−c) ≤ 1`) or axis-aligned
    /// semi-axes.
    Ellipsoid {
        center: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shape: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        semi_axes: Option<Vec<f64>>,
    },
    MinkowskiSum {
        parts: Vec<BodySpec>,
    },
    Scaled {
        factor: f64,
        body: Box<BodySpec>,
    },
    Transformed {
        rotation: Vec<Vec<f64>>,
        translation: Vec<f64>,
        body: Box<BodySpec>,
    },
    Product {
        factors: Vec<BodySpec>,
    },
}

fn matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidBody("matrix must be square and nonempty".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

impl BodySpec {
    pub fn build(&self) -> Result<ConvexBody> {
        match self {
            BodySpec::Ball { center, radius } => ConvexBody::ball(center.clone(), *radius),
            BodySpec::Polytope { vertices } => ConvexBody::polytope(vertices.clone()),
            BodySpec::Box { lo, hi } => ConvexBody::cuboid(lo, hi),
            BodySpec::Point { coords } => ConvexBody::point(coords.clone()),
            BodySpec::Ellipsoid { center, shape, semi_axes } => {
                let e = match (shape, semi_axes) {
                    (Some(q), None) => Ellipsoid::from_shape(center.clone(), matrix(q)?)?,
                    (None, Some(a)) => Ellipsoid::from_semi_axes(center.clone(), a.clone())?,
                    _ => {
                        return Err(Error::InvalidBody(
                            "ellipsoid needs exactly one of `shape` or `semi_axes`".into(),
                        ))
                    }
                };
                Ok(ConvexBody::ellipsoid(e))
            }
            BodySpec::MinkowskiSum { parts } => {
                ConvexBody::minkowski_sum(parts.iter().map(|p| p.build()).collect::<Result<_>>()?)
            }
            BodySpec::Scaled { factor, body } => body.build()?.scaled(*factor),
            BodySpec::Transformed { rotation, translation, body } => {
                let m = RigidMotion::new(matrix(rotation)?, translation.clone())?;
                body.build()?.transformed(&m)
            }
            BodySpec::Product { factors } => {
                ConvexBody::product(factors.iter().map(|p| p.build()).collect::<Result<_>>()?)
            }
        }
    }

    pub fn from_json(s: &str) -> Result<ConvexBody> {
        let spec: BodySpec = serde_json::from_str(s)?;
        spec.build()
    }

    /// Literal describing an existing body.
    pub fn describe(body: &ConvexBody) -> BodySpec {
        match body.shape() {
            Shape::Ball { center, radius } => BodySpec::Ball { center: center.clone(), radius: *radius },
            Shape::Polytope(p) => BodySpec::Polytope { vertices: p.vertices().to_vec() },
            Shape::Ellipsoid(e) => {
                BodySpec::Ellipsoid { center: e.center().to_vec(), shape: Some(rows(&e.shape())), semi_axes: None }
            }
            Shape::MinkSum(m) => BodySpec::MinkowskiSum { parts: m.parts().iter().map(BodySpec::describe).collect() },
            Shape::Scaled { factor, body } => {
                BodySpec::Scaled { factor: *factor, body: Box::new(BodySpec::describe(body)) }
            }
            Shape::Transformed { motion, body } => BodySpec::Transformed {
                rotation: rows(&motion.rotation_matrix()),
                translation: motion.translation_vector().to_vec(),
                body: Box::new(BodySpec::describe(body)),
            },
            Shape::Product(fs) => BodySpec::Product { factors: fs.iter().map(BodySpec::describe).collect() },
        }
    }
}
