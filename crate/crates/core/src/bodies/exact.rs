//! Closed-form intrinsic volumes in the classical normalization
//! (`V_0 = 1` on nonempty bodies, `V_n = vol`, `V_j` independent of the
//! ambient dimension). Conversions to other normalizations live in
//! `intrinsic`.

use super::{ConvexBody, Polytope, Shape};
use crate::error::{Error, Result};
use crate::linalg::{binomial, dist, dot, elementary_symmetric, unit_ball_volume};

/// `V_0 .. V_n` (classical normalization) where a closed form is known.
pub fn standard_intrinsic_volumes(body: &ConvexBody) -> Result<Vec<f64>> {
    let n = body.dim();
    match body.shape() {
        Shape::Ball { radius, .. } => Ok(ball(n, *radius)),
        Shape::Polytope(p) => polytope(p),
        Shape::Ellipsoid(e) => {
            let a = e.semi_axes();
            let amax = a.iter().cloned().fold(0.0, f64::max);
            let amin = a.iter().cloned().fold(f64::INFINITY, f64::min);
            if amax - amin <= 1e-15 * amax {
                return Ok(ball(n, amax));
            }
            match n {
                2 => Ok(vec![1.0, ellipse_perimeter(a[0], a[1]) / 2.0, e.volume()]),
                _ => Err(Error::UnsupportedExact(format!("intrinsic volumes of a {n}-dimensional ellipsoid"))),
            }
        }
        Shape::Scaled { factor, body } => {
            Ok(standard_intrinsic_volumes(body)?.iter().enumerate().map(|(j, v)| v * factor.powi(j as i32)).collect())
        }
        Shape::Transformed { body, .. } => standard_intrinsic_volumes(body),
        Shape::Product(fs) => {
            let mut acc = vec![1.0];
            for f in fs {
                let v = standard_intrinsic_volumes(f)?;
                let mut next = vec![0.0; acc.len() + v.len() - 1];
                for (i, a) in acc.iter().enumerate() {
                    for (j, b) in v.iter().enumerate() {
                        next[i + j] += a * b;
                    }
                }
                acc = next;
            }
            Ok(acc)
        }
        Shape::MinkSum(m) => match m.rest().len() {
            0 if m.radius() > 0.0 => Ok(ball(n, m.radius())),
            0 => Ok(point(n)),
            1 => Ok(steiner_shift(n, &standard_intrinsic_volumes(&m.rest()[0])?, m.radius())),
            _ => Err(Error::UnsupportedExact("Minkowski sums of several non-ball bodies".into())),
        },
    }
}

/// Exact volume.
pub fn exact_volume(body: &ConvexBody) -> Result<f64> {
    let n = body.dim();
    match body.shape() {
        Shape::Ball { radius, .. } => Ok(unit_ball_volume(n) * radius.powi(n as i32)),
        Shape::Polytope(p) => Ok(p.volume()),
        Shape::Ellipsoid(e) => Ok(e.volume()),
        Shape::Scaled { factor, body } => Ok(factor.powi(n as i32) * exact_volume(body)?),
        Shape::Transformed { body, .. } => exact_volume(body),
        Shape::Product(fs) => fs.iter().map(exact_volume).product(),
        Shape::MinkSum(_) => Ok(standard_intrinsic_volumes(body)?[n]),
    }
}

fn point(n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n + 1];
    v[0] = 1.0;
    v
}

fn ball(n: usize, r: f64) -> Vec<f64> {
    (0..=n)
        .map(|j| binomial(n, j) * unit_ball_volume(n) / unit_ball_volume(n - j) * r.powi(j as i32))
        .collect()
}

/// Intrinsic volumes of `K + r D` from those of `K`, via the Steiner
/// coefficients `c_j = ω_j V_{n−j}`, which shift as
/// `c_j(K + rD) = Σ_{i ≥ j} C(i, j) r^{i−j} c_i(K)`.
pub fn steiner_shift(n: usize, v: &[f64], r: f64) -> Vec<f64> {
    let c: Vec<f64> = (0..=n).map(|j| unit_ball_volume(j) * v[n - j]).collect();
    let shifted: Vec<f64> =
        (0..=n).map(|j| (j..=n).map(|i| c[i] * binomial(i, j) * r.powi((i - j) as i32)).sum()).collect();
    (0..=n).map(|k| shifted[n - k] / unit_ball_volume(n - k)).collect()
}

fn polytope(p: &Polytope) -> Result<Vec<f64>> {
    let n = p.dim();
    if let Some((_, _, inner)) = p.flat_frame() {
        let mut v = match inner {
            None => vec![1.0],
            Some(q) => polytope(q)?,
        };
        v.resize(n + 1, 0.0);
        return Ok(v);
    }
    if let Some(sides) = p.box_sides() {
        return Ok(elementary_symmetric(&sides));
    }
    match n {
        1 => Ok(vec![1.0, p.volume()]),
        2 => Ok(vec![1.0, p.surface_area() / 2.0, p.volume()]),
        3 => Ok(vec![1.0, mean_width_term(p), p.surface_area() / 2.0, p.volume()]),
        _ => Err(Error::UnsupportedExact(format!("intrinsic volumes of a general {n}-polytope"))),
    }
}

/// `V_1` of a 3-polytope: `Σ_edges ℓ(e) α(e) / (2π)` with `α` the angle
/// between the outer normals of the two facets meeting at `e`.
fn mean_width_term(p: &Polytope) -> f64 {
    let facets = p.facets().expect("full-dimensional");
    let fverts: Vec<Vec<Vec<f64>>> = facets.iter().map(|f| p.facet_vertices(f)).collect();
    let mut total = 0.0;
    for i in 0..facets.len() {
        for j in i + 1..facets.len() {
            let common: Vec<&Vec<f64>> =
                fverts[i].iter().filter(|v| fverts[j].iter().any(|w| dist(v, w) <= 1e-12 * (1.0 + crate::linalg::norm(v)))).collect();
            if common.len() < 2 {
                continue;
            }
            let mut len: f64 = 0.0;
            for a in 0..common.len() {
                for b in a + 1..common.len() {
                    len = len.max(dist(common[a], common[b]));
                }
            }
            let angle = dot(&facets[i].normal, &facets[j].normal).clamp(-1.0, 1.0).acos();
            total += len * angle;
        }
    }
    total / (2.0 * std::f64::consts::PI)
}

/// Perimeter of the ellipse with semi-axes `a`, `b` by the
/// arithmetic–geometric mean.
pub fn ellipse_perimeter(a: f64, b: f64) -> f64 {
    let (mut x, mut y) = (a.max(b), a.min(b));
    let mut sum = 0.5 * (x * x - y * y);
    let mut pow = 0.5;
    for _ in 0..64 {
        let c = 0.5 * (x - y);
        let nx = 0.5 * (x + y);
        let ny = (x * y).sqrt();
        pow *= 2.0;
        sum += pow * c * c;
        x = nx;
        y = ny;
        if c.abs() <= 1e-17 * x {
            break;
        }
    }
    2.0 * std::f64::consts::PI / x * (a.max(b).powi(2) - sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::Ellipsoid;
    use std::f64::consts::PI;

    #[test]
    fn cube_in_three_dimensions() {
        let c = ConvexBody::unit_cube(3);
        assert_eq!(standard_intrinsic_volumes(&c).unwrap(), vec![1.0, 3.0, 3.0, 1.0]);
        // A rotated copy goes through the general facet/edge route.
        let (s, co) = (0.3f64.sin(), 0.3f64.cos());
        let verts = Polytope::cuboid(&[0.0; 3], &[1.0; 3])
            .unwrap()
            .vertices()
            .iter()
            .map(|v| vec![co * v[0] - s * v[1], s * v[0] + co * v[1], v[2]])
            .collect();
        let hull = ConvexBody::polytope(verts).unwrap();
        let v = standard_intrinsic_volumes(&hull).unwrap();
        for (a, b) in v.iter().zip([1.0, 3.0, 3.0, 1.0]) {
            assert!((a - b).abs() < 1e-12, "{v:?}");
        }
    }

    #[test]
    fn regular_tetrahedron_mean_width() {
        let t = ConvexBody::polytope(vec![
            vec![1.0, 1.0, 1.0],
            vec![1.0, -1.0, -1.0],
            vec![-1.0, 1.0, -1.0],
            vec![-1.0, -1.0, 1.0],
        ])
        .unwrap();
        let v = standard_intrinsic_volumes(&t).unwrap();
        // Edge 2√2, six edges, exterior angle π − arccos(1/3).
        let want = 6.0 * 2.0 * 2f64.sqrt() * (PI - (1.0f64 / 3.0).acos()) / (2.0 * PI);
        assert!((v[1] - want).abs() < 1e-12);
        assert!((v[3] - 8.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ellipse_perimeter_against_quadrature() {
        let (a, b) = (2.0, 1.0);
        let m = 200_000;
        let mut s = 0.0;
        for k in 0..m {
            let t = 2.0 * PI * (k as f64 + 0.5) / m as f64;
            s += (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).sqrt();
        }
        let quad = s * 2.0 * PI / m as f64;
        assert!((ellipse_perimeter(a, b) - quad).abs() < 1e-10);
        assert!((ellipse_perimeter(1.0, 1.0) - 2.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn steiner_shift_of_square() {
        let sq = ConvexBody::unit_cube(2).parallel_body(1.0).unwrap();
        let v = standard_intrinsic_volumes(&sq).unwrap();
        assert!((v[2] - (1.0 + 4.0 + PI)).abs() < 1e-12);
        assert!((v[1] - (2.0 + PI)).abs() < 1e-12);
        let e = ConvexBody::ellipsoid(Ellipsoid::from_semi_axes(vec![0.0; 2], vec![2.0, 1.0]).unwrap());
        assert!((exact_volume(&e).unwrap() - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn products_convolve() {
        let disk = ConvexBody::unit_ball(2);
        let seg = ConvexBody::cuboid(&[0.0], &[1.0]).unwrap();
        let cyl = ConvexBody::product(vec![disk, seg]).unwrap();
        let v = standard_intrinsic_volumes(&cyl).unwrap();
        assert!((v[3] - PI).abs() < 1e-12);
        assert!((v[2] - (PI + PI)).abs() < 1e-12);
    }
}
