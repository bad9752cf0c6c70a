use std::f64::consts::PI;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

use super::*;
use crate::linalg::random_direction;
use crate::mc::{run_mc, Stream};

fn square() -> ConvexBody {
    ConvexBody::unit_cube(2)
}

#[test]
fn support_examples() {
    let cube = ConvexBody::cuboid(&[-1.0; 3], &[1.0; 3]).unwrap();
    assert_eq!(cube.support(&[1.0, 0.0, 0.0]).unwrap(), 1.0);
    let b = ConvexBody::ball(vec![0.0; 3], 2.5).unwrap();
    let mut rng = Stream::new(1).rng();
    for _ in 0..20 {
        let u = random_direction(&mut rng, 3);
        assert!((b.support(&u).unwrap() - 2.5).abs() < 1e-14);
    }
    assert!(cube.support(&[1.0, 0.0]).is_err());
}

#[test]
fn support_is_additive_over_sums() {
    let a = ConvexBody::polytope(vec![vec![0.0, 0.0], vec![2.0, 0.5], vec![0.3, 1.7]]).unwrap();
    let b = ConvexBody::ellipsoid(Ellipsoid::from_semi_axes(vec![1.0, -1.0], vec![0.5, 1.5]).unwrap());
    let c = ConvexBody::cuboid(&[0.0, 0.0], &[1.0, 3.0]).unwrap().scaled(0.7).unwrap();
    let sum = ConvexBody::minkowski_sum(vec![a.clone(), b.clone(), c.clone()]).unwrap();
    let mut rng = Stream::new(2).rng();
    for _ in 0..100 {
        let u = random_direction(&mut rng, 2);
        let want = a.support(&u).unwrap() + b.support(&u).unwrap() + c.support(&u).unwrap();
        assert!((sum.support(&u).unwrap() - want).abs() < 1e-9);
    }
}

#[test]
fn membership_examples() {
    let d = ConvexBody::unit_ball(2);
    assert!(d.contains(&[0.0, 0.0], 0.0).unwrap());
    assert!(!d.contains(&[2.0, 0.0], 0.0).unwrap());
    assert!(d.contains(&[1.0, 0.0], 1e-12).unwrap());
}

/// Projection onto an axis-aligned box is coordinate clamping, independent
/// of the GJK and half-space code paths.
fn clamp_distance(x: &[f64], lo: &[f64], hi: &[f64]) -> f64 {
    x.iter().zip(lo.iter().zip(hi)).map(|(v, (l, h))| (v - v.clamp(*l, *h)).powi(2)).sum::<f64>().sqrt()
}

#[test]
fn parallel_body_membership_matches_projection() {
    let eps = 0.5;
    let body = square().parallel_body(eps).unwrap();
    // Expressed as a sum with a non-ball second summand to force GJK.
    let gjk_body = ConvexBody::minkowski_sum(vec![
        square(),
        ConvexBody::ellipsoid(Ellipsoid::from_semi_axes(vec![0.0, 0.0], vec![eps, eps * (1.0 + 1e-15)]).unwrap()),
    ])
    .unwrap();
    let mut rng = Stream::new(3).rng();
    let mut disagreements = 0;
    for _ in 0..1000 {
        let x = [rng.random_range(-1.0..2.0), rng.random_range(-1.0..2.0)];
        let want = clamp_distance(&x, &[0.0, 0.0], &[1.0, 1.0]) <= eps;
        assert_eq!(body.contains(&x, 0.0).unwrap(), want, "{x:?}");
        if gjk_body.contains(&x, 1e-9).unwrap() != want {
            disagreements += 1;
        }
        let d = body.distance(&x).unwrap();
        assert!((d - (clamp_distance(&x, &[0.0, 0.0], &[1.0, 1.0]) - eps).max(0.0)).abs() < 1e-12);
    }
    assert_eq!(disagreements, 0);
}

#[test]
fn hausdorff_examples() {
    let b1 = ConvexBody::ball(vec![1.0, 2.0], 0.5).unwrap();
    let b2 = ConvexBody::ball(vec![1.0, 2.0], 2.0).unwrap();
    assert!((hausdorff_distance(&b1, &b2, 64).unwrap() - 1.5).abs() < 1e-14);
    assert_eq!(hausdorff_distance(&square(), &square(), 64).unwrap(), 0.0);
    assert!(hausdorff_distance(&b1, &b2, 0).is_err());
}

#[test]
fn hausdorff_square_vs_inscribed_disk_matches_dense_sweep() {
    let disk = ConvexBody::ball(vec![0.5, 0.5], 0.5).unwrap();
    // Oracle: closed-form supports swept over 10⁵ equispaced angles.
    let m = 100_000;
    let oracle = (0..m)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / m as f64;
            let (c, s) = (t.cos(), t.sin());
            let h_sq = c.max(0.0) + s.max(0.0);
            let h_disk = 0.5 * (c + s) + 0.5;
            (h_sq - h_disk).abs()
        })
        .fold(0.0, f64::max);
    let est = hausdorff_distance(&square(), &disk, 4096).unwrap();
    assert!((est - oracle).abs() < 1e-6, "{est} vs {oracle}");
    assert!((oracle - 0.5 * (2f64.sqrt() - 1.0)).abs() < 1e-9);
}

#[test]
fn hausdorff_is_monotone_in_direction_count() {
    let tri = ConvexBody::polytope(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.2, 0.9]]).unwrap();
    let disk = ConvexBody::ball(vec![0.4, 0.3], 0.35).unwrap();
    let mut last = 0.0;
    for k in [1, 2, 4, 8, 16, 64, 256] {
        let d = hausdorff_distance(&tri, &disk, k).unwrap();
        assert!(d >= last);
        last = d;
    }
}

#[test]
fn volume_examples() {
    let mc = McConfig::new(400_000, 11);
    assert_eq!(ConvexBody::unit_cube(3).volume(VolumeMethod::Exact, &mc).unwrap().mean, 1.0);
    assert!((ConvexBody::unit_ball(2).volume(VolumeMethod::Exact, &mc).unwrap().mean - PI).abs() < 1e-15);
    let sum = square().parallel_body(1.0).unwrap();
    let est = sum.volume(VolumeMethod::MonteCarlo, &mc).unwrap();
    // 2D Steiner: area + perimeter·r + π r².
    assert!(est.z_against(1.0 + 4.0 + PI) < 3.0, "{est:?}");
    let sum_gjk = ConvexBody::minkowski_sum(vec![
        square(),
        ConvexBody::polytope(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(),
    ])
    .unwrap();
    assert!(sum_gjk.volume(VolumeMethod::Exact, &mc).is_err());
}

#[test]
fn volume_scales_with_degree_n() {
    let mc = McConfig::new(200_000, 12);
    let bodies = [
        ConvexBody::polytope(vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap(),
        ConvexBody::ellipsoid(Ellipsoid::from_semi_axes(vec![0.0; 3], vec![1.0, 2.0, 0.5]).unwrap()),
        ConvexBody::unit_ball(3),
    ];
    for k in &bodies {
        let v = k.exact_volume().unwrap();
        for lam in [0.5, 2.0, 3.0] {
            let s = k.scaled(lam).unwrap();
            assert!((s.exact_volume().unwrap() - lam.powi(3) * v).abs() < 1e-12 * lam.powi(3) * v.max(1.0));
            let est = s.volume(VolumeMethod::MonteCarlo, &mc.child(lam.to_bits())).unwrap();
            assert!(est.z_against(lam.powi(3) * v) < 3.0, "{est:?}");
        }
    }
}

#[test]
fn rigid_motion_invariance_of_volume_and_hausdorff() {
    let mut rng = Stream::new(13).rng();
    let m = RigidMotion::random(&mut rng, 2, vec![0.3, -1.2]).unwrap();
    let a = square().parallel_body(0.3).unwrap();
    let b = ConvexBody::polytope(vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.5, 1.0]]).unwrap();
    let mc = McConfig::new(200_000, 14);
    let va = a.volume(VolumeMethod::MonteCarlo, &mc).unwrap();
    let va_moved = a.transformed(&m).unwrap().volume(VolumeMethod::MonteCarlo, &mc.child(1)).unwrap();
    assert!(va.z_score(&va_moved) < 3.0);
    let d = hausdorff_distance(&a, &b, 20_000).unwrap();
    let d_moved = hausdorff_distance(&a.transformed(&m).unwrap(), &b.transformed(&m).unwrap(), 20_000).unwrap();
    assert!((d - d_moved).abs() < 1e-3);
}

#[test]
fn random_4d_polytope_complex_line_slice_matches_membership_integral() {
    let mut rng = Stream::new(15).rng();
    let pts: Vec<Vec<f64>> = (0..12).map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let k = ConvexBody::polytope(pts).unwrap();
    let u = crate::hermitian::sample_unitary(2, &mut rng);
    let q = u.columns(0, 2).into_owned();
    let e = AffineSubspace::new(vec![0.05, -0.1, 0.0, 0.1], q).unwrap();
    assert!(e.is_complex_compatible());
    let s = slice(&k, &e).unwrap();
    let area = s.body().map(|b| b.exact_volume().unwrap()).unwrap_or(0.0);
    assert!(area > 0.0);
    // Oracle: hit-or-miss in E-coordinates against the half-space test of K.
    let (lo, hi) = ([-2.0, -2.0], [2.0, 2.0]);
    let p = match k.shape() {
        Shape::Polytope(p) => p.clone(),
        _ => unreachable!(),
    };
    let est = run_mc(&McConfig::new(400_000, 16), |rng| {
        let y = [rng.random_range(lo[0]..hi[0]), rng.random_range(lo[1]..hi[1])];
        Ok(if p.contains(&e.from_coords(&y), 0.0) { 16.0 } else { 0.0 })
    })
    .unwrap();
    assert!(est.z_against(area) < 3.0, "{est:?} vs {area}");
}

#[test]
fn slice_membership_round_trip_on_polytopes() {
    let mut rng = Stream::new(17).rng();
    let pts: Vec<Vec<f64>> = (0..10).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let k = ConvexBody::polytope(pts).unwrap();
    let q = haar_rotation(&mut rng, 3).columns(0, 2).into_owned();
    let e = AffineSubspace::new(vec![0.1, 0.0, -0.05], q).unwrap();
    let s = slice(&k, &e).unwrap();
    let sb = s.body().unwrap();
    for _ in 0..2000 {
        let y = [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
        let x = e.from_coords(&y);
        let in_k = k.contains(&x, 1e-12).unwrap();
        let in_slice = sb.contains(&y, 1e-12).unwrap();
        let margin = k.distance(&x).unwrap().max(sb.distance(&y).unwrap());
        if margin > 1e-9 || (in_k && in_slice) {
            assert_eq!(in_k, in_slice, "{y:?}");
        }
    }
}

#[test]
fn intersect_examples() {
    let d1 = ConvexBody::unit_ball(2);
    let d2 = ConvexBody::ball(vec![1.5, 0.0], 1.0).unwrap();
    let d3 = ConvexBody::ball(vec![2.5, 0.0], 1.0).unwrap();
    assert!(intersect_nonempty(&d1, &d2, 1e-9).unwrap());
    assert!(!intersect_nonempty(&d1, &d3, 1e-9).unwrap());
    let e = ConvexBody::ellipsoid(Ellipsoid::from_semi_axes(vec![2.5, 0.0], vec![1.0, 1.0 + 1e-12]).unwrap());
    assert!(!intersect_nonempty(&d1, &e, 1e-9).unwrap());
}

#[test]
fn translate_hit_fraction_matches_steiner_area() {
    let disk = ConvexBody::unit_ball(2);
    let (lo, hi) = ([-2.5, -2.5], [1.5, 1.5]);
    let window = 16.0;
    let est = run_mc(&McConfig::new(100_000, 18), |rng| {
        let t = [rng.random_range(lo[0]..hi[0]), rng.random_range(lo[1]..hi[1])];
        let moved = square().translated(&t)?;
        Ok(if intersect_nonempty(&moved, &disk, 1e-9)? { 1.0 } else { 0.0 })
    })
    .unwrap();
    // Translates t with (square + t) ∩ D ≠ ∅ form D − square, of area 1 + 4 + π.
    assert!(est.z_against((1.0 + 4.0 + PI) / window) < 3.0, "{est:?}");
}

#[test]
fn product_distance_and_support() {
    let p = ConvexBody::product(vec![ConvexBody::unit_ball(2), ConvexBody::unit_cube(2)]).unwrap();
    assert_eq!(p.dim(), 4);
    assert!((p.support(&[1.0, 0.0, 1.0, 1.0]).unwrap() - 3.0).abs() < 1e-14);
    assert!((p.distance(&[2.0, 0.0, 2.0, 0.5]).unwrap() - 2f64.sqrt()).abs() < 1e-14);
    assert!(p.contains(&[0.5, 0.5, 0.2, 0.9], 0.0).unwrap());
}

fn arb_polytope(n: usize) -> impl Strategy<Value = ConvexBody> {
    prop::collection::vec(prop::collection::vec(-2.0f64..2.0, n), n + 1..n + 8)
        .prop_filter_map("degenerate", |pts| ConvexBody::polytope(pts).ok())
}

fn arb_ellipsoid(n: usize) -> impl Strategy<Value = ConvexBody> {
    (prop::collection::vec(-1.0f64..1.0, n), prop::collection::vec(0.1f64..2.0, n), any::<u64>()).prop_map(
        move |(c, a, seed)| {
            let r = haar_rotation(&mut Stream::new(seed).rng(), n);
            let e = Ellipsoid::from_semi_axes(vec![0.0; n], a).unwrap();
            ConvexBody::ellipsoid(e).transformed(&RigidMotion::new(r, c).unwrap()).unwrap()
        },
    )
}

fn arb_body(n: usize) -> impl Strategy<Value = ConvexBody> {
    prop_oneof![
        arb_polytope(n),
        arb_ellipsoid(n),
        (prop::collection::vec(-1.0f64..1.0, n), 0.1f64..2.0).prop_map(|(c, r)| ConvexBody::ball(c, r).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn support_is_sublinear(k in arb_body(3), u in prop::collection::vec(-1.0f64..1.0, 3), v in prop::collection::vec(-1.0f64..1.0, 3), s in 0.0f64..3.0) {
        let uv: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        let h = |w: &[f64]| k.support(w).unwrap();
        prop_assert!(h(&uv) <= h(&u) + h(&v) + 1e-9);
        let su: Vec<f64> = u.iter().map(|x| x * s).collect();
        prop_assert!((h(&su) - s * h(&u)).abs() <= 1e-9 * (1.0 + s));
    }

    #[test]
    fn support_of_sum_is_sum_of_supports(a in arb_body(2), b in arb_body(2), r in 0.0f64..1.0, th in 0.0f64..6.3) {
        let u = [th.cos(), th.sin()];
        let mut parts = vec![a.clone(), b.clone()];
        if r > 0.0 {
            parts.push(ConvexBody::ball(vec![0.3, -0.2], r).unwrap());
        }
        let sum = ConvexBody::minkowski_sum(parts).unwrap();
        let want = a.support(&u).unwrap() + b.support(&u).unwrap() + if r > 0.0 { r + 0.3 * u[0] - 0.2 * u[1] } else { 0.0 };
        prop_assert!((sum.support(&u).unwrap() - want).abs() < 1e-9);
    }

    #[test]
    fn membership_agrees_with_support_halfspaces(k in arb_body(2), x in prop::collection::vec(-3.0f64..3.0, 2)) {
        let inside = k.contains(&x, 0.0).unwrap();
        let d = k.distance(&x).unwrap();
        let dirs = direction_sequence(2, 720);
        let worst = dirs.iter().map(|u| crate::linalg::dot(&x, u) - k.support(u).unwrap()).fold(f64::NEG_INFINITY, f64::max);
        if inside {
            prop_assert!(worst <= 1e-9);
        } else {
            prop_assert!(d > 0.0);
            // The supporting half-space through the nearest point separates x.
            prop_assert!(worst >= d * (1.0 - 1e-3) - 1e-9 || worst > 0.0);
        }
    }

    #[test]
    fn nearest_point_certificate(k in arb_body(3), x in prop::collection::vec(-4.0f64..4.0, 3)) {
        let (d, p) = k.nearest(&x).unwrap();
        prop_assert!(k.contains(&p, 1e-7).unwrap());
        if d > 1e-6 {
            let u: Vec<f64> = x.iter().zip(&p).map(|(a, b)| (a - b) / d).collect();
            prop_assert!((k.support(&u).unwrap() - crate::linalg::dot(&p, &u)).abs() < 1e-6);
        }
    }

    #[test]
    fn exact_volume_scales(k in arb_polytope(3), lam in 0.2f64..3.0) {
        let v = k.exact_volume().unwrap();
        let s = k.scaled(lam).unwrap().exact_volume().unwrap();
        prop_assert!((s - lam.powi(3) * v).abs() <= 1e-9 * (1.0 + s));
    }
}

#[test]
fn reflected_body_is_point_reflection() {
    let k = ConvexBody::polytope(vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let r = k.reflected();
    assert!((r.support(&[-1.0, 0.0]).unwrap() - 2.0).abs() < 1e-14);
    let m = r.transformed(&RigidMotion::rotation_only(DMatrix::identity(2, 2)).unwrap()).unwrap();
    assert!((m.exact_volume().unwrap() - 1.0).abs() < 1e-14);
}
