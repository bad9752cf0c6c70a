use std::f64::consts::PI;

use super::*;
use crate::bodies::{Ellipsoid, RigidMotion};
use crate::mc::Stream;

#[test]
fn disks_and_balls_closed_forms() {
    let d = ConvexBody::unit_ball(2);
    let v = kinematic_integral(&d, &d, &MotionMeasure::iso(2), &McConfig::new(200_000, 1)).unwrap();
    assert!(v.z_against(4.0 * PI) < 3.0, "{v:?}");
    let pt = ConvexBody::point(vec![5.0, 1.0]).unwrap();
    let r = 0.7;
    let v = kinematic_integral(&ConvexBody::ball(vec![1.0, 0.0], r).unwrap(), &pt, &MotionMeasure::iso(2), &McConfig::new(200_000, 2))
        .unwrap();
    assert!(v.z_against(PI * r * r) < 3.0, "{v:?}");
    let b = ConvexBody::unit_ball(3);
    let v = kinematic_integral(&b, &b, &MotionMeasure::iso(3), &McConfig::new(200_000, 3)).unwrap();
    assert!(v.z_against(32.0 * PI / 3.0) < 3.0, "{v:?}");
}

#[test]
fn unitary_motions_on_balls() {
    let a = ConvexBody::ball(vec![0.0; 4], 1.0).unwrap();
    let b = ConvexBody::ball(vec![0.3, 0.0, 0.0, 0.0], 0.5).unwrap();
    let v = kinematic_integral(&a, &b, &MotionMeasure::iu(2), &McConfig::new(200_000, 4)).unwrap();
    assert!(v.z_against(unit_ball_volume(4) * 1.5f64.powi(4)) < 3.0, "{v:?}");
}

#[test]
fn kappa_from_ball_system() {
    let t = derive_kappa(2, &default_ball_radii(2)).unwrap();
    for (k, want) in t.kappa.iter().zip([1.0 / PI, 2.0 / PI, 1.0 / PI]) {
        assert!((k - want).abs() < 1e-12, "{:?}", t.kappa);
    }
    assert!(t.residual < 1e-10);
    let t1 = derive_kappa(1, &[(1.0, 1.0), (1.0, 3.0)]).unwrap();
    // 2(r + s) = κ_0·2·2s + κ_1·2r·2 gives κ = (1/2, 1/2).
    assert!((t1.kappa[0] - 0.5).abs() < 1e-12 && (t1.kappa[1] - 0.5).abs() < 1e-12);
    for n in 1..=6 {
        let t = derive_kappa(n, &default_ball_radii(n)).unwrap();
        assert!(t.residual < 1e-10, "n={n}: {}", t.residual);
        for k in 0..=n {
            assert!((t.kappa[k] - t.kappa[n - k]).abs() < 1e-9 * t.kappa[k]);
            assert!((t.kappa[k] - kappa_closed_form(n)[k]).abs() < 1e-9 * t.kappa[k]);
        }
    }
    assert!(matches!(derive_kappa(2, &[(1.0, 1.0), (2.0, 2.0), (1.0, 2.0)]), Err(Error::Singular(_))));
}

#[test]
fn principal_formula_square_and_disk() {
    let sq = ConvexBody::unit_cube(2);
    let d = ConvexBody::ball(vec![0.2, 0.1], 0.6).unwrap();
    let r = principal_kinematic_check(&sq, &d, 2, &McConfig::new(300_000, 5)).unwrap();
    assert!(r.pass, "{r:?}");
    // Against a point the formula collapses to κ_2 V_2(Ω₁) V_0(pt) = vol.
    let pt = ConvexBody::point(vec![0.0, 0.0]).unwrap();
    let r = principal_kinematic_check(&sq, &pt, 2, &McConfig::new(300_000, 6)).unwrap();
    assert!((r.rhs.mean - 1.0).abs() < 1e-12);
    assert!(r.pass, "{r:?}");
}

#[test]
fn windows_are_validated() {
    let d = ConvexBody::unit_ball(2);
    let small = MotionMeasure::iso(2).with_window(vec![-1.0, -1.0], vec![1.0, 1.0]);
    assert!(matches!(kinematic_integral(&d, &d, &small, &McConfig::new(10, 0)), Err(Error::InvalidWindow(_))));
    let big = MotionMeasure::iso(2).with_window(vec![-3.0, -3.0], vec![3.0, 3.0]);
    let v = kinematic_integral(&d, &d, &big, &McConfig::new(200_000, 7)).unwrap();
    assert!(v.z_against(4.0 * PI) < 3.0);
}

#[test]
fn motion_invariance_and_swap_symmetry() {
    let tri = ConvexBody::polytope(vec![vec![0.0, 0.0], vec![1.5, 0.0], vec![0.2, 0.9]]).unwrap();
    let e = ConvexBody::ellipsoid(Ellipsoid::from_semi_axes(vec![0.0, 0.0], vec![1.0, 0.4]).unwrap());
    let mc = McConfig::new(200_000, 8);
    let base = kinematic_integral(&tri, &e, &MotionMeasure::iso(2), &mc).unwrap();
    let mut rng = Stream::new(9).rng();
    let g = RigidMotion::random(&mut rng, 2, vec![2.0, -1.0]).unwrap();
    let moved = kinematic_integral(&tri.transformed(&g).unwrap(), &e, &MotionMeasure::iso(2), &mc.child(1)).unwrap();
    assert!(moved.z_score(&base) < 3.0);
    let swapped = kinematic_integral(&e, &tri, &MotionMeasure::iso(2), &mc.child(2)).unwrap();
    assert!(swapped.z_score(&base) < 3.0);
}

#[test]
fn index_set_sizes() {
    assert_eq!(kappa_indices(1).len(), 3);
    assert_eq!(kappa_indices(2).len(), 8);
    let ix = kappa_indices(2);
    assert!(ix.iter().all(|i| i.k1 + i.k2 == 4));
    assert_eq!(ix.iter().filter(|i| i.k1 == 2).count(), 4);
}

#[test]
fn fit_on_the_complex_line_recovers_rigid_constants() {
    // U(1) = SO(2), and U_{k,0} = V_k, so the fit must return C(2,k)/π.
    let sq = ConvexBody::cuboid(&[-0.5, -0.5], &[0.5, 0.5]).unwrap();
    let bodies = vec![
        ConvexBody::unit_ball(2),
        sq.clone(),
        ConvexBody::cuboid(&[-1.0, -0.2], &[1.0, 0.2]).unwrap(),
        ConvexBody::polytope(vec![vec![0.0, 0.0], vec![1.5, 0.0], vec![0.2, 0.9]]).unwrap(),
        ConvexBody::ellipsoid(Ellipsoid::from_semi_axes(vec![0.0, 0.0], vec![1.0, 0.4]).unwrap()),
        ConvexBody::ball(vec![0.0, 0.0], 0.3).unwrap(),
    ];
    let train = vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3), (2, 5)];
    let held = vec![(1, 4), (3, 1), (4, 2)];
    let cfg = FitConfig { valuation_samples: 1, bootstrap: 100, ..FitConfig::default() };
    let fit = fit_hermitian_constants(1, &bodies, &train, &held, &cfg, &McConfig::new(200_000, 10)).unwrap();
    for (c, (s, want)) in fit.constants.iter().zip(fit.constant_stderr.iter().zip(kappa_closed_form(2))) {
        assert!((c - want).abs() < 4.0 * s, "{:?} ± {:?}", fit.constants, fit.constant_stderr);
    }
    assert!(fit.passes(0.05), "{fit:?}");
    let few = fit_hermitian_constants(1, &bodies, &train[..4], &held, &cfg, &McConfig::new(10, 0));
    assert!(few.is_err());
}

