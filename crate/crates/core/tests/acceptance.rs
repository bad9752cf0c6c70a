//! Acceptance suite. Runs every criterion at its stated scale and prints one
//! `PASS`/`FAIL` line per criterion; exits nonzero if any fails.
//!
//! `cargo test --release -p vallab-core --test acceptance`

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vallab::bodies::{ConvexBody, Ellipsoid, VolumeMethod};
use vallab::hermitian::{basis_rank, default_family, u_kp};
use vallab::intrinsic::{
    curvature_intrinsic_volumes, exact_intrinsic_volumes, intrinsic_volume_with, lambda_apply, lefschetz_check,
    steiner_fit, CurvatureBoundary, IntrinsicRoute, IntrinsicVolume, LambdaSchedule,
};
use vallab::kinematic::{
    default_ball_radii, default_pairs, derive_kappa, fit_hermitian_constants, kinematic_integral,
    principal_kinematic_check, FitConfig, MotionMeasure,
};
use vallab::linalg::unit_ball_volume;
use vallab::valgebra::{
    check_additivity, hadwiger_decompose, hadwiger_synthesize, homogeneous_components, valuation_product, GRep,
    Polynomial, ProductConfig, Volume,
};
use vallab::{McConfig, Result};

const MILLION: usize = 1_000_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

fn ball_identity() -> Result<Outcome> {
    let mut worst_curv: f64 = 0.0;
    let mut worst_z: f64 = 0.0;
    let mut slow = 0.0f64;
    for n in 1..=3 {
        let t = Instant::now();
        let boundary = match n {
            1 => CurvatureBoundary::segment(1.0),
            2 => CurvatureBoundary::circle(1.0),
            _ => CurvatureBoundary::sphere(1.0),
        };
        let w = unit_ball_volume(n);
        for v in curvature_intrinsic_volumes(&boundary)? {
            worst_curv = worst_curv.max((v - w).abs());
        }
        let fit = steiner_fit(&ConvexBody::unit_ball(n), None, VolumeMethod::MonteCarlo, &McConfig::new(MILLION, 100 + n as u64))?;
        for i in 0..=n {
            worst_z = worst_z.max(fit.intrinsic_volume(i).z_against(w));
        }
        slow = slow.max(t.elapsed().as_secs_f64());
    }
    outcome(
        worst_curv < 1e-6 && worst_z < 3.0 && slow < 60.0,
        format!("curvature max err {worst_curv:.1e}, Steiner max z {worst_z:.2}, slowest body {slow:.1}s"),
    )
}

fn two_routes() -> Result<Outcome> {
    let t = Instant::now();
    let cases = [
        (
            ConvexBody::ellipsoid(Ellipsoid::from_semi_axes(vec![0.0, 0.0], vec![2.0, 1.0])?),
            CurvatureBoundary::ellipse(2.0, 1.0),
        ),
        (
            ConvexBody::ellipsoid(Ellipsoid::from_semi_axes(vec![0.0; 3], vec![1.0, 1.0, 2.0])?),
            CurvatureBoundary::ellipsoid(1.0, 1.0, 2.0),
        ),
    ];
    let mut worst: f64 = 0.0;
    for (j, (body, boundary)) in cases.iter().enumerate() {
        let curv = curvature_intrinsic_volumes(boundary)?;
        let fit = steiner_fit(body, None, VolumeMethod::radial_default(), &McConfig::new(0, 200 + j as u64))?;
        for (i, c) in curv.iter().enumerate() {
            worst = worst.max(((fit.intrinsic_volume(i).mean - c) / c).abs());
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(worst < 1e-3 && secs < 120.0, format!("max relative difference {worst:.2e} in {secs:.1}s"))
}

/// Two boxes sharing a facet: split a random box along a random axis.
fn abutting_boxes(rng: &mut ChaCha8Rng, n: usize) -> Result<(ConvexBody, ConvexBody)> {
    let lo: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let hi: Vec<f64> = lo.iter().map(|l| l + rng.random_range(0.3..1.5)).collect();
    let axis = rng.random_range(0..n);
    let cut = lo[axis] + rng.random_range(0.2..0.8) * (hi[axis] - lo[axis]);
    let mut hi1 = hi.clone();
    hi1[axis] = cut;
    let mut lo2 = lo.clone();
    lo2[axis] = cut;
    Ok((ConvexBody::cuboid(&lo, &hi1)?, ConvexBody::cuboid(&lo2, &hi)?))
}

fn additivity() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(300);
    let vol = Volume { method: VolumeMethod::MonteCarlo };
    let v1 = IntrinsicVolume { i: 1, route: IntrinsicRoute::Steiner(VolumeMethod::MonteCarlo) };
    let quad = GRep::zero(2)
        .with_term(Polynomial::power(2, 0, 2, 1.0).with_term(vec![0, 1], 0.5), ConvexBody::unit_ball(2))?;
    let mut worst = [0.0f64; 3];
    for pair in 0..20 {
        let (a, b) = abutting_boxes(&mut rng, 2)?;
        let mc = McConfig::new(200_000, 1000 + pair);
        let z = [
            check_additivity(&vol, &a, &b, &mc.child(0))?.z,
            check_additivity(&v1, &a, &b, &mc.child(1))?.z,
            check_additivity(&quad, &a, &b, &mc.child(2))?.z,
        ];
        for (w, z) in worst.iter_mut().zip(z) {
            *w = w.max(z);
        }
    }
    outcome(
        worst.iter().all(|z| *z < 3.0),
        format!("max z over 20 pairs: vol {:.2}, V_1 {:.2}, quadratic density {:.2}", worst[0], worst[1], worst[2]),
    )
}

fn grading() -> Result<Outcome> {
    let g = GRep::parallel_volume(2);
    let lambdas = [0.5, 1.0, 1.5, 2.0, 2.5];
    let cases = [(ConvexBody::unit_cube(2), [PI, 4.0, 1.0]), (ConvexBody::unit_ball(2), [PI, 2.0 * PI, PI])];
    let mut worst: f64 = 0.0;
    for (j, (k, want)) in cases.iter().enumerate() {
        let comps = homogeneous_components(&g, k, &lambdas, &McConfig::new(MILLION, 400 + j as u64))?;
        for (c, w) in comps.iter().zip(want) {
            worst = worst.max(c.z_against(*w));
        }
    }
    outcome(worst < 3.0, format!("max z of components {worst:.2}"))
}

fn hadwiger_round_trip() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let mut worst_coeff: f64 = 0.0;
    let mut worst_cube: f64 = 0.0;
    for n in [2, 3] {
        for _ in 0..5 {
            let a: Vec<f64> = (0..=n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let fit = hadwiger_decompose(&hadwiger_synthesize(&a), n, None, &McConfig::new(1, 0))?;
            for (x, y) in fit.coeffs.iter().zip(&a) {
                worst_coeff = worst_coeff.max((x - y).abs());
            }
            worst_cube = worst_cube.max(fit.residual);
        }
    }
    outcome(
        worst_coeff < 1e-6 && worst_cube < 1e-6,
        format!("max coefficient error {worst_coeff:.1e}, held-out cube residual {worst_cube:.1e}"),
    )
}

fn product_ratio() -> Result<Outcome> {
    let t = Instant::now();
    let v1 = GRep::plane_v1();
    let bodies = [
        ConvexBody::unit_cube(2),
        ConvexBody::unit_ball(2),
        ConvexBody::polytope(vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.5, 1.5]])?,
    ];
    let mut ratios = Vec::new();
    for (j, k) in bodies.iter().enumerate() {
        let p = valuation_product(&v1, &v1, k, &ProductConfig::default(), &McConfig::new(MILLION, 600 + j as u64))?;
        ratios.push(p.mean / k.exact_volume()?);
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let spread = (hi - lo) / mean.abs();
    let secs = t.elapsed().as_secs_f64();
    outcome(
        spread < 0.05 && secs < 600.0,
        format!("ratios {ratios:.4?}, spread {:.2}% in {secs:.1}s", 100.0 * spread),
    )
}

fn lambda_and_lefschetz() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for k in [
        ConvexBody::unit_cube(2),
        ConvexBody::unit_ball(2),
        ConvexBody::polytope(vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.5, 1.5]])?,
        ConvexBody::ellipsoid(Ellipsoid::from_semi_axes(vec![0.0, 0.0], vec![2.0, 1.0])?),
    ] {
        let r = lambda_apply(&IntrinsicVolume::exact(2), &k, LambdaSchedule::default(), &McConfig::new(1, 0))?;
        let v1 = exact_intrinsic_volumes(&k)?[1];
        worst = worst.max((r.value - 2.0 * v1).abs() / (2.0 * v1));
    }
    let mut lefschetz = true;
    let mut min_shift = f64::INFINITY;
    for n in 1..=4 {
        let r = lefschetz_check(n, LambdaSchedule::default(), 1e-6)?;
        lefschetz &= r.holds && r.entries.iter().all(|e| e.value.abs() > 1e-6);
        min_shift = r.shift.iter().fold(min_shift, |m, s| m.min(s.abs()));
    }
    outcome(
        worst < 1e-3 && lefschetz && min_shift > 1e-6,
        format!("max relative error of ΛV_2 vs 2V_1 {worst:.1e}; smallest shift entry {min_shift:.4}; Lefschetz n≤4 {lefschetz}"),
    )
}

fn ukp_identities() -> Result<Outcome> {
    let bodies = [ConvexBody::unit_ball(4), ConvexBody::unit_cube(4), ConvexBody::cuboid(&[0.0; 4], &[2.0, 0.25, 1.0, 1.0])?];
    let mut exact = true;
    for k in &bodies {
        let v = exact_intrinsic_volumes(k)?;
        for (deg, vk) in v.iter().enumerate() {
            let u = u_kp(k, 2, deg, 0, &McConfig::new(10, 0))?;
            exact &= u.mean == *vk && u.stderr == 0.0;
        }
    }
    let mut ball_z: f64 = 0.0;
    for (j, r) in [1.0, 0.7].into_iter().enumerate() {
        let b = ConvexBody::ball(vec![0.0; 4], r)?;
        let u = u_kp(&b, 2, 2, 1, &McConfig::new(200_000, 800 + j as u64))?;
        ball_z = ball_z.max(u.z_against(PI * PI * r * r));
    }
    let base = ConvexBody::cuboid(&[0.0; 4], &[1.0, 0.5, 1.0, 0.75])?;
    let big = base.scaled(2.0)?;
    let mut hom_z: f64 = 0.0;
    for (deg, p) in [(2, 1), (3, 1)] {
        let mc = McConfig::new(200_000, 810 + deg as u64);
        let a = u_kp(&base, 2, deg, p, &mc)?;
        let b = u_kp(&big, 2, deg, p, &mc.child(1))?;
        hom_z = hom_z.max(b.z_score(&a.scale(2f64.powi(deg as i32))));
    }
    outcome(
        exact && ball_z < 3.0 && hom_z < 3.0,
        format!("U_k0 = V_k exact: {exact}; ball z {ball_z:.2}; homogeneity z {hom_z:.2}"),
    )
}

fn dimension_counts() -> Result<Outcome> {
    let t = Instant::now();
    let family = default_family(2)?;
    let mut ranks = Vec::new();
    let mut ok = true;
    for k in 0..=4 {
        let r = basis_rank(k, 2, &family, &McConfig::new(MILLION, 900 + k as u64))?;
        ok &= r.rank == r.expected;
        ranks.push(r.rank);
    }
    ok &= ranks == [1, 1, 2, 1, 1];
    outcome(ok, format!("ranks {ranks:?} in {:.1}s", t.elapsed().as_secs_f64()))
}

fn principal_kinematic() -> Result<Outcome> {
    let mut residual: f64 = 0.0;
    for n in 1..=6 {
        residual = residual.max(derive_kappa(n, &default_ball_radii(n))?.residual);
    }
    let mut detail = format!("κ residual {residual:.1e}");
    let mut ok = residual < 1e-10;
    let cases = [
        ("square/disk", ConvexBody::unit_cube(2), ConvexBody::ball(vec![0.2, 0.1], 0.6)?, 2),
        ("cube/ball", ConvexBody::unit_cube(3), ConvexBody::ball(vec![0.0, 0.3, 0.0], 0.5)?, 3),
    ];
    for (j, (name, a, b, n)) in cases.iter().enumerate() {
        let t = Instant::now();
        let r = principal_kinematic_check(a, b, *n, &McConfig::new(MILLION, 1100 + j as u64))?;
        let secs = t.elapsed().as_secs_f64();
        ok &= r.pass && r.z < 3.0 && secs < 600.0;
        detail += &format!("; {name} z {:.2} ({secs:.1}s)", r.z);
    }
    outcome(ok, detail)
}

fn hermitian_fit() -> Result<Outcome> {
    let t = Instant::now();
    let (bodies, train, held) = default_pairs()?;
    let cfg = FitConfig { valuation_samples: MILLION, ..FitConfig::default() };
    let fit = fit_hermitian_constants(2, &bodies, &train, &held, &cfg, &McConfig::new(MILLION, 1200))?;
    let secs = t.elapsed().as_secs_f64();
    let max_ball_z = fit.ball_checks.iter().map(|b| b.z).fold(0.0, f64::max);
    let worst_sym = fit.symmetry.iter().map(|s| s.defect / s.noise).fold(0.0, f64::max);
    outcome(
        fit.max_held_out_residual < 0.05 && fit.symmetric() && fit.balls_agree() && secs < 3600.0,
        format!(
            "held-out max relative residual {:.2}%, symmetry defect/noise ≤ {worst_sym:.2}, ball max z {max_ball_z:.2}, condition {:.0}, {secs:.0}s",
            100.0 * fit.max_held_out_residual,
            fit.condition
        ),
    )
}

fn determinism() -> Result<Outcome> {
    let run = || -> Result<Vec<f64>> {
        let d = ConvexBody::ball(vec![0.2, 0.1], 0.6)?;
        let mc = McConfig::new(50_000, 77);
        Ok(vec![
            kinematic_integral(&ConvexBody::unit_cube(2), &d, &MotionMeasure::iso(2), &mc)?.mean,
            steiner_fit(&d, None, VolumeMethod::MonteCarlo, &mc)?.coeffs[1].mean,
            u_kp(&ConvexBody::unit_cube(4), 2, 2, 1, &mc)?.mean,
            intrinsic_volume_with(&d, 1, IntrinsicRoute::Steiner(VolumeMethod::radial_default()), &mc)?.mean,
        ])
    };
    let pool = |t: usize| rayon::ThreadPoolBuilder::new().num_threads(t).build().expect("thread pool");
    let a = pool(1).install(run)?;
    let b = pool(1).install(run)?;
    let c = pool(3).install(run)?;
    let same = a.iter().zip(&b).chain(a.iter().zip(&c)).all(|(x, y)| x.to_bits() == y.to_bits());
    outcome(same, format!("{} estimators bit-identical across repeats and thread counts: {same}", a.len()))
}

type Criterion = (&'static str, fn() -> Result<Outcome>);

fn main() {
    let criteria: [Criterion; 12] = [
        ("ball identity", ball_identity),
        ("two-route agreement", two_routes),
        ("additivity", additivity),
        ("grading", grading),
        ("Hadwiger round trip", hadwiger_round_trip),
        ("algebra structure", product_ratio),
        ("Λ and Lefschetz", lambda_and_lefschetz),
        ("U_{k,p} identities", ukp_identities),
        ("dimension counts", dimension_counts),
        ("principal kinematic formula", principal_kinematic),
        ("Hermitian fit", hermitian_fit),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let t = Instant::now();
        let (pass, detail) = match f() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!("{} {name}: {detail} [{:.1}s]", if pass { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
