//! Fast checks with closed-form answers.

use serde::Serialize;

use vallab::bodies::{ConvexBody, VolumeMethod};
use vallab::hermitian::u_kp;
use vallab::intrinsic::{exact_intrinsic_volumes, intrinsic_volume_with, lefschetz_check, IntrinsicRoute, LambdaSchedule};
use vallab::kinematic::{default_ball_radii, derive_kappa, kappa_closed_form};
use vallab::linalg::unit_ball_volume;
use vallab::valgebra::{hadwiger_decompose, hadwiger_synthesize, Valuation, Volume};
use vallab::{McConfig, Result};

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn check(name: &'static str, expected: f64, tolerance: f64, got: Result<f64>) -> Check {
    match got {
        Ok(value) => {
            let pass = (value - expected).abs() <= tolerance;
            Check { name, value, expected, tolerance, pass, error: None }
        }
        Err(e) => Check { name, value: f64::NAN, expected, tolerance, pass: false, error: Some(e.to_string()) },
    }
}

pub fn run(seed: u64, samples: usize) -> Vec<Check> {
    let mc = McConfig::new(samples, seed);
    let mut out = Vec::new();
    for n in 1..=3 {
        let b = ConvexBody::unit_ball(n);
        let names = ["ball_v0_line", "ball_v0_plane", "ball_v0_space"];
        // Every V_i of the unit ball equals ω_n.
        out.push(check(names[n - 1], unit_ball_volume(n), 1e-9, exact_intrinsic_volumes(&b).map(|v| v[0])));
    }
    let names = ["ball_vn_line", "ball_vn_plane", "ball_vn_space"];
    for n in 1..=3 {
        let b = ConvexBody::unit_ball(n);
        out.push(check(names[n - 1], unit_ball_volume(n), 1e-9, exact_intrinsic_volumes(&b).map(|v| v[n])));
    }
    out.push(check("cube_volume", 1.0, 1e-12, exact_intrinsic_volumes(&ConvexBody::unit_cube(3)).map(|v| v[3])));
    out.push(check("square_v1", 2.0, 1e-12, exact_intrinsic_volumes(&ConvexBody::unit_cube(2)).map(|v| v[1])));

    // Sampled volume of the unit square with a 5σ-sized allowance.
    let sq = ConvexBody::unit_cube(2);
    let r = Volume { method: VolumeMethod::MonteCarlo }.evaluate(&sq, &mc.child(1));
    let tol = r.as_ref().map(|e| (5.0 * e.stderr).max(1e-8)).unwrap_or(0.0);
    out.push(check("square_volume_mc", 1.0, tol, r.map(|e| e.mean)));

    let r = intrinsic_volume_with(&sq, 1, IntrinsicRoute::Steiner(VolumeMethod::Exact), &mc);
    out.push(check("square_v1_steiner_exact", 2.0, 1e-8, r.map(|e| e.mean)));

    let phi = hadwiger_synthesize(&[0.5, -1.0, 2.0]);
    let r = hadwiger_decompose(&phi, 2, None, &mc.child(2));
    out.push(check("hadwiger_round_trip_v2", 2.0, 1e-6, r.map(|f| f.coeffs[2])));

    let r = derive_kappa(3, &default_ball_radii(3));
    let want = kappa_closed_form(3)[1];
    out.push(check("kappa_3_1", want, 1e-10 * want, r.map(|t| t.kappa[1])));

    let r = lefschetz_check(4, LambdaSchedule::default(), 1e-9);
    out.push(check("lefschetz_n4", 1.0, 0.0, r.map(|l| if l.holds { 1.0 } else { 0.0 })));

    let b4 = ConvexBody::unit_ball(4);
    let r = u_kp(&b4, 2, 2, 0, &mc.child(3));
    out.push(check("u20_is_v2", unit_ball_volume(4), 1e-9, r.map(|e| e.mean)));
    out
}
