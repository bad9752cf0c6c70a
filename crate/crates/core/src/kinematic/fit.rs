//! Least-squares recovery of the constants in
//! `∫_{IU(m)} χ(Ω₁ ∩ gΩ₂) dg = Σ κ(k₁,k₂,p₁,p₂) U_{k₁,p₁}(Ω₁) U_{k₂,p₂}(Ω₂)`
//! with `k₁ + k₂ = 2m` and both `p` in the basis range.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{derive_kappa, default_ball_radii, kinematic_integral, MotionMeasure};
use crate::bodies::ConvexBody;
use crate::conventions::Conventions;
use crate::error::{Error, Result};
use crate::hermitian::{u_kp, valid_p};
use crate::intrinsic::exact_intrinsic_volumes;
use crate::linalg::{condition_number, gaussian_vector};
use crate::mc::{McConfig, McEstimate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct KappaIndex {
    pub k1: usize,
    pub k2: usize,
    pub p1: usize,
    pub p2: usize,
}

impl KappaIndex {
    pub fn swapped(&self) -> KappaIndex {
        KappaIndex { k1: self.k2, k2: self.k1, p1: self.p2, p2: self.p1 }
    }
}

/// Unknown constants for ℂ^m: eight for m = 2.
pub fn kappa_indices(m: usize) -> Vec<KappaIndex> {
    let mut out = Vec::new();
    for k1 in 0..=2 * m {
        let k2 = 2 * m - k1;
        for p1 in valid_p(m, k1) {
            for p2 in valid_p(m, k2) {
                out.push(KappaIndex { k1, k2, p1, p2 });
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitConfig {
    /// Samples per `U_{k,p}` evaluation (the motion budget comes from the
    /// `McConfig` passed to the fit).
    pub valuation_samples: usize,
    /// Parametric bootstrap replicates for the fit noise.
    pub bootstrap: usize,
    pub max_condition: f64,
    /// Radius pairs for the comparison with the rigid-motion formula.
    pub ball_radii: Vec<(f64, f64)>,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            valuation_samples: 1_000_000,
            bootstrap: 400,
            max_condition: 1e6,
            ball_radii: vec![(1.0, 0.5), (0.8, 1.2), (1.0, 1.0)],
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HeldOut {
    pub pair: (usize, usize),
    pub lhs: McEstimate,
    pub predicted: f64,
    pub predicted_stderr: f64,
    pub relative_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SymmetryDefect {
    pub a: KappaIndex,
    pub b: KappaIndex,
    pub defect: f64,
    /// Bootstrap standard deviation of `κ_a − κ_b`.
    pub noise: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BallCheck {
    pub r: f64,
    pub s: f64,
    pub fitted: f64,
    pub fitted_stderr: f64,
    /// `Σ κ_k V_k(B_r) V_{2m−k}(B_s)` with the rigid-motion constants.
    pub rigid: f64,
    pub z: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct KinematicFit {
    pub m: usize,
    pub indices: Vec<KappaIndex>,
    pub constants: Vec<f64>,
    pub constant_stderr: Vec<f64>,
    /// Condition number of the row-weighted, column-normalized design.
    pub condition: f64,
    pub design: Vec<Vec<f64>>,
    pub training: Vec<HeldOut>,
    pub held_out: Vec<HeldOut>,
    pub max_held_out_residual: f64,
    pub symmetry: Vec<SymmetryDefect>,
    pub ball_checks: Vec<BallCheck>,
    pub motion_samples: usize,
    pub valuation_samples: usize,
    pub conventions: Conventions,
}

impl KinematicFit {
    /// Symmetric constants agree within three bootstrap deviations.
    pub fn symmetric(&self) -> bool {
        self.symmetry.iter().all(|d| d.defect <= 3.0 * d.noise)
    }

    pub fn balls_agree(&self) -> bool {
        self.ball_checks.iter().all(|b| b.z < 3.0)
    }

    pub fn passes(&self, held_out_tol: f64) -> bool {
        self.max_held_out_residual < held_out_tol && self.symmetric() && self.balls_agree()
    }

    /// Prediction for a pair given the `U_{k,p}` values of both bodies,
    /// listed in `valid_p` order for each degree.
    pub fn predict(&self, u1: &[Vec<f64>], u2: &[Vec<f64>]) -> f64 {
        self.indices.iter().zip(&self.constants).map(|(ix, c)| c * u1[ix.k1][ix.p1] * u2[ix.k2][ix.p2]).sum()
    }
}

/// `U_{k,p}(K)` for every degree and every basis `p`.
fn basis_values(k: &ConvexBody, m: usize, mc: &McConfig) -> Result<Vec<Vec<McEstimate>>> {
    (0..=2 * m)
        .map(|deg| {
            valid_p(m, deg)
                .into_iter()
                .map(|p| u_kp(k, m, deg, p, &mc.child((deg * 16 + p) as u64)))
                .collect::<Result<Vec<_>>>()
        })
        .collect()
}

fn design_row(ix: &[KappaIndex], u1: &[Vec<f64>], u2: &[Vec<f64>]) -> Vec<f64> {
    ix.iter().map(|i| u1[i.k1][i.p1] * u2[i.k2][i.p2]).collect()
}

fn means(v: &[Vec<McEstimate>]) -> Vec<Vec<f64>> {
    v.iter().map(|r| r.iter().map(|e| e.mean).collect()).collect()
}

fn perturbed(v: &[Vec<McEstimate>], rng: &mut crate::mc::McRng) -> Vec<Vec<f64>> {
    v.iter()
        .map(|r| {
            let z = gaussian_vector(rng, r.len());
            r.iter().zip(z).map(|(e, g)| e.mean + e.stderr * g).collect()
        })
        .collect()
}

fn std_dev(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Row-weighted least squares with columns normalized; returns the solution
/// and the condition number of the normalized system.
fn solve(rows: &[Vec<f64>], rhs: &[f64], weights: &[f64], max_cond: f64) -> Result<(Vec<f64>, f64)> {
    let (r, c) = (rows.len(), rows[0].len());
    let mut a = DMatrix::from_fn(r, c, |i, j| rows[i][j] * weights[i]);
    let mut scale = vec![0.0; c];
    for j in 0..c {
        scale[j] = a.column(j).norm();
        if scale[j] == 0.0 {
            return Err(Error::Singular(format!("design column {j} vanishes on every training pair")));
        }
        a.column_mut(j).scale_mut(1.0 / scale[j]);
    }
    let cond = condition_number(&a);
    if !cond.is_finite() || cond > max_cond {
        return Err(Error::IllConditioned { condition: cond });
    }
    let b = DVector::from_iterator(r, rhs.iter().zip(weights).map(|(y, w)| y * w));
    let x = a.svd(true, true).solve(&b, 0.0).map_err(|e| Error::Singular(e.to_string()))?;
    Ok(((0..c).map(|j| x[j] / scale[j]).collect(), cond))
}

/// Fits the unitary kinematic constants on ℂ^m from sampled kinematic
/// integrals over `train` pairs (indices into `bodies`) and validates them on
/// `held_out`. `mc.samples` is the motion budget per pair.
///
/// Rows are weighted by `1/lhs`, so the fit minimizes relative error.
/// Uncertainties come from a parametric bootstrap that redraws every
/// sampled input from its reported error and refits.
pub fn fit_hermitian_constants(
    m: usize,
    bodies: &[ConvexBody],
    train: &[(usize, usize)],
    held_out: &[(usize, usize)],
    cfg: &FitConfig,
    mc: &McConfig,
) -> Result<KinematicFit> {
    let ix = kappa_indices(m);
    if train.len() < 2 * ix.len() {
        return Err(Error::InvalidArgument(format!(
            "{} unknowns need at least {} training pairs, got {}",
            ix.len(),
            2 * ix.len(),
            train.len()
        )));
    }
    if held_out.len() < 3 {
        return Err(Error::InvalidArgument("at least three held-out pairs are required".into()));
    }
    for pair in train.iter().chain(held_out) {
        if pair.0 >= bodies.len() || pair.1 >= bodies.len() {
            return Err(Error::InvalidArgument(format!("pair {pair:?} refers to a missing body")));
        }
    }
    if let Some(p) = held_out.iter().find(|p| train.contains(p)) {
        return Err(Error::InvalidArgument(format!("held-out pair {p:?} is also a training pair")));
    }
    for b in bodies {
        crate::error::check_dim(2 * m, b.dim())?;
    }

    let vmc = mc.with_samples(cfg.valuation_samples);
    let values = bodies
        .iter()
        .enumerate()
        .map(|(i, b)| basis_values(b, m, &vmc.child(1).child(i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let measure = MotionMeasure::iu(m);
    let lhs_of = |&(i, j): &(usize, usize)| {
        kinematic_integral(&bodies[i], &bodies[j], &measure, &mc.child(2).child((i * 65_536 + j) as u64))
    };
    let train_lhs = train.iter().map(lhs_of).collect::<Result<Vec<_>>>()?;
    let test_lhs = held_out.iter().map(lhs_of).collect::<Result<Vec<_>>>()?;

    let mean_vals: Vec<Vec<Vec<f64>>> = values.iter().map(|v| means(v)).collect();
    let rows: Vec<Vec<f64>> = train.iter().map(|&(i, j)| design_row(&ix, &mean_vals[i], &mean_vals[j])).collect();
    let y: Vec<f64> = train_lhs.iter().map(|e| e.mean).collect();
    let weights: Vec<f64> = y.iter().map(|v| 1.0 / v.abs().max(1e-300)).collect();
    let (kappa, condition) = solve(&rows, &y, &weights, cfg.max_condition)?;

    let balls: Vec<(Vec<Vec<McEstimate>>, Vec<Vec<McEstimate>>)> = cfg
        .ball_radii
        .iter()
        .enumerate()
        .map(|(b, &(r, s))| {
            let bm = vmc.child(4).child(b as u64);
            Ok((
                basis_values(&ConvexBody::ball(vec![0.0; 2 * m], r)?, m, &bm.child(0))?,
                basis_values(&ConvexBody::ball(vec![0.0; 2 * m], s)?, m, &bm.child(1))?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    // Parametric bootstrap.
    let mut rng = mc.stream.child(3).rng();
    let reps = cfg.bootstrap.max(2);
    let mut kappa_reps = Vec::with_capacity(reps);
    let mut test_reps = vec![Vec::with_capacity(reps); held_out.len()];
    let mut ball_reps = vec![Vec::with_capacity(reps); balls.len()];
    for _ in 0..reps {
        let vals: Vec<Vec<Vec<f64>>> = values.iter().map(|v| perturbed(v, &mut rng)).collect();
        let rows_b: Vec<Vec<f64>> = train.iter().map(|&(i, j)| design_row(&ix, &vals[i], &vals[j])).collect();
        let yb: Vec<f64> =
            train_lhs.iter().zip(gaussian_vector(&mut rng, train_lhs.len())).map(|(e, g)| e.mean + e.stderr * g).collect();
        let (kb, _) = solve(&rows_b, &yb, &weights, f64::INFINITY)?;
        for (t, &(i, j)) in held_out.iter().enumerate() {
            let row = design_row(&ix, &vals[i], &vals[j]);
            test_reps[t].push(row.iter().zip(&kb).map(|(a, b)| a * b).sum::<f64>());
        }
        for (b, (ur, us)) in balls.iter().enumerate() {
            let row = design_row(&ix, &perturbed(ur, &mut rng), &perturbed(us, &mut rng));
            ball_reps[b].push(row.iter().zip(&kb).map(|(a, b)| a * b).sum::<f64>());
        }
        kappa_reps.push(kb);
    }
    let constant_stderr: Vec<f64> =
        (0..ix.len()).map(|c| std_dev(&kappa_reps.iter().map(|k| k[c]).collect::<Vec<_>>())).collect();

    let record = |pair: (usize, usize), lhs: McEstimate, sd: f64| {
        let row = design_row(&ix, &mean_vals[pair.0], &mean_vals[pair.1]);
        let predicted: f64 = row.iter().zip(&kappa).map(|(a, b)| a * b).sum();
        HeldOut { pair, lhs, predicted, predicted_stderr: sd, relative_residual: ((predicted - lhs.mean) / lhs.mean).abs() }
    };
    let training: Vec<HeldOut> = train.iter().zip(&train_lhs).map(|(&p, &l)| record(p, l, f64::NAN)).collect();
    let held: Vec<HeldOut> =
        held_out.iter().zip(&test_lhs).zip(&test_reps).map(|((&p, &l), r)| record(p, l, std_dev(r))).collect();
    let max_held_out_residual = held.iter().map(|h| h.relative_residual).fold(0.0, f64::max);

    let mut symmetry = Vec::new();
    for (a, ia) in ix.iter().enumerate() {
        let sw = ia.swapped();
        if let Some(b) = ix.iter().position(|x| *x == sw) {
            if b > a {
                let diffs: Vec<f64> = kappa_reps.iter().map(|k| k[a] - k[b]).collect();
                symmetry.push(SymmetryDefect { a: *ia, b: sw, defect: (kappa[a] - kappa[b]).abs(), noise: std_dev(&diffs) });
            }
        }
    }

    let n = 2 * m;
    let rigid = derive_kappa(n, &default_ball_radii(n))?;
    let ball_checks = cfg
        .ball_radii
        .iter()
        .zip(&balls)
        .zip(&ball_reps)
        .map(|((&(r, s), (ur, us)), reps)| {
            let row = design_row(&ix, &means(ur), &means(us));
            let fitted: f64 = row.iter().zip(&kappa).map(|(a, b)| a * b).sum();
            let vr = exact_intrinsic_volumes(&ConvexBody::ball(vec![0.0; n], r)?)?;
            let vs = exact_intrinsic_volumes(&ConvexBody::ball(vec![0.0; n], s)?)?;
            let rigid_rhs: f64 = (0..=n).map(|k| rigid.kappa[k] * vr[k] * vs[n - k]).sum();
            let sd = std_dev(reps);
            Ok(BallCheck { r, s, fitted, fitted_stderr: sd, rigid: rigid_rhs, z: (fitted - rigid_rhs).abs() / sd })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(KinematicFit {
        m,
        indices: ix,
        constants: kappa,
        constant_stderr,
        condition,
        design: rows,
        training,
        held_out: held,
        max_held_out_residual,
        symmetry,
        ball_checks,
        motion_samples: mc.samples,
        valuation_samples: cfg.valuation_samples,
        conventions: Conventions::default(),
    })
}

/// Bodies in ℂ² that break unitary symmetry in different ways, with a
/// training and a held-out pair list.
pub fn default_pairs() -> Result<(Vec<ConvexBody>, Vec<(usize, usize)>, Vec<(usize, usize)>)> {
    let seg = |a: f64| ConvexBody::cuboid(&[-a], &[a]);
    let disk = |r: f64| ConvexBody::ball(vec![0.0, 0.0], r);
    let tri = ConvexBody::polytope(vec![vec![-0.6, -0.4], vec![0.7, -0.3], vec![0.0, 0.6]])?;
    let bodies = vec![
        ConvexBody::unit_ball(4),
        ConvexBody::cuboid(&[-0.5; 4], &[0.5; 4])?,
        ConvexBody::product(vec![disk(1.0)?, ConvexBody::cuboid(&[-0.5, -0.5], &[0.5, 0.5])?])?,
        ConvexBody::product(vec![disk(1.0)?, disk(0.4)?])?,
        ConvexBody::cuboid(&[-1.0, -0.15, -0.5, -0.5], &[1.0, 0.15, 0.5, 0.5])?,
        ConvexBody::cuboid(&[-1.0, -0.5, -0.15, -0.5], &[1.0, 0.5, 0.15, 0.5])?,
        ConvexBody::product(vec![seg(0.8)?, disk(0.6)?, seg(0.2)?])?,
        ConvexBody::product(vec![tri.clone(), disk(0.7)?])?,
        ConvexBody::ball(vec![0.0; 4], 0.5)?,
        ConvexBody::product(vec![seg(1.2)?, seg(0.1)?, tri])?,
    ];
    let train = vec![
        (0, 1), (0, 2), (1, 3), (2, 4), (3, 5), (4, 6), (5, 7), (6, 8), (7, 9), (9, 0),
        (1, 6), (2, 7), (3, 8), (4, 9), (5, 1), (8, 2), (6, 3), (7, 4), (9, 5), (2, 2),
    ];
    let held_out = vec![(1, 2), (3, 9), (8, 5), (6, 7)];
    Ok((bodies, train, held_out))
}
