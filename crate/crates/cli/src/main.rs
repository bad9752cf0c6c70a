//! `vallab`: command-line front end.
//!
//! Every command prints (or writes to `--out`) one JSON document holding the
//! result, the seed, and the normalization conventions. Malformed input
//! exits with status 2, numerical failures with status 3.

mod io;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use vallab::bodies::VolumeMethod;
use vallab::hermitian::{basis_rank, default_family, u_kp};
use vallab::intrinsic::{intrinsic_volume_with, steiner_fit, IntrinsicRoute};
use vallab::kinematic::{
    default_ball_radii, default_pairs, derive_kappa, fit_hermitian_constants, kinematic_integral,
    principal_kinematic_check, FitConfig, MotionMeasure,
};
use vallab::valgebra::{hadwiger_decompose, hadwiger_synthesize, valuation_product, ProductConfig};
use vallab::McConfig;

use io::{read_body, read_grep, read_pairs, CliError, Output};

#[derive(Parser, Debug)]
#[command(name = "vallab", version, about = "Monte Carlo experiments with valuations on convex bodies")]
struct Cli {
    /// Master seed; every random stream derives from it.
    #[arg(long, global = true, env = "VALLAB_SEED")]
    seed: Option<u64>,

    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Monte Carlo sample count, e.g. `1e6` (the default depends on the command).
    #[arg(long, global = true, value_parser = parse_samples)]
    samples: Option<usize>,

    /// Also write the main table as CSV.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Intrinsic volume `V_i` of a body.
    Intrinsic(IntrinsicArgs),
    /// Steiner polynomial fit of `vol(K + εD)`.
    Steiner(SteinerArgs),
    /// Coordinates of a valuation in the basis `V_0 .. V_n`.
    Hadwiger(HadwigerArgs),
    /// Product of two valuations given by representatives, evaluated on a body.
    Product(ProductArgs),
    /// `U_{k,p}` of a body in ℂ^m.
    Ukp(UkpArgs),
    /// Unitarily invariant valuations.
    #[command(subcommand)]
    Hermitian(HermitianCommand),
    /// Kinematic integrals and formulas.
    #[command(subcommand)]
    Kinematic(KinematicCommand),
    /// Fit the unitary kinematic constants in ℂ².
    FitHermitian(FitArgs),
    /// Run the quick self-consistency checks.
    Selftest(SelftestArgs),
}

/// Sample counts accept scientific notation such as `1e6`.
fn parse_samples(s: &str) -> Result<usize, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("not a number: {s}"))?;
    if !(v >= 1.0) || v.fract() != 0.0 || v > 1e12 {
        return Err(format!("sample count must be a positive integer, got {s}"));
    }
    Ok(v as usize)
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Route {
    Auto,
    Exact,
    Steiner,
    Radial,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Exact,
    Mc,
    Radial,
}

impl Method {
    fn volume(self) -> VolumeMethod {
        match self {
            Method::Exact => VolumeMethod::Exact,
            Method::Mc => VolumeMethod::MonteCarlo,
            Method::Radial => VolumeMethod::radial_default(),
        }
    }
}

#[derive(Args, Debug)]
struct IntrinsicArgs {
    #[arg(long)]
    body: PathBuf,
    #[arg(long)]
    i: usize,
    #[arg(long, value_enum, default_value = "auto")]
    route: Route,
}

#[derive(Args, Debug)]
struct SteinerArgs {
    #[arg(long)]
    body: PathBuf,
    /// Comma-separated radii (default: 0.1·j·diameter).
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "mc")]
    method: Method,
}

#[derive(Args, Debug)]
struct HadwigerArgs {
    /// Representative JSON of the valuation to decompose.
    #[arg(long, conflicts_with = "coeffs")]
    valuation: Option<PathBuf>,
    /// Synthesize `Σ a_i V_i` from these coefficients and decompose it back.
    #[arg(long, value_delimiter = ',')]
    coeffs: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
struct ProductArgs {
    #[arg(long)]
    phi: PathBuf,
    #[arg(long)]
    psi: PathBuf,
    #[arg(long)]
    body: PathBuf,
    /// Permit dimensions above 2 (the diagonal sampler grows costly).
    #[arg(long)]
    allow_high_dim: bool,
}

#[derive(Args, Debug)]
struct UkpArgs {
    #[arg(long)]
    body: PathBuf,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    p: usize,
}

#[derive(Subcommand, Debug)]
enum HermitianCommand {
    /// `U_{k,p}` of a body in ℂ^m.
    Ukp(UkpArgs),
    /// Numerical rank of the `U_{k,p}` evaluation matrix over a body family.
    Rank(RankArgs),
}

#[derive(Args, Debug)]
struct RankArgs {
    #[arg(long, default_value_t = 2)]
    m: usize,
    /// Degree; all degrees `0..=2m` when omitted.
    #[arg(long)]
    k: Option<usize>,
    /// Body files (default: a built-in family).
    #[arg(long, value_delimiter = ',')]
    bodies: Option<Vec<PathBuf>>,
}

#[derive(Subcommand, Debug)]
enum KinematicCommand {
    /// Principal kinematic formula for rigid motions.
    Check(CheckArgs),
    /// `∫ χ(Ω₁ ∩ gΩ₂) dg` alone.
    Integral(IntegralArgs),
    /// Constants `κ_k` from the ball system.
    Kappa(KappaArgs),
    /// Fit the unitary kinematic constants in ℂ².
    FitHermitian(FitArgs),
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    omega1: PathBuf,
    #[arg(long)]
    omega2: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Group {
    Iso,
    Iu,
}

#[derive(Args, Debug)]
struct IntegralArgs {
    #[arg(long)]
    omega1: PathBuf,
    #[arg(long)]
    omega2: PathBuf,
    #[arg(long, value_enum, default_value = "iso")]
    group: Group,
}

#[derive(Args, Debug)]
struct KappaArgs {
    #[arg(long)]
    n: usize,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// `{"bodies": [...], "train": [[i, j], ...], "held_out": [[i, j], ...]}`
    /// (default: a built-in set for ℂ²).
    #[arg(long)]
    pairs: Option<PathBuf>,
    /// Samples per `U_{k,p}` evaluation (default: same as `--samples`).
    #[arg(long, value_parser = parse_samples)]
    valuation_samples: Option<usize>,
    #[arg(long, default_value_t = 400)]
    bootstrap: usize,
}

#[derive(Args, Debug)]
struct SelftestArgs {}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Intrinsic(_) => "intrinsic",
            Command::Steiner(_) => "steiner",
            Command::Hadwiger(_) => "hadwiger",
            Command::Product(_) => "product",
            Command::Ukp(_) => "ukp",
            Command::Hermitian(HermitianCommand::Ukp(_)) => "hermitian ukp",
            Command::Hermitian(HermitianCommand::Rank(_)) => "hermitian rank",
            Command::Kinematic(KinematicCommand::Check(_)) => "kinematic check",
            Command::Kinematic(KinematicCommand::Integral(_)) => "kinematic integral",
            Command::Kinematic(KinematicCommand::Kappa(_)) => "kinematic kappa",
            Command::Kinematic(KinematicCommand::FitHermitian(_)) => "kinematic fit-hermitian",
            Command::FitHermitian(_) => "fit-hermitian",
            Command::Selftest(_) => "selftest",
        }
    }
}

fn estimate_json(e: &vallab::McEstimate) -> Value {
    json!({ "value": e.mean, "stderr": e.stderr, "samples": e.samples })
}

fn run(cli: &Cli, seed: u64, out: &mut Output) -> Result<Value, CliError> {
    let mc = |default: usize| McConfig::new(cli.samples.unwrap_or(default), seed);
    Ok(match &cli.command {
        Command::Intrinsic(a) => {
            let k = read_body(&a.body)?;
            let route = match a.route {
                Route::Auto => IntrinsicRoute::Auto,
                Route::Exact => IntrinsicRoute::Exact,
                Route::Steiner => IntrinsicRoute::Steiner(VolumeMethod::MonteCarlo),
                Route::Radial => IntrinsicRoute::Steiner(VolumeMethod::radial_default()),
            };
            let v = intrinsic_volume_with(&k, a.i, route, &mc(1_000_000))?;
            let mut r = estimate_json(&v);
            r["i"] = json!(a.i);
            r["dim"] = json!(k.dim());
            r
        }
        Command::Steiner(a) => {
            let k = read_body(&a.body)?;
            let f = steiner_fit(&k, a.radii.as_deref(), a.method.volume(), &mc(1_000_000))?;
            let n = f.n;
            out.table(
                &["j", "steiner_coeff", "stderr", "intrinsic_volume_index", "intrinsic_volume"],
                (0..=n)
                    .map(|j| {
                        let v = f.intrinsic_volume(n - j);
                        vec![j as f64, f.coeffs[j].mean, f.coeffs[j].stderr, (n - j) as f64, v.mean]
                    })
                    .collect(),
            );
            let iv: Vec<Value> = (0..=n).map(|i| estimate_json(&f.intrinsic_volume(i))).collect();
            json!({ "fit": f, "intrinsic_volumes": iv, "residual_consistent": f.residual_consistent() })
        }
        Command::Hadwiger(a) => {
            let (fit, n, target) = match (&a.valuation, &a.coeffs) {
                (Some(p), None) => {
                    let g = read_grep(p)?;
                    let n = g.dim();
                    (hadwiger_decompose(&g, n, a.radii.as_deref(), &mc(1_000_000))?, n, None)
                }
                (None, Some(c)) if c.len() >= 2 => {
                    let n = c.len() - 1;
                    let phi = hadwiger_synthesize(c);
                    (hadwiger_decompose(&phi, n, a.radii.as_deref(), &mc(1_000_000))?, n, Some(c.clone()))
                }
                _ => return Err(CliError::Config("give --valuation FILE or --coeffs a0,a1,...,an (n ≥ 1)".into())),
            };
            out.table(
                &["i", "coeff", "stderr"],
                fit.coeffs.iter().zip(&fit.stderr).enumerate().map(|(i, (c, s))| vec![i as f64, *c, *s]).collect(),
            );
            let max_err = target
                .as_ref()
                .map(|t| t.iter().zip(&fit.coeffs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
            json!({ "n": n, "fit": fit, "held_out_z": fit.held_out_z(), "target": target, "max_coeff_error": max_err })
        }
        Command::Product(a) => {
            let phi = read_grep(&a.phi)?;
            let psi = read_grep(&a.psi)?;
            let k = read_body(&a.body)?;
            let cfg = ProductConfig { allow_high_dim: a.allow_high_dim, ..ProductConfig::default() };
            estimate_json(&valuation_product(&phi, &psi, &k, &cfg, &mc(1_000_000))?)
        }
        Command::Ukp(a) | Command::Hermitian(HermitianCommand::Ukp(a)) => {
            let k = read_body(&a.body)?;
            let mut r = estimate_json(&u_kp(&k, a.m, a.k, a.p, &mc(200_000))?);
            r["m"] = json!(a.m);
            r["k"] = json!(a.k);
            r["p"] = json!(a.p);
            r
        }
        Command::Hermitian(HermitianCommand::Rank(a)) => {
            let bodies = match &a.bodies {
                Some(ps) => ps.iter().map(|p| read_body(p)).collect::<Result<Vec<_>, _>>()?,
                None => default_family(a.m)?,
            };
            let degrees: Vec<usize> = match a.k {
                Some(k) => vec![k],
                None => (0..=2 * a.m).collect(),
            };
            let mut reports = Vec::new();
            let mut rows = Vec::new();
            for &k in &degrees {
                let r = basis_rank(k, a.m, &bodies, &mc(1_000_000).child(k as u64))?;
                rows.push(vec![k as f64, r.expected as f64, r.rank as f64]);
                reports.push(r);
            }
            out.table(&["k", "expected", "rank"], rows);
            let all = reports.iter().all(|r| r.independent());
            json!({ "m": a.m, "reports": reports, "all_independent": all })
        }
        Command::Kinematic(KinematicCommand::Check(a)) => {
            let o1 = read_body(&a.omega1)?;
            let o2 = read_body(&a.omega2)?;
            let r = principal_kinematic_check(&o1, &o2, a.n, &mc(1_000_000))?;
            json!(r)
        }
        Command::Kinematic(KinematicCommand::Integral(a)) => {
            let o1 = read_body(&a.omega1)?;
            let o2 = read_body(&a.omega2)?;
            let n = o1.dim();
            let measure = match a.group {
                Group::Iso => MotionMeasure::iso(n),
                Group::Iu if n % 2 == 0 => MotionMeasure::iu(n / 2),
                Group::Iu => return Err(CliError::Config("unitary motions need an even dimension".into())),
            };
            let mut r = estimate_json(&kinematic_integral(&o1, &o2, &measure, &mc(1_000_000))?);
            r["measure"] = json!(measure);
            r
        }
        Command::Kinematic(KinematicCommand::Kappa(a)) => {
            let t = derive_kappa(a.n, &default_ball_radii(a.n))?;
            out.table(&["k", "kappa"], t.kappa.iter().enumerate().map(|(k, v)| vec![k as f64, *v]).collect());
            json!(t)
        }
        Command::Kinematic(KinematicCommand::FitHermitian(a)) | Command::FitHermitian(a) => {
            let (bodies, train, held) = match &a.pairs {
                Some(p) => read_pairs(p)?,
                None => default_pairs()?,
            };
            let cfg = FitConfig {
                valuation_samples: a.valuation_samples.unwrap_or(cli.samples.unwrap_or(1_000_000)),
                bootstrap: a.bootstrap,
                ..FitConfig::default()
            };
            let fit = fit_hermitian_constants(2, &bodies, &train, &held, &cfg, &mc(1_000_000))?;
            out.table(
                &["k1", "k2", "p1", "p2", "kappa", "stderr"],
                fit.indices
                    .iter()
                    .zip(fit.constants.iter().zip(&fit.constant_stderr))
                    .map(|(i, (c, s))| vec![i.k1 as f64, i.k2 as f64, i.p1 as f64, i.p2 as f64, *c, *s])
                    .collect(),
            );
            json!({
                "fit": fit,
                "held_out_ok": fit.max_held_out_residual < 0.05,
                "symmetric": fit.symmetric(),
                "balls_agree": fit.balls_agree(),
            })
        }
        Command::Selftest(_) => {
            let checks = selftest::run(seed, cli.samples.unwrap_or(20_000));
            let all = checks.iter().all(|c| c.pass);
            let v = json!({ "checks": checks, "all_pass": all });
            if !all {
                return Err(CliError::Failed(v));
            }
            v
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let Some(seed) = cli.seed else {
        eprintln!("error: a seed is required (--seed or VALLAB_SEED)");
        return ExitCode::from(2);
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let mut out = Output::default();
    let result = run(&cli, seed, &mut out);
    out.finish(&cli, seed, result)
}
