use std::fs;
use std::path::Path;
use std::process::ExitCode;

use serde::Deserialize;
use serde_json::{json, Value};

use vallab::bodies::{BodySpec, ConvexBody};
use vallab::valgebra::GRep;
use vallab::{Conventions, Error};

use crate::Cli;

#[derive(Debug)]
pub enum CliError {
    /// Malformed input (exit 2).
    Config(String),
    /// The computation failed (exit 3).
    Numerical(Error),
    /// The computation ran but a check did not pass (exit 3).
    Failed(Value),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidBody(_) | Error::Json(_) | Error::DimensionMismatch { .. } | Error::InvalidArgument(_) => {
                CliError::Config(e.to_string())
            }
            other => CliError::Numerical(other),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn read_body(path: &Path) -> Result<ConvexBody, CliError> {
    let spec: BodySpec =
        serde_json::from_str(&read(path)?).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(spec.build()?)
}

pub fn read_grep(path: &Path) -> Result<GRep, CliError> {
    GRep::from_json(&read(path)?).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PairsFile {
    bodies: Vec<BodySpec>,
    train: Vec<(usize, usize)>,
    held_out: Vec<(usize, usize)>,
}

#[allow(clippy::type_complexity)]
pub fn read_pairs(path: &Path) -> Result<(Vec<ConvexBody>, Vec<(usize, usize)>, Vec<(usize, usize)>), CliError> {
    let f: PairsFile =
        serde_json::from_str(&read(path)?).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let bodies = f.bodies.iter().map(|b| b.build()).collect::<Result<Vec<_>, _>>()?;
    Ok((bodies, f.train, f.held_out))
}

/// Collects the optional CSV table and writes the final document.
#[derive(Default)]
pub struct Output {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Output {
    pub fn table(&mut self, header: &[&str], rows: Vec<Vec<f64>>) {
        self.header = header.iter().map(|s| s.to_string()).collect();
        self.rows = rows;
    }

    fn csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }

    pub fn finish(self, cli: &Cli, seed: u64, result: Result<Value, CliError>) -> ExitCode {
        let command = cli.command.name();
        let (doc, code) = match result {
            Ok(v) => (json!({ "command": command, "seed": seed, "result": v, "conventions": Conventions::default() }), 0),
            Err(CliError::Config(msg)) => {
                eprintln!("error: {msg}");
                return ExitCode::from(2);
            }
            Err(CliError::Numerical(e)) => (
                json!({ "command": command, "seed": seed, "error": e.to_string(), "kind": kind(&e), "conventions": Conventions::default() }),
                3,
            ),
            Err(CliError::Failed(v)) => (
                json!({ "command": command, "seed": seed, "result": v, "failed": true, "conventions": Conventions::default() }),
                3,
            ),
        };
        let text = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
        match &cli.out {
            Some(p) => {
                if let Err(e) = fs::write(p, text + "\n") {
                    eprintln!("error: {}: {e}", p.display());
                    return ExitCode::from(2);
                }
            }
            None => println!("{text}"),
        }
        if let Some(p) = &cli.csv {
            if !self.header.is_empty() {
                if let Err(e) = fs::write(p, self.csv()) {
                    eprintln!("error: {}: {e}", p.display());
                    return ExitCode::from(2);
                }
            }
        }
        if code == 3 {
            if let Some(err) = doc.get("error") {
                eprintln!("error: {}", err.as_str().unwrap_or_default());
            } else {
                eprintln!("error: checks failed");
            }
        }
        ExitCode::from(code)
    }
}

fn kind(e: &Error) -> &'static str {
    match e {
        Error::UnsupportedExact(_) | Error::Unsupported(_) => "unsupported",
        Error::NoConvergence { .. } => "no_convergence",
        Error::IllConditioned { .. } => "ill_conditioned",
        Error::Singular(_) => "singular",
        Error::Divergence(_) => "divergence",
        Error::NonConvex { .. } => "non_convex",
        Error::InconsistentProduct { .. } => "inconsistent_product",
        Error::Degenerate(_) => "degenerate",
        Error::InvalidWindow(_) => "invalid_window",
        _ => "other",
    }
}
