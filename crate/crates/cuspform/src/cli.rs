//! Command-line interface: `jacobi`, `residue`, `verify`, `selftest`.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 degenerate point or failed
//! precondition, 3 I/O or parse error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use num_traits::Zero;
use serde_json::json;

use crate::cases::{self, CaseError};
use crate::frobenius::{self, CheckKind, Mode, VerifyOptions};
use crate::ideal::IdealError;
use crate::ratpoly::{Poly, Rational, Var};
use crate::residue::{ResidueError, ResiduePoint};
use crate::selftest::{self, SelftestOptions};
use crate::unfolding::{self, Point, TripletA, UnfoldingError};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_DEGENERATE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

pub const THREADS_ENV: &str = "CUSPFORM_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "cuspform",
    version,
    about = "Exact checks of Frobenius structures attached to affine cusp polynomials"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Jacobi ring of the universal unfolding at a point: dimension, basis, multiplication tables.
    Jacobi {
        /// Exponents `a1,a2,a3`.
        #[arg(long = "a")]
        a: String,
        /// Parameter values, e.g. `s11=1/2,sm=1`; unlisted `s` variables are 0.
        #[arg(long, default_value = "")]
        at: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Calibrated residue of `h` at a point.
    Residue {
        #[arg(long = "a")]
        a: String,
        #[arg(long, default_value = "")]
        at: String,
        /// Polynomial in `x1, x2, x3` (and bound parameters).
        #[arg(long = "h")]
        h: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the verification battery on an embedded or user-supplied case.
    Verify {
        /// Embedded case: 233, 234 or 235.
        #[arg(
            long,
            required_unless_present = "case_file",
            conflicts_with = "case_file"
        )]
        case: Option<String>,
        /// Path to a case file.
        #[arg(long)]
        case_file: Option<PathBuf>,
        /// `symbolic` or `randomized`; defaults to symbolic for 233 only.
        #[arg(long)]
        mode: Option<Mode>,
        #[arg(long, default_value_t = frobenius::DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long, default_value_t = frobenius::DEFAULT_SEED)]
        seed: u64,
        /// `all` or a comma-separated subset of eta,wdvv,phipsi,conditions,limit,mirror,coordchange.
        #[arg(long, default_value = "all")]
        checks: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomized self-checks of the polynomial, ideal and residue layers.
    Selftest {
        #[arg(long, default_value_t = frobenius::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        /// Perturbs an internal multiplication table; the run must then fail.
        #[arg(long)]
        corrupt_table: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Error carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn input(msg: impl ToString) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: msg.to_string(),
        }
    }

    fn degenerate(msg: impl ToString) -> Self {
        CliError {
            code: EXIT_DEGENERATE,
            message: msg.to_string(),
        }
    }
}

impl From<UnfoldingError> for CliError {
    fn from(e: UnfoldingError) -> Self {
        match e {
            UnfoldingError::InvalidTriplet(_) | UnfoldingError::Poly(_) => CliError::input(e),
            UnfoldingError::Ideal(IdealError::ForeignVariable(_)) => CliError::input(e),
            _ => CliError::degenerate(e),
        }
    }
}

impl From<ResidueError> for CliError {
    fn from(e: ResidueError) -> Self {
        match e {
            ResidueError::Unfolding(u) => u.into(),
            ResidueError::Poly(_) => CliError::input(e),
            _ => CliError::degenerate(e),
        }
    }
}

impl From<CaseError> for CliError {
    fn from(e: CaseError) -> Self {
        CliError::input(e)
    }
}

/// Output of one command: JSON text and exit code.
pub struct Outcome {
    pub json: String,
    pub code: i32,
}

/// Parses `name=value` pairs against the parameters of `a`.
pub fn parse_point(a: &TripletA, text: &str) -> Result<Point, CliError> {
    let mut p: Point = a
        .s_vars()
        .into_iter()
        .map(|v| (v, Rational::zero()))
        .collect();
    p.remove(&Var::SM);
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| CliError::input(format!("expected name=value, got `{part}`")))?;
        let v = Var::from_name(name.trim())
            .filter(|v| a.s_vars().contains(v))
            .ok_or_else(|| {
                CliError::input(format!("`{}` is not a parameter of {a}", name.trim()))
            })?;
        let r: Rational = value
            .trim()
            .parse()
            .map_err(|_| CliError::input(format!("bad rational `{}`", value.trim())))?;
        p.insert(v, r);
    }
    match p.get(&Var::SM) {
        None => Err(CliError::degenerate("sm must be given")),
        Some(r) if r.is_zero() => Err(CliError::degenerate("sm must be nonzero")),
        Some(_) => Ok(p),
    }
}

fn point_json(p: &Point) -> BTreeMap<String, String> {
    p.iter().map(|(v, r)| (v.name(), r.to_string())).collect()
}

fn triplet(text: &str) -> Result<TripletA, CliError> {
    TripletA::parse(text).map_err(CliError::input)
}

pub fn cmd_jacobi(a: &str, at: &str) -> Result<Outcome, CliError> {
    let a = triplet(a)?;
    let p = parse_point(&a, at)?;
    let jr = unfolding::jacobi_ring(&unfolding::universal_unfolding(&a), Var::SM, &p)?;
    let basis: Vec<String> = jr.ring.basis().iter().map(|m| m.to_string()).collect();
    let tables: Vec<Vec<Vec<String>>> = (0..jr.dim())
        .map(|i| {
            jr.ring
                .mult_table(i)
                .iter()
                .map(|r| r.iter().map(|x| x.to_string()).collect())
                .collect()
        })
        .collect();
    let v = json!({
        "triplet": a.to_string(),
        "point": point_json(&p),
        "mu": a.mu(),
        "dim": jr.dim(),
        "basis": basis,
        "mult_tables": tables,
    });
    Ok(Outcome {
        json: serde_json::to_string_pretty(&v).expect("json"),
        code: EXIT_PASS,
    })
}

pub fn cmd_residue(a: &str, at: &str, h: &str) -> Result<Outcome, CliError> {
    let a = triplet(a)?;
    let p = parse_point(&a, at)?;
    let h = Poly::parse(h, &a.registry()).map_err(CliError::input)?;
    if let Some(v) = h
        .vars()
        .into_iter()
        .find(|v| !v.is_x() && !p.contains_key(v))
    {
        return Err(CliError::input(format!(
            "`{}` is not allowed in h",
            v.name()
        )));
    }
    let rp = ResiduePoint::unfolding(&a, &p)?;
    let r = rp.residue(&h)?;
    let v = json!({
        "triplet": a.to_string(),
        "point": point_json(&p),
        "h": h.to_string(),
        "residue": r.to_string(),
        "calibration_sign": rp.calibration_sign(),
    });
    Ok(Outcome {
        json: serde_json::to_string_pretty(&v).expect("json"),
        code: EXIT_PASS,
    })
}

pub struct VerifyArgs {
    pub case: Option<String>,
    pub case_file: Option<PathBuf>,
    pub mode: Option<Mode>,
    pub trials: usize,
    pub seed: u64,
    pub checks: String,
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<Outcome, CliError> {
    let case = match (&args.case, &args.case_file) {
        (Some(name), _) => cases::load_case(name)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            let mut c = cases::parse_case_file(&text)?;
            c.name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            c
        }
        (None, None) => return Err(CliError::input("one of --case or --case-file is required")),
    };
    let checks = CheckKind::parse_list(&args.checks).map_err(CliError::input)?;
    let mode = args.mode.unwrap_or(if case.name == "233" {
        Mode::Symbolic
    } else {
        Mode::Randomized
    });
    if mode == Mode::Randomized && args.trials == 0 {
        return Err(CliError::degenerate(
            "randomized mode needs at least one trial",
        ));
    }
    let opts = VerifyOptions {
        mode,
        trials: args.trials,
        seed: args.seed,
        checks,
    };
    let report = frobenius::verify(&case, &opts);
    let code = if report.all_pass() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    };
    Ok(Outcome {
        json: report.to_json(),
        code,
    })
}

pub fn cmd_selftest(opts: &SelftestOptions) -> Outcome {
    let report = selftest::selftest(opts);
    let code = if report.all_pass() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    };
    Outcome {
        json: report.to_json(),
        code,
    }
}

/// Caps the global thread pool from `CUSPFORM_THREADS`.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(text) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = text.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::input(format!(
            "{THREADS_ENV} must be a positive integer, got `{text}`"
        ))
    })?;
    // A pool may already exist when called twice in one process.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

fn execute(cli: Cli) -> Result<Outcome, CliError> {
    configure_threads()?;
    let (outcome, out) = match cli.command {
        Command::Jacobi { a, at, out } => (cmd_jacobi(&a, &at)?, out),
        Command::Residue { a, at, h, out } => (cmd_residue(&a, &at, &h)?, out),
        Command::Verify {
            case,
            case_file,
            mode,
            trials,
            seed,
            checks,
            out,
        } => (
            cmd_verify(&VerifyArgs {
                case,
                case_file,
                mode,
                trials,
                seed,
                checks,
            })?,
            out,
        ),
        Command::Selftest {
            seed,
            trials,
            corrupt_table,
            out,
        } => (
            cmd_selftest(&SelftestOptions {
                seed,
                trials,
                corrupt_table,
            }),
            out,
        ),
    };
    if let Some(path) = out {
        std::fs::write(&path, format!("{}\n", outcome.json))
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    }
    Ok(outcome)
}

/// Runs the CLI on `args` (program name first), printing to stdout/stderr; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_INPUT
            } else {
                EXIT_PASS
            };
        }
    };
    match execute(cli) {
        Ok(o) => {
            println!("{}", o.json);
            o.code
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_dims() {
        let o = cmd_jacobi("2,3,3", "sm=1").unwrap();
        let v: serde_json::Value = serde_json::from_str(&o.json).unwrap();
        assert_eq!(v["dim"], 7);
        let o = cmd_jacobi("1,1,1", "sm=1").unwrap();
        let v: serde_json::Value = serde_json::from_str(&o.json).unwrap();
        assert_eq!(v["dim"], 2);
        assert_eq!(
            cmd_jacobi("2,3,3", "sm=0").err().unwrap().code,
            EXIT_DEGENERATE
        );
        assert_eq!(cmd_jacobi("2,3,3", "sm=x").err().unwrap().code, EXIT_INPUT);
        assert_eq!(cmd_jacobi("3,2,3", "sm=1").err().unwrap().code, EXIT_INPUT);
    }

    #[test]
    fn residue_values() {
        let r = |h: &str, at: &str| -> String {
            let o = cmd_residue("2,3,3", at, h).unwrap();
            let v: serde_json::Value = serde_json::from_str(&o.json).unwrap();
            v["residue"].as_str().unwrap().to_string()
        };
        assert_eq!(r("x1*x2*x3", "sm=3"), "27");
        assert_eq!(r("1", "sm=3"), "0");
        assert_eq!(r("x2^2", "sm=3"), "0");
        assert_eq!(
            cmd_residue("2,3,3", "sm=1", "t11").err().unwrap().code,
            EXIT_INPUT
        );
    }
}
