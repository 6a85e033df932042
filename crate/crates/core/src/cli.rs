//! Argument parsing and dispatch for the `convex-oracles` binary.
//!
//! Exit codes: 0 on success, 2 when a statevector would exceed the qubit cap,
//! 1 for every other failure (bad arguments, malformed bodies, failed checks).

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::geometry::BodySpec;
use crate::oracles::BoundaryPolicy;
use crate::report::{self, BenchBody};
use crate::sep_from_mem::GradientMode;
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "convex-oracles",
    version,
    about = "Weak convex-body oracles and the reductions between them"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One SEP query answered from MEM queries.
    Separate {
        #[command(flatten)]
        body: BodyArg,
        /// Query point, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, default_value_t = 0.1)]
        eta: f64,
        #[arg(long, default_value_t = 0.2)]
        rho: f64,
        #[arg(long, value_enum, default_value_t = Mode::Classical)]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Maximize a linear objective with the ellipsoid method over SEP-from-MEM.
    Optimize {
        #[command(flatten)]
        body: BodyArg,
        /// Unit objective, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        objective: String,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        #[arg(long, value_enum, default_value_t = Mode::Classical)]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate the height function at one point.
    EvalH {
        #[command(flatten)]
        body: BodyArg,
        /// Point in the first n-1 rotated coordinates, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        y: String,
        /// Direction rotated onto -e_n (default -e_n).
        #[arg(long, allow_hyphen_values = true)]
        toward: Option<String>,
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = Policy::Adversarial)]
        policy: Policy,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Jordan's algorithm on a linear phase.
    JordanDemo {
        /// Gradient with coordinates in (-1/2, 1/2), comma separated.
        #[arg(long, allow_hyphen_values = true)]
        gradient: String,
        #[arg(long, default_value_t = 4)]
        bits: u32,
        #[arg(long, default_value_t = 500)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Compare the polarity adapters against closed-form polar oracles.
    PolarCheck {
        #[command(flatten)]
        body: BodyArg,
        #[arg(long, default_value_t = 1000)]
        queries: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Lower-bound constructions.
    #[command(subcommand)]
    Hardness(HardnessCommand),
    /// Sweep n and emit MEM/SEP/phase-oracle counts as CSV.
    BenchQueries {
        #[arg(long, value_enum, default_value_t = Reduction::SepFromMem)]
        reduction: Reduction,
        /// Inclusive range `a..b` or a single value.
        #[arg(long, default_value = "2..8")]
        n: String,
        #[arg(long, value_enum, default_value_t = BenchBodyArg::Ball)]
        body: BenchBodyArg,
        #[arg(long, default_value_t = 0.1)]
        eta: f64,
        #[arg(long, default_value_t = 0.2)]
        rho: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum HardnessCommand {
    /// Check the adversary-matrix norm bounds.
    VerifyAdversary {
        #[arg(long)]
        n: usize,
        /// Seed for the mask sample used above n = 8.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Greedy first-difference learner on random strings, as CSV.
    FirstDiffBench {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
pub struct BodyArg {
    /// Body JSON file.
    #[arg(long)]
    pub body: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Mode {
    Classical,
    Quantum,
}

impl From<Mode> for GradientMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Classical => GradientMode::Classical,
            Mode::Quantum => GradientMode::Quantum,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Policy {
    Adversarial,
    Random,
}

impl From<Policy> for BoundaryPolicy {
    fn from(p: Policy) -> Self {
        match p {
            Policy::Adversarial => BoundaryPolicy::Adversarial,
            Policy::Random => BoundaryPolicy::Random,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Reduction {
    SepFromMem,
    SepFromMemQuantum,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BenchBodyArg {
    Ball,
    Box,
}

/// What a run printed and how it ended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            code: 0,
            stdout,
            stderr: String::new(),
        }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Capability { .. } => 2,
        _ => 1,
    }
}

/// Parses a comma-separated list of numbers.
pub fn parse_vector(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidParameter(format!("bad number {t:?}: {e}")))
        })
        .collect()
}

/// Parses `a..b` (inclusive) or a single integer.
pub fn parse_range(s: &str) -> Result<Vec<usize>> {
    let bad = |e: std::num::ParseIntError| Error::InvalidParameter(format!("bad range {s:?}: {e}"));
    match s.split_once("..") {
        Some((a, b)) => {
            let (a, b) = (
                a.trim().parse::<usize>().map_err(bad)?,
                b.trim().parse::<usize>().map_err(bad)?,
            );
            if a == 0 || a > b {
                return Err(Error::InvalidParameter(format!("empty range {s:?}")));
            }
            Ok((a..=b).collect())
        }
        None => Ok(vec![s.trim().parse::<usize>().map_err(bad)?]),
    }
}

pub fn load_body(path: &PathBuf) -> Result<BodySpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidParameter(format!("malformed body JSON: {e}")))
}

fn json<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut s =
        serde_json::to_string_pretty(value).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Runs one command; output is fully determined by the arguments.
pub fn dispatch(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Separate {
            body,
            point,
            eta,
            rho,
            mode,
            seed,
        } => {
            let input = report::SeparateInput {
                body: load_body(&body.body)?,
                point: parse_vector(&point)?,
                eta,
                rho,
                mode: mode.into(),
                seed,
            };
            Ok(Outcome::ok(json(&report::separate(input)?)?))
        }
        Command::Optimize {
            body,
            objective,
            eps,
            mode,
            seed,
        } => {
            let input = report::OptimizeInput {
                body: load_body(&body.body)?,
                objective: parse_vector(&objective)?,
                eps,
                mode: mode.into(),
                seed,
            };
            Ok(Outcome::ok(json(&report::optimize(input)?)?))
        }
        Command::EvalH {
            body,
            y,
            toward,
            delta,
            policy,
            seed,
        } => {
            let input = report::EvalHInput {
                body: load_body(&body.body)?,
                y: parse_vector(&y)?,
                toward: toward.as_deref().map(parse_vector).transpose()?,
                delta,
                policy: policy.into(),
                seed,
            };
            Ok(Outcome::ok(json(&report::eval_h(input)?)?))
        }
        Command::JordanDemo {
            gradient,
            bits,
            shots,
            seed,
            format,
        } => {
            let rep = report::jordan_demo(report::JordanDemoInput {
                gradient: parse_vector(&gradient)?,
                bits,
                shots,
                seed,
            })?;
            Ok(Outcome::ok(match format {
                Format::Json => json(&rep)?,
                Format::Csv => rep.csv,
            }))
        }
        Command::PolarCheck {
            body,
            queries,
            seed,
        } => {
            let rep = report::polar_check(load_body(&body.body)?, queries, seed)?;
            let code = if rep.all_exact { 0 } else { 1 };
            Ok(Outcome {
                code,
                stdout: json(&rep)?,
                stderr: String::new(),
            })
        }
        Command::Hardness(HardnessCommand::VerifyAdversary { n, seed }) => {
            let (text, ok, _) = report::adversary_lines(n, seed)?;
            Ok(Outcome {
                code: if ok { 0 } else { 1 },
                stdout: text,
                stderr: String::new(),
            })
        }
        Command::Hardness(HardnessCommand::FirstDiffBench { n, trials, seed }) => {
            let (csv, ok) = report::first_diff_csv(n, trials, seed)?;
            Ok(Outcome {
                code: if ok { 0 } else { 1 },
                stdout: csv,
                stderr: String::new(),
            })
        }
        Command::BenchQueries {
            reduction,
            n,
            body,
            eta,
            rho,
            seed,
        } => {
            let mode = match reduction {
                Reduction::SepFromMem => GradientMode::Classical,
                Reduction::SepFromMemQuantum => GradientMode::Quantum,
            };
            let body = match body {
                BenchBodyArg::Ball => BenchBody::Ball,
                BenchBodyArg::Box => BenchBody::Box,
            };
            Ok(Outcome::ok(report::bench_csv(
                mode,
                body,
                &parse_range(&n)?,
                eta,
                rho,
                seed,
            )?))
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome::ok(text)
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    match dispatch(cli) {
        Ok(out) => out,
        Err(e) => Outcome {
            code: exit_code(&e),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}
