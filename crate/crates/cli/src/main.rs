//! `probeq`: exact checks of equal distribution, stochastic dominance and
//! regret-based preference between finite-valued random variables, plus
//! equivalence certificates and their verifier.
//!
//! Exit status: 0 on success or a positive verdict, 1 on a negative verdict,
//! 2 on unusable input.

#[macro_use]
mod render;
mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;

use crate::render::Precision;

#[derive(Parser)]
#[command(name = "probeq", version, about = "Exact probabilistic equivalence toolkit")]
struct Cli {
    /// Decimal digits shown next to exact values.
    #[arg(long, global = true, env = "PROBEQ_PRECISION", default_value_t = 12)]
    precision: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Case1,
    Rational,
    Surd,
    Fosd,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded random pair of random variables.
    Gen {
        #[arg(long, value_enum, default_value = "rational")]
        kind: Kind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write X here instead of printing the pair.
        #[arg(long, requires = "y")]
        x: Option<PathBuf>,
        #[arg(long, requires = "x")]
        y: Option<PathBuf>,
    },
    /// Decide F_X = F_Y exactly.
    EqDist { x: PathBuf, y: PathBuf },
    /// Compare X and Y by first-order stochastic dominance.
    Fosd { x: PathBuf, y: PathBuf },
    /// Build an equivalence certificate for an equally distributed pair.
    Certify {
        x: PathBuf,
        y: PathBuf,
        #[arg(long)]
        k_min: Option<u32>,
        #[arg(long)]
        k_max: Option<u32>,
        /// Certificate destination; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check a certificate against its random variables.
    Verify {
        #[arg(required_unless_present = "batch", conflicts_with = "batch")]
        certificate: Option<PathBuf>,
        #[arg(required_unless_present = "batch")]
        x: Option<PathBuf>,
        #[arg(required_unless_present = "batch")]
        y: Option<PathBuf>,
        /// JSON list of {"certificate", "x", "y"} paths, relative to the list.
        #[arg(long)]
        batch: Option<PathBuf>,
        #[arg(long, default_value_t = 1, requires = "batch")]
        jobs: usize,
        /// Emit the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Evaluate the regret-based preference between X and Y.
    Regret {
        x: PathBuf,
        y: PathBuf,
        /// Regret function: inline JSON, a form name or a file.
        #[arg(long, default_value = "difference")]
        psi: String,
        /// Regret functional: inline JSON, a form name or a file.
        #[arg(long, default_value = "expectation")]
        v: String,
        #[arg(long, default_value_t = probeq_core::regret::DEFAULT_TOLERANCE)]
        tol: f64,
        /// Also compare on the comonotone coupling of the two laws.
        #[arg(long)]
        coupled: bool,
    },
    /// Comonotone coupling of two laws.
    Couple { f: PathBuf, g: PathBuf },
    /// Quantile representation of a sequence of laws against a target.
    Skorokhod {
        #[arg(long)]
        target: PathBuf,
        #[arg(long, num_args = 1.., required = true)]
        seq: Vec<PathBuf>,
        #[arg(long, num_args = 1.., required = true, value_parser = input::rational)]
        eps: Vec<BigRational>,
    },
}

/// How a successful run ended.
pub enum Status {
    Positive,
    Negative,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let p = Precision(cli.precision);
    let outcome = match cli.command {
        Command::Gen { kind, seed, x, y } => commands::gen(kind, seed, x.zip(y)),
        Command::EqDist { x, y } => commands::eq_dist(p, &x, &y),
        Command::Fosd { x, y } => commands::fosd(p, &x, &y),
        Command::Certify { x, y, k_min, k_max, out } => commands::certify(&x, &y, k_min, k_max, out.as_deref()),
        Command::Verify { batch: Some(list), jobs, json, .. } => commands::verify_batch(&list, jobs, json),
        Command::Verify { certificate, x, y, json, .. } => match (certificate, x, y) {
            (Some(c), Some(x), Some(y)) => commands::verify(&c, &x, &y, json),
            _ => unreachable!("clap requires all three paths without --batch"),
        },
        Command::Regret { x, y, psi, v, tol, coupled } => commands::regret(p, &x, &y, &psi, &v, tol, coupled),
        Command::Couple { f, g } => commands::couple(p, &f, &g),
        Command::Skorokhod { target, seq, eps } => commands::skorokhod(p, &target, &seq, &eps),
    };
    match outcome {
        Ok(Status::Positive) => ExitCode::SUCCESS,
        Ok(Status::Negative) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
