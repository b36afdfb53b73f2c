//! Command-line front end: synthesize strategies, compute feasible regions
//! and bounds, run sweeps, and emit machine-readable verification reports.
//!
//! Exit codes: 0 success, 2 invalid input, 3 infeasible parameters,
//! 4 failed verification check.

mod commands;
mod config;
mod output;
mod strategy_spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub const EXIT_INVALID: u8 = 2;
pub const EXIT_INFEASIBLE: u8 = 3;
pub const EXIT_CHECK_FAILED: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }
}

impl From<ipgg::Error> for Failure {
    fn from(err: ipgg::Error) -> Self {
        use ipgg::Error::*;
        let code = match err {
            SingularStrategy(_)
            | DegenerateFactor(_)
            | InfeasiblePinning { .. }
            | InfeasibleExtortion { .. }
            | NonErgodicChain { .. } => EXIT_INFEASIBLE,
            _ => EXIT_INVALID,
        };
        Self {
            code,
            message: err.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "ipgg",
    version,
    about = "Zero-determinant strategies in the iterated public goods game",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand. Values omitted on the command line
/// fall back to the `--config` JSON file, then to built-in defaults.
#[derive(Args, Clone, Debug, Default)]
pub struct CommonArgs {
    /// Number of players N.
    #[arg(long)]
    n: Option<usize>,
    /// Multiplication factor r.
    #[arg(long)]
    r: Option<f64>,
    /// Output format: csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Output path; stdout when omitted. CSV outputs written to a path get a
    /// `<path>.meta.json` sidecar.
    #[arg(long)]
    output: Option<PathBuf>,
    /// JSON file mirroring the command flags by name.
    #[arg(long)]
    config: Option<PathBuf>,
    /// RNG seed for randomized subcommands.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Feasible region of pinning control pairs (case, vertices, bounds).
    Region {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Synthesize a pinning strategy from (p_cc, p_dd).
    Pin {
        #[command(flatten)]
        common: CommonArgs,
        /// Cooperation probability after unanimous cooperation.
        #[arg(long)]
        pcc: Option<f64>,
        /// Cooperation probability after unanimous defection.
        #[arg(long)]
        pdd: Option<f64>,
    },
    /// Synthesize a chi-extortion strategy.
    Extort {
        #[command(flatten)]
        common: CommonArgs,
        /// Extortion ratio chi.
        #[arg(long)]
        chi: Option<f64>,
        /// Scale phi; defaults to phi_max / 2.
        #[arg(long)]
        phi: Option<f64>,
    },
    /// Long-run expected payoffs for an explicit strategy profile.
    Payoff {
        #[command(flatten)]
        common: CommonArgs,
        /// JSON file with N reduced strategies: [{"pc": [...], "pd": [...]}, ...].
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Cross-check the solve against the determinant route.
        #[arg(long)]
        verify: bool,
    },
    /// Monte Carlo (or analytic) scatter dataset of a focal strategy
    /// against generated opponents.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Focal strategy: pin:PCC,PDD | extort:CHI[,PHI] | wsls | always-c |
        /// always-d | constant:P | file:PATH.
        #[arg(long)]
        focal: Option<String>,
        /// Opponent generator: uniform | always-c | always-d | wsls | constant:P.
        #[arg(long)]
        opponents: Option<String>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        rounds: Option<u64>,
        /// Burn-in rounds dropped from the average.
        #[arg(long)]
        discard: Option<u64>,
        /// Use the stationary solve instead of simulation.
        #[arg(long)]
        analytic: bool,
    },
    /// Pinning factor caps or effective extortion-ratio bounds over a range
    /// of group sizes.
    Bounds {
        #[command(flatten)]
        common: CommonArgs,
        /// pin | extort.
        #[arg(long)]
        mode: Option<String>,
        /// Inclusive group-size range, e.g. 3:64.
        #[arg(long, value_name = "A:B")]
        n_range: Option<String>,
    },
    /// Run the built-in verification checks and report pass/fail.
    Check {
        #[command(flatten)]
        common: CommonArgs,
        /// Multi-start count for the collusion search.
        #[arg(long)]
        samples: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Region { common } => commands::region(&common),
        Command::Pin { common, pcc, pdd } => commands::pin(&common, pcc, pdd),
        Command::Extort { common, chi, phi } => commands::extort(&common, chi, phi),
        Command::Payoff {
            common,
            profile,
            verify,
        } => commands::payoff(&common, profile, verify),
        Command::Sweep {
            common,
            focal,
            opponents,
            trials,
            rounds,
            discard,
            analytic,
        } => commands::sweep(&common, focal, opponents, trials, rounds, discard, analytic),
        Command::Bounds {
            common,
            mode,
            n_range,
        } => commands::bounds(&common, mode, n_range),
        Command::Check { common, samples } => commands::check(&common, samples),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
