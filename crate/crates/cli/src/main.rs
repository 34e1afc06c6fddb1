//! `risbeam` — design, evaluate, and quantize phase configurations for a
//! passive reflecting surface serving multiple weighted users.
//!
//! Exit codes: 0 success/converged, 1 usage, 2 parse error, 3 validation
//! error, 4 non-convergence, 5 oracle budget refusal.

mod commands;
mod config;
mod solution_io;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{
    cmd_oracle_check, cmd_pattern, cmd_quantize, cmd_solve, cmd_widebeam, OracleCheckArgs,
    PatternArgs, QuantizeArgs, SolveArgs, WidebeamArgs,
};
use config::SolverOverrides;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Parse(String),
    Validation(String),
    OracleBudget(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 1,
            Self::Parse(_) => 2,
            Self::Validation(_) => 3,
            Self::OracleBudget(_) => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "usage error: {m}"),
            Self::Parse(m) => write!(f, "parse error: {m}"),
            Self::Validation(m) => write!(f, "validation error: {m}"),
            Self::OracleBudget(m) => write!(f, "oracle budget refusal: {m}"),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "risbeam",
    version,
    about = "Max-min fair phase design for passive reflecting surfaces"
)]
struct Cli {
    /// Override the solver/oracle RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print solve progress to stderr.
    #[arg(long, global = true)]
    verbose: bool,
    /// Output path for the command's primary artifact (stdout if omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SolverFlags {
    /// Gap tolerance in objective units (defaults to a relative tolerance).
    #[arg(long)]
    tau: Option<f64>,
    /// Initial smoothing parameter (normalized objective scale).
    #[arg(long)]
    lambda0: Option<f64>,
    /// Cap on gradient steps per inner solve.
    #[arg(long)]
    inner_max_iters: Option<usize>,
    /// Cap on smoothing-parameter updates.
    #[arg(long)]
    outer_max_iters: Option<usize>,
    /// Random initializations (the first always starts from zero phases).
    #[arg(long)]
    restarts: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the weighted max-min design for a scenario file.
    Solve {
        scenario: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
        /// Also write the assembled channel matrix as CSV.
        #[arg(long)]
        dump_channel: Option<PathBuf>,
    },
    /// Evaluate the scattered-power pattern of a solution over an angular grid.
    Pattern {
        scenario: PathBuf,
        solution: PathBuf,
        /// Elevation step in degrees.
        #[arg(long, default_value_t = 1.0)]
        theta_step: f64,
        /// Azimuth step in degrees.
        #[arg(long, default_value_t = 2.0)]
        phi_step: f64,
        /// Probe range in meters (default 15).
        #[arg(long)]
        range: Option<f64>,
        /// Normalize powers to the grid maximum.
        #[arg(long)]
        normalize: bool,
    },
    /// Cover an angular region with packed sub-beams and solve for them.
    Widebeam {
        scenario: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        center_theta: f64,
        #[arg(long, default_value_t = 0.0)]
        center_phi: f64,
        /// Region angular radius in degrees.
        #[arg(long, default_value_t = 10.0)]
        radius: f64,
        /// Number of sub-beams.
        #[arg(long, default_value_t = 37)]
        count: usize,
        /// Virtual user range in meters (default 15).
        #[arg(long)]
        range: Option<f64>,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Quantize a solution to discrete phase levels and compare metrics.
    Quantize {
        solution: PathBuf,
        scenario: PathBuf,
        /// Bit depth in [1, 8]; falls back to the scenario's [quantize] section.
        #[arg(long)]
        bits: Option<u32>,
    },
    /// Compare implementations against brute-force oracles.
    OracleCheck {
        /// Bit depth for the discrete enumeration comparison.
        #[arg(long)]
        bits: Option<u32>,
        /// Unit count for the discrete enumeration comparison.
        #[arg(long)]
        units: Option<usize>,
        /// User count for the discrete enumeration comparison.
        #[arg(long)]
        users: Option<usize>,
        /// Evaluation budget override for the enumeration.
        #[arg(long)]
        max_evaluations: Option<u64>,
    },
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let overrides_from = |s: &SolverFlags, seed: Option<u64>| SolverOverrides {
        tau: s.tau,
        lambda0: s.lambda0,
        inner_max_iters: s.inner_max_iters,
        outer_max_iters: s.outer_max_iters,
        restarts: s.restarts,
        seed,
    };
    match &cli.command {
        Command::Solve {
            scenario,
            solver,
            dump_channel,
        } => cmd_solve(&SolveArgs {
            scenario: scenario.clone(),
            overrides: overrides_from(solver, cli.seed),
            dump_channel: dump_channel.clone(),
            out: cli.out.clone(),
            verbose: cli.verbose,
        }),
        Command::Pattern {
            scenario,
            solution,
            theta_step,
            phi_step,
            range,
            normalize,
        } => cmd_pattern(&PatternArgs {
            scenario: scenario.clone(),
            solution: solution.clone(),
            theta_step: *theta_step,
            phi_step: *phi_step,
            range: *range,
            normalize: *normalize,
            out: cli.out.clone(),
        }),
        Command::Widebeam {
            scenario,
            center_theta,
            center_phi,
            radius,
            count,
            range,
            solver,
        } => cmd_widebeam(&WidebeamArgs {
            scenario: scenario.clone(),
            center_theta: *center_theta,
            center_phi: *center_phi,
            radius: *radius,
            count: *count,
            range: *range,
            overrides: overrides_from(solver, cli.seed),
            out: cli.out.clone(),
            verbose: cli.verbose,
        }),
        Command::Quantize {
            solution,
            scenario,
            bits,
        } => cmd_quantize(&QuantizeArgs {
            solution: solution.clone(),
            scenario: scenario.clone(),
            bits: *bits,
            out: cli.out.clone(),
        }),
        Command::OracleCheck {
            bits,
            units,
            users,
            max_evaluations,
        } => cmd_oracle_check(&OracleCheckArgs {
            bits: *bits,
            units: *units,
            users: *users,
            max_evaluations: *max_evaluations,
            seed: cli.seed.unwrap_or(0),
        }),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // help and version requests are not usage errors
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            err.print().ok();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code())
        }
    }
}
