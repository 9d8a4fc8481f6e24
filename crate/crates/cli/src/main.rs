//! Seeded, reproducible experiment runner for the simulation core.
//!
//! Exit codes: 0 success, 1 statistical acceptance failure, 2 invalid
//! input, 3 internal numerical failure.

mod commands;
mod spec;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{Outcome, RunConfig};

#[derive(Debug)]
pub enum CliError {
    /// Bad input or validation failure (exit 2).
    Input(String),
    /// A statistical acceptance check failed (exit 1).
    Statistical(String),
    /// Internal numerical failure (exit 3).
    Numerical(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(msg) | CliError::Statistical(msg) | CliError::Numerical(msg) => {
                write!(f, "{msg}")
            }
        }
    }
}

impl From<binary_qm_core::Error> for CliError {
    fn from(err: binary_qm_core::Error) -> Self {
        commands::classify(err)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Statistical(_) => 1,
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Contextual,
    Lhv,
    Exact,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Master seed; every random draw derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Monte Carlo sample count.
    #[arg(long, global = true, default_value_t = 100_000)]
    pub samples: u64,

    /// Output format (default: json, except `bell` which defaults to csv).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Named state preset; shorthand for `--state NAME`.
    #[arg(long, global = true)]
    pub preset: Option<String>,

    /// Override one tolerance, e.g. `--tolerance degeneracy=1e-7`.
    /// Repeatable.
    #[arg(long = "tolerance", value_name = "KEY=VAL", global = true)]
    pub tolerance: Vec<String>,
}

#[derive(Parser)]
#[command(
    name = "binary-qm",
    version,
    about = "Seeded quantum measurement experiments: averages, detector records, Bell/CHSH runs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Exact and Monte Carlo averages of an observable on a state.
    Average {
        /// State spec: preset name, inline JSON matrix, or @file.
        #[arg(long)]
        state: Option<String>,
        /// Observable spec: preset name, inline JSON matrix, or @file.
        #[arg(long)]
        observable: String,
        /// Commuting observables spanning the sampling context
        /// (repeatable; defaults to the measured observable alone).
        #[arg(long)]
        context: Vec<String>,
    },
    /// Stream measurement records and compare branch frequencies with the
    /// exact branch probabilities.
    Measure {
        #[arg(long)]
        state: Option<String>,
        #[arg(long)]
        observable: String,
        #[arg(long, value_enum, default_value_t = Scenario::Positive)]
        scenario: Scenario,
        /// Branch watched by the detector (negative scenario only).
        #[arg(long)]
        detector_branch: Option<usize>,
        /// Measure each collapsed state again and report reproducibility.
        #[arg(long)]
        repeat_check: bool,
    },
    /// Singlet correlation scan E(theta) over an angle grid.
    Bell {
        /// Angle grid in degrees, START:END:STEP.
        #[arg(long, default_value = "0:180:30")]
        grid: String,
    },
    /// CHSH quantity S from four planar angles.
    Chsh {
        /// Four angles in degrees: a,a',b,b'.
        #[arg(long, default_value = "0,90,45,135")]
        angles: String,
        #[arg(long, value_enum, default_value_t = Mode::Contextual)]
        mode: Mode,
    },
    /// Check the valuation postulates on random contexts.
    Postulates {
        /// Comma-separated dimensions.
        #[arg(long, default_value = "2,4,8")]
        dims: String,
    },
}

fn state_spec(explicit: &Option<String>, preset: &Option<String>) -> Result<String, CliError> {
    match (explicit, preset) {
        (Some(s), None) => Ok(s.clone()),
        (None, Some(p)) => Ok(p.clone()),
        (Some(s), Some(p)) if s == p => Ok(s.clone()),
        (Some(_), Some(_)) => Err(CliError::Input(
            "--state and --preset disagree; give one of them".into(),
        )),
        (None, None) => Err(CliError::Input(
            "missing state: pass --state SPEC or --preset NAME".into(),
        )),
    }
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = RunConfig::from_args(&cli.run)?;
    match &cli.command {
        Command::Average {
            state,
            observable,
            context,
        } => {
            let state = state_spec(state, &cli.run.preset)?;
            commands::run_average(&cfg, &state, observable, context)
        }
        Command::Measure {
            state,
            observable,
            scenario,
            detector_branch,
            repeat_check,
        } => {
            let state = state_spec(state, &cli.run.preset)?;
            commands::run_measure(
                &cfg,
                &state,
                observable,
                *scenario,
                *detector_branch,
                *repeat_check,
            )
        }
        Command::Bell { grid } => commands::run_bell(&cfg, grid),
        Command::Chsh { angles, mode } => commands::run_chsh(&cfg, angles, *mode),
        Command::Postulates { dims } => commands::run_postulates(&cfg, dims),
    }
}

fn emit(output: &str, out: &Option<PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, output)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(output.as_bytes())
                .and_then(|()| lock.flush())
                .map_err(|e| CliError::Input(format!("cannot write to stdout: {e}")))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            if let Err(err) = emit(&outcome.output, &cli.run.out) {
                eprintln!("error: {err}");
                return ExitCode::from(err.exit_code());
            }
            if outcome.statistical_failure {
                eprintln!("error: statistical acceptance check failed");
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
