//! Library side of the spherebranch command-line tool: argument parsing,
//! scenario dispatch, and deterministic report/artifact output.

// Negated comparisons like !(a < b) are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use spherebranch_core::config::ProblemSpec;
use spherebranch_core::eigenpairs::MapWindow;

pub mod logging;
pub mod output;
pub mod report;
pub mod runner;

pub use runner::{run_example, run_spec, Command, ScenarioConfig};

/// Errors split by exit code: invalid input exits 3, computation and I/O
/// failures exit 2.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Compute(String),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg) => write!(f, "invalid input: {msg}"),
            CliError::Compute(msg) => write!(f, "computation error: {msg}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 3,
            _ => 2,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "spherebranch",
    version,
    about = "Spectra, degree certificates, solution branches, and eigenpair maps \
             for perturbed eigenvalue problems on the unit sphere"
)]
struct Cli {
    /// Problem specification JSON file
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    /// Directory for CSV/JSON artifacts
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed recorded in the report and used by randomized suites
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for independent pipelines
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Subcommand, Debug)]
enum CliCommand {
    /// Hypothesis certificates for every eigenvalue in a window
    Certify {
        /// Eigenvalue window "a:b"
        #[arg(long, default_value = "-1:10.5", allow_hyphen_values = true)]
        window: String,
    },
    /// Eigenvalues, multiplicities, and kernel bases in a window
    Spectrum {
        #[arg(long, default_value = "-1:10.5", allow_hyphen_values = true)]
        window: String,
    },
    /// Degree of psi on (alpha, beta) x S with endpoint LS signs
    Degree {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        /// Resolvent base point (defaults to the best-conditioned window point)
        #[arg(long, allow_hyphen_values = true)]
        lambda_hat: Option<f64>,
        /// Initial size of the kernel-block perturbation
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Pseudo-arclength branch trace from a trivial anchor
    Trace {
        #[arg(long, allow_hyphen_values = true)]
        anchor_lambda: f64,
        /// Index into the deterministic anchor list at that eigenvalue
        #[arg(long, default_value_t = 0)]
        anchor_index: usize,
        /// +1 or -1
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        direction: i32,
        /// Unbounded-branch radius in the (s, lambda) plane
        #[arg(long, default_value_t = 10.0)]
        bound: f64,
        /// Initial arclength step
        #[arg(long)]
        step: Option<f64>,
    },
    /// Eigenpair components of det(L + sN - lambda C) over a rectangle
    Map {
        /// Rectangle "s0:s1,l0:l1"
        #[arg(long, allow_hyphen_values = true)]
        window: String,
        /// Cells per axis
        #[arg(long, default_value_t = 128)]
        grid: usize,
    },
    /// Full pipeline run for a named example problem
    Example {
        /// One of k1, k2, k3
        #[arg(long)]
        name: String,
        /// Truncation dimension (>= 8)
        #[arg(long, default_value_t = 16)]
        n: usize,
    },
}

fn parse_interval(text: &str, flag: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 2 {
        return Err(CliError::Input(format!(
            "{flag}: expected \"a:b\", got {text:?}"
        )));
    }
    let a: f64 = parts[0]
        .parse()
        .map_err(|_| CliError::Input(format!("{flag}: {:?} is not a number", parts[0])))?;
    let b: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::Input(format!("{flag}: {:?} is not a number", parts[1])))?;
    if !(a < b) {
        return Err(CliError::Input(format!(
            "{flag}: interval [{a}, {b}] is empty"
        )));
    }
    Ok((a, b))
}

fn parse_map_window(text: &str) -> Result<MapWindow, CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Input(format!(
            "--window: expected \"s0:s1,l0:l1\", got {text:?}"
        )));
    }
    Ok(MapWindow {
        s: parse_interval(parts[0], "--window (s range)")?,
        lambda: parse_interval(parts[1], "--window (lambda range)")?,
    })
}

fn load_problem_spec(path: &PathBuf) -> Result<ProblemSpec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read spec file {}: {e}", path.display())))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        CliError::Input(format!(
            "spec schema violation at {}: {}",
            e.path(),
            e.inner()
        ))
    })
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let command = match &cli.command {
        CliCommand::Certify { window } => Command::Certify {
            window: parse_interval(window, "--window")?,
        },
        CliCommand::Spectrum { window } => Command::Spectrum {
            window: parse_interval(window, "--window")?,
        },
        CliCommand::Degree {
            alpha,
            beta,
            lambda_hat,
            epsilon,
        } => Command::Degree {
            alpha: *alpha,
            beta: *beta,
            lambda_hat: *lambda_hat,
            epsilon: *epsilon,
        },
        CliCommand::Trace {
            anchor_lambda,
            anchor_index,
            direction,
            bound,
            step,
        } => Command::Trace {
            anchor_lambda: *anchor_lambda,
            anchor_index: *anchor_index,
            direction: *direction,
            bound: *bound,
            step: *step,
        },
        CliCommand::Map { window, grid } => Command::Map {
            window: parse_map_window(window)?,
            grid: *grid,
        },
        CliCommand::Example { name, n } => Command::Example {
            name: name.clone(),
            n: *n,
        },
    };

    let problem = match (&command, &cli.spec) {
        (Command::Example { .. }, _) => None,
        (_, Some(path)) => Some(load_problem_spec(path)?),
        (_, None) => None,
    };

    let config = ScenarioConfig {
        problem,
        command,
        out_dir: cli.out.clone(),
        seed: cli.seed,
        threads: cli.threads.max(1),
    };
    let (report, _timings) = run_spec(&config)?;
    runner::report_to_stdout(&report)
}

/// Parse the command line and run; returns the process exit code.
pub fn run_cli() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap already formats usage errors; --help/--version exit cleanly
            let _ = e.print();
            return if e.use_stderr() { 3 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
