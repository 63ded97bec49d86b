//! `epistemic`: command-line driver for the overlap-bound toolkit.
//!
//! JSON goes to stdout (or `--out`), the text report to stderr. Exit codes:
//! 0 success, 1 computational failure, 2 usage error.

mod commands;
mod output;

use clap::{Parser, Subcommand, ValueEnum};
use commands::{Failure, Output};
use epistemic::config::{DEFAULT_RESTARTS, DEFAULT_SEED};
use epistemic::expsim::{NoiseChannel, DEFAULT_BATCHES};
use serde::Serialize;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "epistemic", version, about = "Bounds on how psi-epistemic a quantum model can be")]
struct Cli {
    /// Seed for every random choice; stamped into the output.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Suppress the text report.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Complete family of mutually unbiased bases.
    Mub {
        #[arg(long)]
        dim: usize,
    },
    /// PP-incompatibility of three states and their best conjugate basis.
    PpCheck {
        /// JSON array of 3 states `{"dim": d, "amplitudes": [[re, im], ...]}`.
        #[arg(long)]
        states: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
    },
    /// Closed-form bounds on k.
    Bound {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        eps1: Option<f64>,
        #[arg(long)]
        eps2: Option<f64>,
        /// Report the noise level at which the bound reaches 1.
        #[arg(long, conflicts_with_all = ["eps1", "eps2", "up_to"])]
        threshold: bool,
        /// Tabulate the noiseless bounds for dim..=N.
        #[arg(long, conflicts_with_all = ["eps1", "eps2"])]
        up_to: Option<usize>,
    },
    /// Certificate that k < 1 in dimension 3.
    D3 {
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
        /// Also write the per-triple table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Checks on ontological models.
    Model {
        #[command(subcommand)]
        action: ModelAction,
    },
    /// Finite-shot simulation of the noisy experiment.
    Simulate {
        #[arg(long, default_value_t = 4)]
        dim: usize,
        /// none | depolarizing:P | misalignment:SIGMA
        #[arg(long, default_value = "none")]
        noise: NoiseChannel,
        /// Shots per setting.
        #[arg(long, default_value_t = 100_000)]
        shots: u64,
        /// Restarts per triple when building the measurement design.
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        /// Rotation batches per setting under misalignment.
        #[arg(long, default_value_t = DEFAULT_BATCHES)]
        batches: usize,
    },
    /// Random instances of the union-bound and response inequalities.
    Bonferroni {
        #[arg(long, default_value_t = 1000)]
        instances: usize,
        #[arg(long, default_value_t = 200)]
        responses: usize,
        #[arg(long, default_value_t = 50)]
        points: usize,
    },
}

#[derive(Subcommand)]
enum ModelAction {
    /// Born rule and omega_C <= omega_Q on random or listed state pairs.
    Verify {
        /// `ks2` or a discrete model JSON file.
        #[arg(long, default_value = "ks2")]
        model: String,
        #[arg(long, default_value_t = 100)]
        pairs: usize,
        /// Quadrature grid resolution for the qubit model.
        #[arg(long, default_value_t = commands::DEFAULT_MODEL_RESOLUTION)]
        resolution: usize,
        #[arg(long, default_value_t = 1e-6)]
        born_tol: f64,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Mub { .. } => "mub",
            Command::PpCheck { .. } => "pp-check",
            Command::Bound { .. } => "bound",
            Command::D3 { .. } => "d3",
            Command::Model { .. } => "model verify",
            Command::Simulate { .. } => "simulate",
            Command::Bonferroni { .. } => "bonferroni",
        }
    }
}

fn write_io(path: &std::path::Path, bytes: &[u8]) -> Result<(), Failure> {
    output::write_atomic(path, bytes).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn emit<T: Serialize>(cli: &Cli, out: Output<T>, extra_csv: Option<&PathBuf>) -> Result<(), Failure> {
    let bytes = match cli.format {
        Format::Json => output::to_json(&output::Envelope {
            tool: output::TOOL,
            version: output::VERSION,
            command: cli.command.name(),
            seed: cli.seed,
            result: &out.result,
        })
        .map_err(|e| Failure::Compute(format!("serialization failed: {e}")))?,
        Format::Csv => match &out.csv {
            Some(c) => c.clone().into_bytes(),
            None => return Err(Failure::Usage(format!("{} has no CSV output", cli.command.name()))),
        },
    };
    if let (Some(path), Some(csv)) = (extra_csv, &out.csv) {
        write_io(path, csv.as_bytes())?;
    }
    match &cli.out {
        Some(path) => write_io(path, &bytes)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(&bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Compute(format!("cannot write to stdout: {e}")))?;
        }
    }
    if !cli.quiet {
        eprint!("{}", out.report);
    }
    match out.failed {
        Some(msg) => Err(Failure::Compute(msg)),
        None => Ok(()),
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Compute(e.to_string()))?;
    }
    let seed = cli.seed;
    match &cli.command {
        Command::Mub { dim } => emit(cli, commands::mub(*dim)?, None),
        Command::PpCheck { states, restarts } => emit(cli, commands::pp_check(states, *restarts, seed)?, None),
        Command::Bound {
            dim,
            eps1,
            eps2,
            threshold,
            up_to,
        } => emit(cli, commands::bound(*dim, *eps1, *eps2, *threshold, *up_to)?, None),
        Command::D3 { restarts, csv } => emit(cli, commands::d3(*restarts, seed)?, csv.as_ref()),
        Command::Model {
            action:
                ModelAction::Verify {
                    model,
                    pairs,
                    resolution,
                    born_tol,
                    tol,
                },
        } => emit(
            cli,
            commands::model_verify(model, *pairs, seed, *resolution, *born_tol, *tol)?,
            None,
        ),
        Command::Simulate {
            dim,
            noise,
            shots,
            restarts,
            batches,
        } => emit(cli, commands::simulate(*dim, *noise, *shots, seed, *restarts, *batches)?, None),
        Command::Bonferroni {
            instances,
            responses,
            points,
        } => emit(cli, commands::bonferroni(*instances, *responses, *points, seed)?, None),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
