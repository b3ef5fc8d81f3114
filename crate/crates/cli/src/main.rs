use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod bound;
mod plotdata;
mod run;
mod sample;

/// Exit status for bad input: unknown names, malformed grids, invalid
/// configurations, schema mismatches.
pub const EXIT_CONFIG: u8 = 2;
/// Exit status when a run finishes but a hard invariant check fails.
pub const EXIT_INVARIANT: u8 = 3;
/// Exit status for anything else.
pub const EXIT_INTERNAL: u8 = 1;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INTERNAL,
            message: message.into(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Parses `key=value`.
pub fn key_value(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(format!("expected key=value, got {s:?}")),
    }
}

#[derive(Parser)]
#[command(name = "kmfix", version, about = "Fixed points of k-means on Gaussian mixtures: bounds and Monte Carlo experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a closed-form bound or threshold over a parameter grid.
    Bound {
        /// Bound name (see `kmfix bound list`).
        name: String,
        /// Grid axis: `key=v1,v2,...` or `key=lo:hi:count` (inclusive,
        /// evenly spaced). Repeat for more axes; the first varies slowest.
        #[arg(short, long = "param", value_parser = key_value)]
        params: Vec<(String, String)>,
        /// Write the CSV here instead of stdout.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment and write its CSV and manifest.
    Run {
        /// reassign | typical | union | warmup | practice | fsd | census
        experiment: String,
        /// JSON config (keys of the sweep configuration) or a previous
        /// run's manifest.
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[arg(short, long, env = "KMFIX_OUT_DIR", default_value = "results")]
        out_dir: PathBuf,
        /// Worker threads; 0 uses every core. Does not affect the output.
        #[arg(short, long, default_value_t = 0)]
        workers: usize,
        /// Override a config key, e.g. `--set reps=100 --set d_grid=16,64`.
        #[arg(short, long = "set", value_parser = key_value)]
        sets: Vec<(String, String)>,
    },
    /// Reshape an experiment CSV into a tidy per-figure CSV.
    EmitPlotdata {
        input: PathBuf,
        /// fig1 | fig2 | fig3 | fig4 | fig5 | fig7
        #[arg(short, long)]
        figure: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Draw one dataset from the Gaussian model and dump it.
    Sample {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        #[arg(long)]
        sigma2: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        /// balanced | iid_uniform
        #[arg(long, default_value = "balanced")]
        mode: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Bound { name, params, out } => bound::cmd_bound(&name, &params, out.as_deref()),
        Command::Run {
            experiment,
            config,
            out_dir,
            workers,
            sets,
        } => run::cmd_run(&experiment, config.as_deref(), &out_dir, workers, &sets),
        Command::EmitPlotdata { input, figure, out } => plotdata::cmd_emit_plotdata(&input, &figure, out.as_deref()),
        Command::Sample {
            d,
            n,
            k,
            tau,
            sigma2,
            seed,
            stream,
            mode,
            out,
        } => sample::cmd_sample(d, n, k, tau, sigma2, seed, stream, &mode, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kmfix: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
