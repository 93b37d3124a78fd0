//! `ecq`: run experiments, verify bounds, benchmark the codec and write
//! synthetic datasets.
//!
//! Exit status: 0 ok, 1 configuration error, 2 verification failure,
//! 3 divergence.

mod bench;
mod gen;
mod run;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

/// Thread count for parallel repetitions, seeds and workers.
const THREADS_VAR: &str = "ECQ_THREADS";

pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_VERIFY: u8 = 2;
pub const EXIT_DIVERGED: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "ecq",
    version,
    about = "Error-compensated quantized SGD experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train from a config file and write one CSV per repetition plus their mean.
    Run(run::RunArgs),
    /// Check the analytical bounds against simulated runs.
    VerifyBounds(verify::VerifyArgs),
    /// Round-trip and cost table for the quantized wire format.
    CodecBench(bench::BenchArgs),
    /// Write a synthetic dataset to disk.
    GenData(gen::GenArgs),
}

fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .with_context(|| format!("{THREADS_VAR} must be a thread count, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("building the thread pool")?;
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let diverged = err.chain().any(|e| {
        matches!(
            e.downcast_ref::<ecq_core::Error>(),
            Some(ecq_core::Error::Diverged { .. })
        )
    });
    if diverged {
        EXIT_DIVERGED
    } else {
        EXIT_CONFIG
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    init_threads()?;
    match cli.command {
        Command::Run(a) => run::run(a),
        Command::VerifyBounds(a) => verify::verify(a),
        Command::CodecBench(a) => bench::bench(a),
        Command::GenData(a) => gen::gen(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

pub fn config_path(p: &Option<PathBuf>) -> Result<ecq_core::config::ExperimentConfig> {
    match p {
        Some(path) => ecq_core::config::ExperimentConfig::load(path)
            .with_context(|| format!("config {}", path.display())),
        None => Ok(Default::default()),
    }
}
