use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Args;
use ecq_core::analysis::verify_bounds;

use crate::EXIT_VERIFY;

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Config whose `verify.*` keys set the problem and sizes.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
}

pub fn verify(args: VerifyArgs) -> Result<ExitCode> {
    let mut vc = crate::config_path(&args.config)?.verify;
    if let Some(s) = args.seeds {
        vc.seeds = s;
    }
    if let Some(t) = args.iterations {
        vc.iterations = t;
    }
    if let Some(a) = args.alpha {
        vc.alpha = a;
    }
    if let Some(b) = args.beta {
        vc.beta = b;
    }
    let report = verify_bounds(&vc)?;
    for c in &report.checks {
        println!("{c}");
    }
    if let Some(path) = &args.report {
        std::fs::write(path, report.to_json())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    println!(
        "{} of {} checks passed",
        report.checks.len() - failed,
        report.checks.len()
    );
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFY)
    })
}
