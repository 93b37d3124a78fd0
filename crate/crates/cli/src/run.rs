use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Args;
use ecq_core::config::ExperimentConfig;
use ecq_core::problems::Objective;
use ecq_core::sim::{Checkpoint, MetricsLog, RunStatus, Trainer};
use rayon::prelude::*;

use crate::EXIT_DIVERGED;

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Experiment config (`key = value` lines).
    pub config: PathBuf,
    /// Overrides `output.dir`.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Save a run-state file every N iterations (0 disables).
    #[arg(long, default_value_t = 0)]
    pub checkpoint_every: usize,
    /// Continue from existing run-state files.
    #[arg(long)]
    pub resume: bool,
}

struct Paths {
    dir: PathBuf,
    prefix: String,
}

impl Paths {
    fn csv(&self, rep: usize) -> PathBuf {
        self.dir.join(format!("{}_rep{rep:03}.csv", self.prefix))
    }

    fn state(&self, rep: usize) -> PathBuf {
        self.dir
            .join(format!("{}_rep{rep:03}.state.json", self.prefix))
    }

    fn mean(&self) -> PathBuf {
        self.dir.join(format!("{}_mean.csv", self.prefix))
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn header(cfg: &ExperimentConfig, rep: usize, seed: u64) -> Vec<(String, String)> {
    let mut h: Vec<(String, String)> = cfg
        .describe()
        .into_iter()
        .map(|(k, v)| {
            if k == "trainer.seed" {
                (k, seed.to_string())
            } else {
                (k, v)
            }
        })
        .collect();
    h.push(("run.repetition".into(), rep.to_string()));
    h
}

fn run_one(
    cfg: &ExperimentConfig,
    problem: &dyn Objective,
    rep: usize,
    paths: &Paths,
    args: &RunArgs,
) -> Result<MetricsLog> {
    let mut tc = cfg.trainer.clone();
    tc.seed = tc.seed.wrapping_add(rep as u64);
    let state = paths.state(rep);
    let mut trainer = if args.resume && state.exists() {
        let text =
            fs::read_to_string(&state).with_context(|| format!("reading {}", state.display()))?;
        let ckpt: Checkpoint =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", state.display()))?;
        Trainer::resume(tc.clone(), problem, ckpt)
            .with_context(|| format!("resuming {}", state.display()))?
    } else {
        Trainer::new(tc.clone(), problem)?
    };
    let mut status = Ok(());
    while trainer.iteration() < tc.iterations {
        if let Err(e) = trainer.step(problem) {
            status = Err(e);
            break;
        }
        if args.checkpoint_every > 0 && trainer.iteration() % args.checkpoint_every == 0 {
            let json = serde_json::to_vec(&trainer.checkpoint())?;
            write_atomic(&state, &json)?;
        }
    }
    let mut log = match status {
        Ok(()) => trainer.into_log(),
        Err(ecq_core::Error::Diverged { partial, .. }) => *partial,
        Err(e) => return Err(e.into()),
    };
    log.header = header(cfg, rep, tc.seed);
    write_atomic(&paths.csv(rep), log.to_csv().as_bytes())?;
    Ok(log)
}

pub fn run(args: RunArgs) -> Result<ExitCode> {
    let cfg = crate::config_path(&Some(args.config.clone()))?;
    let paths = Paths {
        dir: args
            .output_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from(&cfg.output_dir)),
        prefix: cfg.output_prefix.clone(),
    };
    if cfg.repetitions == 0 {
        anyhow::bail!("run.repetitions must be at least 1");
    }
    let problem = cfg.problem.build().context("building the problem")?;
    cfg.trainer.validate(problem.num_samples())?;
    fs::create_dir_all(&paths.dir).with_context(|| format!("creating {}", paths.dir.display()))?;

    let problem: &dyn Objective = problem.as_ref();
    let logs: Vec<Result<MetricsLog>> = (0..cfg.repetitions)
        .into_par_iter()
        .map(|rep| run_one(&cfg, problem, rep, &paths, &args))
        .collect();
    let logs = logs.into_iter().collect::<Result<Vec<_>>>()?;

    let mut mean = MetricsLog::mean(&logs)?;
    mean.header = cfg.describe();
    mean.header.push((
        "run.aggregate".into(),
        format!("mean over {} repetitions", logs.len()),
    ));
    write_atomic(&paths.mean(), mean.to_csv().as_bytes())?;

    let mut diverged = false;
    for (rep, log) in logs.iter().enumerate() {
        let last = log.last();
        println!(
            "rep {rep}: {} iterations, {}, train_loss {}, dist_sq_to_opt {}, bits plain {} entropy {:.0}",
            log.rows.len(),
            log.status,
            last.map_or("-".into(), |r| format!("{:.6e}", r.train_loss)),
            last.and_then(|r| r.dist_sq_to_opt).map_or("-".into(), |d| format!("{d:.6e}")),
            last.map_or(0, |r| r.bits_plain_cum),
            last.map_or(0.0, |r| r.bits_entropy_cum),
        );
        diverged |= log.status != RunStatus::Completed;
    }
    println!(
        "wrote {} and {}",
        paths.csv(0).display(),
        paths.mean().display()
    );
    if diverged {
        eprintln!("error: divergence detected; logs are truncated");
        return Ok(ExitCode::from(EXIT_DIVERGED));
    }
    Ok(ExitCode::SUCCESS)
}
