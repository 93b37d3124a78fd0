//! Deterministic synchronous data-parallel SGD.
//!
//! One authoritative parameter vector stands in for the `P` replicas. Each
//! iteration every worker samples a batch from its shard, compresses its
//! gradient with the configured codec and emits a [`WireMessage`]; the
//! messages are decoded, averaged in worker order and applied. Worker steps
//! may run on a thread pool, and since all randomness comes from streams
//! keyed by `(seed, worker, iteration)` the output never depends on it.

use std::fmt::Write as _;
use std::io::Write;
use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::gamma;
use crate::codec::{self, decode_payload, Payload, WireMessage};
use crate::feedback::{FeedbackConfig, FeedbackState};
use crate::linalg::{axpy, dist_sq};
use crate::problems::{shard_ranges, Objective};
use crate::quantizer::{quantize, quantize_onebit, NormKind, QuantScheme};
use crate::rng::{Lane, RngStream};
use crate::{Error, Result};

/// Losses above this are treated as divergence.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// Bucket size that puts the whole vector in one bucket.
pub const WHOLE_VECTOR: usize = u32::MAX as usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CodecKind {
    /// Uncompressed binary32 gradients.
    Fp32,
    /// Stochastic quantization, no feedback.
    Qsgd,
    /// Stochastic quantization of the error-compensated gradient.
    Ecq,
    /// Sign quantization with full residual feedback.
    OneBit,
    /// Stochastic quantization with `s = 1` and l∞ scaling.
    Ternary,
}

impl CodecKind {
    pub const ALL: [CodecKind; 5] = [
        CodecKind::Fp32,
        CodecKind::Qsgd,
        CodecKind::Ecq,
        CodecKind::OneBit,
        CodecKind::Ternary,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CodecKind::Fp32 => "fp32",
            CodecKind::Qsgd => "qsgd",
            CodecKind::Ecq => "ecq",
            CodecKind::OneBit => "onebit",
            CodecKind::Ternary => "ternary",
        }
    }
}

impl std::str::FromStr for CodecKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CodecKind::ALL
            .into_iter()
            .find(|c| c.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidParameter(format!("unknown codec '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainerConfig {
    pub eta: f64,
    pub workers: usize,
    pub batch_size: usize,
    pub iterations: usize,
    pub codec: CodecKind,
    pub scheme: QuantScheme,
    pub feedback: FeedbackConfig,
    pub seed: u64,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        Self {
            eta: 0.02,
            workers: 4,
            batch_size: 32,
            iterations: 1000,
            codec: CodecKind::Ecq,
            scheme: QuantScheme::new(4, NormKind::L2, WHOLE_VECTOR).unwrap(),
            feedback: FeedbackConfig::new(0.2, 0.9).unwrap(),
            seed: 0,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self, num_samples: usize) -> Result<()> {
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "eta must be positive, got {}",
                self.eta
            )));
        }
        if self.workers == 0 || self.batch_size == 0 {
            return Err(Error::InvalidParameter(
                "workers and batch_size must be positive".into(),
            ));
        }
        if self.workers > num_samples {
            return Err(Error::InvalidParameter(format!(
                "{} workers but only {num_samples} samples",
                self.workers
            )));
        }
        Ok(())
    }

    /// Feedback actually applied by the codec.
    pub fn effective_feedback(&self) -> Option<FeedbackConfig> {
        match self.codec {
            CodecKind::Ecq => Some(self.feedback),
            CodecKind::OneBit => Some(FeedbackConfig::new(1.0, 1.0).unwrap()),
            CodecKind::Fp32 | CodecKind::Qsgd | CodecKind::Ternary => None,
        }
    }

    /// Quantization scheme actually applied by the codec.
    pub fn effective_scheme(&self) -> QuantScheme {
        match self.codec {
            CodecKind::Ternary => QuantScheme::ternary(self.scheme.bucket_size()).unwrap(),
            _ => self.scheme,
        }
    }

    /// Stability constant `α²γ + (β − α)²` for a model of dimension `dim`,
    /// with `γ` taken per bucket.
    pub fn lambda(&self, dim: usize) -> f64 {
        let d = self.scheme.bucket_size().min(dim).max(1);
        self.feedback.lambda(gamma(d, self.scheme.levels()))
    }

    /// `(key, value)` pairs describing the trainer, in a fixed order.
    pub fn describe(&self) -> Vec<(String, String)> {
        let pairs = [
            ("trainer.codec", self.codec.as_str().to_string()),
            ("trainer.eta", format!("{:?}", self.eta)),
            ("trainer.workers", self.workers.to_string()),
            ("trainer.batch_size", self.batch_size.to_string()),
            ("trainer.iterations", self.iterations.to_string()),
            ("trainer.levels", self.scheme.levels().to_string()),
            ("trainer.norm", self.scheme.norm().as_str().to_string()),
            ("trainer.bucket_size", self.scheme.bucket_size().to_string()),
            ("trainer.alpha", format!("{:?}", self.feedback.alpha())),
            ("trainer.beta", format!("{:?}", self.feedback.beta())),
            ("trainer.seed", self.seed.to_string()),
        ];
        pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WorkerState {
    id: usize,
    shard: Range<usize>,
    feedback: FeedbackState,
}

impl WorkerState {
    pub fn new(id: usize, shard: Range<usize>, dim: usize) -> Self {
        Self {
            id,
            shard,
            feedback: FeedbackState::new(dim),
        }
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn shard(&self) -> &Range<usize> {
        &self.shard
    }

    pub fn feedback(&self) -> &FeedbackState {
        &self.feedback
    }
}

/// Everything a worker produced in one step.
#[derive(Clone, Debug)]
pub struct WorkerOutput {
    pub message: WireMessage,
    /// Raw stochastic gradient `g_p`.
    pub gradient: Vec<f64>,
    /// Dequantized transmitted gradient `g̃_p`.
    pub sent: Vec<f64>,
    /// `ε_p = g̃_p − (g_p + α·h_p)`.
    pub quant_error: Vec<f64>,
    pub plain_bits: u64,
    pub entropy_bits: f64,
}

/// Unbiased stochastic gradient of worker `worker` at step `t`.
pub fn worker_gradient<P: Objective + ?Sized>(
    worker: &WorkerState,
    w: &[f64],
    problem: &P,
    cfg: &TrainerConfig,
    t: usize,
) -> Vec<f64> {
    let mut rng = RngStream::new(cfg.seed, worker.id as u64, t as u64, Lane::Batch);
    let shard = &worker.shard;
    let batch: Vec<usize> = (0..cfg.batch_size)
        .map(|_| shard.start + rng.next_index(shard.len()))
        .collect();
    let mut g = vec![0.0; w.len()];
    problem.batch_gradient(w, &batch, &mut g);
    // Shard weight P·|D_p|/n.
    let weight = (cfg.workers * shard.len()) as f64 / problem.num_samples() as f64;
    if weight != 1.0 {
        g.iter_mut().for_each(|x| *x *= weight);
    }
    g
}

/// One worker's part of an iteration: gradient, compensation, compression,
/// error update.
pub fn worker_step<P: Objective + ?Sized>(
    worker: &mut WorkerState,
    w: &[f64],
    problem: &P,
    cfg: &TrainerConfig,
    t: usize,
) -> Result<WorkerOutput> {
    let g = worker_gradient(worker, w, problem, cfg, t);
    let fb = cfg.effective_feedback();
    let v = match &fb {
        Some(f) => worker.feedback.compensate(&g, f)?,
        None => g.clone(),
    };
    let payload = match cfg.codec {
        CodecKind::Fp32 => {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite);
            }
            Payload::Dense(v.iter().map(|&x| x as f32).collect())
        }
        CodecKind::OneBit => Payload::OneBit(quantize_onebit(&v, cfg.scheme.bucket_size())?),
        CodecKind::Qsgd | CodecKind::Ecq | CodecKind::Ternary => {
            let mut rng = RngStream::new(cfg.seed, worker.id as u64, t as u64, Lane::Quantize);
            Payload::Quantized(quantize(&v, &cfg.effective_scheme(), &mut rng)?)
        }
    };
    let message = match &payload {
        Payload::Dense(x) => {
            codec::encode_dense(&x.iter().map(|&y| f64::from(y)).collect::<Vec<_>>())?
        }
        Payload::OneBit(q) => codec::encode_onebit(q)?,
        Payload::Quantized(q) => codec::encode(q)?,
    };
    let sent = payload.dequantize();
    if let Some(f) = &fb {
        worker.feedback.update(&g, &sent, f)?;
    }
    let quant_error = sent.iter().zip(&v).map(|(a, b)| a - b).collect();
    Ok(WorkerOutput {
        message,
        gradient: g,
        sent,
        quant_error,
        plain_bits: payload.plain_bits(),
        entropy_bits: payload.entropy_bits(),
    })
}

/// Decode every message and average them in order.
pub fn aggregate(messages: &[WireMessage]) -> Result<Vec<f64>> {
    let first = messages
        .first()
        .ok_or_else(|| Error::InvalidParameter("nothing to aggregate".into()))?;
    let dim = decode_payload(first)?.dim();
    let mut sum = vec![0.0; dim];
    for msg in messages {
        let p = decode_payload(msg)?;
        if p.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: p.dim(),
            });
        }
        axpy(1.0, &p.dequantize(), &mut sum);
    }
    let inv = 1.0 / messages.len() as f64;
    sum.iter_mut().for_each(|x| *x *= inv);
    Ok(sum)
}

/// `w ← w − η·g`.
pub fn apply_update(w: &mut [f64], g: &[f64], eta: f64) -> Result<()> {
    if w.len() != g.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            got: g.len(),
        });
    }
    axpy(-eta, g, w);
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub iteration: usize,
    pub train_loss: f64,
    pub test_loss: Option<f64>,
    pub dist_sq_to_opt: Option<f64>,
    pub bits_plain_cum: u64,
    pub bits_entropy_cum: f64,
    pub h_norm_sq_mean: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    Completed,
    Diverged { iteration: usize },
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunStatus::Completed => f.write_str("completed"),
            RunStatus::Diverged { iteration } => write!(f, "diverged at iteration {iteration}"),
        }
    }
}

pub const CSV_COLUMNS: [&str; 7] = [
    "iteration",
    "train_loss",
    "test_loss",
    "dist_sq_to_opt",
    "bits_plain_cum",
    "bits_entropy_cum",
    "h_norm_sq_mean",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsLog {
    pub header: Vec<(String, String)>,
    pub rows: Vec<MetricsRow>,
    pub status: RunStatus,
    pub optimum_is_reference: bool,
}

fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

impl MetricsLog {
    pub fn new(header: Vec<(String, String)>, optimum_is_reference: bool) -> Self {
        Self {
            header,
            rows: Vec::new(),
            status: RunStatus::Completed,
            optimum_is_reference,
        }
    }

    pub fn last(&self) -> Option<&MetricsRow> {
        self.rows.last()
    }

    /// The CSV text: a `#` header block (version, configuration, status)
    /// followed by the fixed column set.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# ecq {}", crate::VERSION).unwrap();
        for (k, v) in &self.header {
            writeln!(out, "# {k} = {v}").unwrap();
        }
        if self.optimum_is_reference {
            writeln!(
                out,
                "# dist_sq_to_opt is measured against a numerical reference optimum"
            )
            .unwrap();
        }
        writeln!(out, "# status = {}", self.status).unwrap();
        writeln!(out, "{}", CSV_COLUMNS.join(",")).unwrap();
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.iteration,
                fmt_f64(r.train_loss),
                fmt_opt(r.test_loss),
                fmt_opt(r.dist_sq_to_opt),
                r.bits_plain_cum,
                fmt_f64(r.bits_entropy_cum),
                fmt_f64(r.h_norm_sq_mean),
            )
            .unwrap();
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }

    /// Row-wise mean over several runs, truncated to the shortest log.
    /// Optional columns are kept only when present in every run.
    pub fn mean(logs: &[MetricsLog]) -> Result<MetricsLog> {
        let first = logs
            .first()
            .ok_or_else(|| Error::InvalidParameter("no logs to average".into()))?;
        let len = logs.iter().map(|l| l.rows.len()).min().unwrap_or(0);
        let k = logs.len() as f64;
        let mean_opt = |f: &dyn Fn(&MetricsRow) -> Option<f64>, i: usize| -> Option<f64> {
            logs.iter()
                .map(|l| f(&l.rows[i]))
                .sum::<Option<f64>>()
                .map(|s| s / k)
        };
        let rows = (0..len)
            .map(|i| {
                let mean = |f: &dyn Fn(&MetricsRow) -> f64| {
                    logs.iter().map(|l| f(&l.rows[i])).sum::<f64>() / k
                };
                MetricsRow {
                    iteration: first.rows[i].iteration,
                    train_loss: mean(&|r| r.train_loss),
                    test_loss: mean_opt(&|r| r.test_loss, i),
                    dist_sq_to_opt: mean_opt(&|r| r.dist_sq_to_opt, i),
                    bits_plain_cum: (logs
                        .iter()
                        .map(|l| u128::from(l.rows[i].bits_plain_cum))
                        .sum::<u128>()
                        / logs.len() as u128) as u64,
                    bits_entropy_cum: mean(&|r| r.bits_entropy_cum),
                    h_norm_sq_mean: mean(&|r| r.h_norm_sq_mean),
                }
            })
            .collect();
        let status = logs
            .iter()
            .map(|l| l.status)
            .find(|s| *s != RunStatus::Completed)
            .unwrap_or(RunStatus::Completed);
        let mut header = first.header.clone();
        header.push(("run.repetitions".into(), logs.len().to_string()));
        Ok(MetricsLog {
            header,
            rows,
            status,
            optimum_is_reference: first.optimum_is_reference,
        })
    }
}

/// Snapshot of a run after an iteration, handed to observers.
pub struct StepTrace<'a> {
    /// Zero-based index of the step just taken.
    pub t: usize,
    pub w_before: &'a [f64],
    pub w: &'a [f64],
    pub outputs: &'a [WorkerOutput],
    pub workers: &'a [WorkerState],
    pub row: &'a MetricsRow,
}

/// Resumable run state: parameters, per-worker error and the log so far.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub config: Vec<(String, String)>,
    pub t: usize,
    pub w: Vec<f64>,
    pub h: Vec<Vec<f64>>,
    pub log: MetricsLog,
}

pub struct Trainer {
    cfg: TrainerConfig,
    w: Vec<f64>,
    workers: Vec<WorkerState>,
    t: usize,
    log: MetricsLog,
}

impl Trainer {
    /// Start from `w = 0`.
    pub fn new<P: Objective + ?Sized>(cfg: TrainerConfig, problem: &P) -> Result<Self> {
        Self::with_initial(cfg, problem, vec![0.0; problem.dim()])
    }

    pub fn with_initial<P: Objective + ?Sized>(
        cfg: TrainerConfig,
        problem: &P,
        w0: Vec<f64>,
    ) -> Result<Self> {
        cfg.validate(problem.num_samples())?;
        let d = problem.dim();
        if w0.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: w0.len(),
            });
        }
        let workers = shard_ranges(problem.num_samples(), cfg.workers)
            .into_iter()
            .enumerate()
            .map(|(i, r)| WorkerState::new(i, r, d))
            .collect();
        let log = MetricsLog::new(cfg.describe(), problem.optimum_is_reference());
        Ok(Self {
            cfg,
            w: w0,
            workers,
            t: 0,
            log,
        })
    }

    /// Continue a run from a checkpoint taken with the same configuration.
    pub fn resume<P: Objective + ?Sized>(
        cfg: TrainerConfig,
        problem: &P,
        ckpt: Checkpoint,
    ) -> Result<Self> {
        if ckpt.config != cfg.describe() {
            return Err(Error::InvalidParameter(
                "checkpoint was taken with a different configuration".into(),
            ));
        }
        let mut tr = Self::with_initial(cfg, problem, ckpt.w)?;
        if ckpt.h.len() != tr.workers.len() {
            return Err(Error::DimensionMismatch {
                expected: tr.workers.len(),
                got: ckpt.h.len(),
            });
        }
        for (wk, h) in tr.workers.iter_mut().zip(ckpt.h) {
            if h.len() != problem.dim() {
                return Err(Error::DimensionMismatch {
                    expected: problem.dim(),
                    got: h.len(),
                });
            }
            wk.feedback = FeedbackState::restore(h, ckpt.t as u64);
        }
        tr.t = ckpt.t;
        tr.log = ckpt.log;
        Ok(tr)
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            config: self.cfg.describe(),
            t: self.t,
            w: self.w.clone(),
            h: self
                .workers
                .iter()
                .map(|w| w.feedback.h().to_vec())
                .collect(),
            log: self.log.clone(),
        }
    }

    pub fn config(&self) -> &TrainerConfig {
        &self.cfg
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn workers(&self) -> &[WorkerState] {
        &self.workers
    }

    pub fn iteration(&self) -> usize {
        self.t
    }

    pub fn log(&self) -> &MetricsLog {
        &self.log
    }

    pub fn into_log(self) -> MetricsLog {
        self.log
    }

    fn run_workers<P: Objective + ?Sized>(&mut self, problem: &P) -> Result<Vec<WorkerOutput>> {
        let (w, cfg, t) = (&self.w, &self.cfg, self.t);
        #[cfg(feature = "parallel")]
        let it = self.workers.par_iter_mut();
        #[cfg(not(feature = "parallel"))]
        let it = self.workers.iter_mut();
        it.map(|wk| worker_step(wk, w, problem, cfg, t)).collect()
    }

    fn diverged(&mut self, iteration: usize) -> Error {
        self.log.status = RunStatus::Diverged { iteration };
        Error::Diverged {
            iteration,
            partial: Box::new(self.log.clone()),
        }
    }

    /// Take one step, calling `observe` with the result.
    pub fn step_observed<P, F>(&mut self, problem: &P, mut observe: F) -> Result<()>
    where
        P: Objective + ?Sized,
        F: FnMut(&StepTrace),
    {
        let iteration = self.t + 1;
        let outputs = match self.run_workers(problem) {
            Ok(o) => o,
            Err(Error::NonFinite) => return Err(self.diverged(iteration)),
            Err(e) => return Err(e),
        };
        let messages: Vec<WireMessage> = outputs.iter().map(|o| o.message.clone()).collect();
        let g = aggregate(&messages)?;
        let w_before = self.w.clone();
        apply_update(&mut self.w, &g, self.cfg.eta)?;

        let loss = problem.loss(&self.w);
        let prev = self.log.last();
        let row = MetricsRow {
            iteration,
            train_loss: loss,
            test_loss: problem.test_loss(&self.w),
            dist_sq_to_opt: problem.optimum().map(|o| dist_sq(&self.w, o)),
            bits_plain_cum: prev.map_or(0, |r| r.bits_plain_cum)
                + outputs.iter().map(|o| o.plain_bits).sum::<u64>(),
            bits_entropy_cum: prev.map_or(0.0, |r| r.bits_entropy_cum)
                + outputs.iter().map(|o| o.entropy_bits).sum::<f64>(),
            h_norm_sq_mean: self
                .workers
                .iter()
                .map(|w| w.feedback.norm_sq())
                .sum::<f64>()
                / self.workers.len() as f64,
        };
        self.t += 1;
        observe(&StepTrace {
            t: iteration - 1,
            w_before: &w_before,
            w: &self.w,
            outputs: &outputs,
            workers: &self.workers,
            row: &row,
        });
        self.log.rows.push(row);
        if !loss.is_finite() || loss.abs() > DIVERGENCE_THRESHOLD {
            return Err(self.diverged(iteration));
        }
        Ok(())
    }

    pub fn step<P: Objective + ?Sized>(&mut self, problem: &P) -> Result<()> {
        self.step_observed(problem, |_| {})
    }

    /// Run until the iteration budget is spent.
    pub fn run_observed<P, F>(mut self, problem: &P, mut observe: F) -> Result<MetricsLog>
    where
        P: Objective + ?Sized,
        F: FnMut(&StepTrace),
    {
        while self.t < self.cfg.iterations {
            self.step_observed(problem, &mut observe)?;
        }
        Ok(self.log)
    }

    pub fn run<P: Objective + ?Sized>(self, problem: &P) -> Result<MetricsLog> {
        self.run_observed(problem, |_| {})
    }
}

/// Run `cfg.iterations` steps from `w = 0`.
pub fn run_experiment<P: Objective + ?Sized>(
    cfg: &TrainerConfig,
    problem: &P,
) -> Result<MetricsLog> {
    Trainer::new(cfg.clone(), problem)?.run(problem)
}

/// As [`run_experiment`], observing every step.
pub fn run_experiment_traced<P, F>(
    cfg: &TrainerConfig,
    problem: &P,
    observe: F,
) -> Result<MetricsLog>
where
    P: Objective + ?Sized,
    F: FnMut(&StepTrace),
{
    Trainer::new(cfg.clone(), problem)?.run_observed(problem, observe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{QuadraticProblem, SampleTerm};

    fn hand_quadratic() -> QuadraticProblem {
        let s = || SampleTerm::scaled_identity(0.5, vec![-0.5, 0.0]).unwrap();
        QuadraticProblem::from_samples(vec![s(), s()]).unwrap()
    }

    #[test]
    fn aggregate_examples() {
        let enc = |v: &[f64]| codec::encode_dense(v).unwrap();
        let one = aggregate(&[enc(&[1.5, -2.0])]).unwrap();
        assert_eq!(one, vec![1.5, -2.0]);
        let zero = aggregate(&[enc(&[1.0, -3.0]), enc(&[-1.0, 3.0])]).unwrap();
        assert_eq!(zero, vec![0.0, 0.0]);
        let four = aggregate(&[enc(&[1.0]), enc(&[2.0]), enc(&[4.0]), enc(&[8.0])]).unwrap();
        assert!((four[0] - 3.75).abs() < 1e-12);
        assert!(matches!(
            aggregate(&[enc(&[1.0]), enc(&[1.0, 2.0])]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn apply_update_examples() {
        let mut w = vec![1.0, 2.0];
        apply_update(&mut w, &[0.0, 0.0], 0.5).unwrap();
        assert_eq!(w, vec![1.0, 2.0]);
        let b = [3.0, -1.0];
        let mut w = vec![0.0, 0.0];
        apply_update(&mut w, &b, 0.02).unwrap();
        assert_eq!(w, vec![-0.02 * 3.0, 0.02]);
    }

    #[test]
    fn fp32_on_hand_quadratic_decreases() {
        let q = hand_quadratic();
        let cfg = TrainerConfig {
            eta: 0.1,
            workers: 1,
            batch_size: 2,
            iterations: 50,
            codec: CodecKind::Fp32,
            ..Default::default()
        };
        let log = run_experiment(&cfg, &q).unwrap();
        assert_eq!(log.rows.len(), 50);
        for p in log.rows.windows(2) {
            assert!(p[1].train_loss < p[0].train_loss);
            assert_eq!(p[1].h_norm_sq_mean, 0.0);
        }
    }

    #[test]
    fn plain_bits_accumulate_exactly() {
        let q = crate::problems::gen_quadratic(10, 20, 1, (0.5, 2.0)).unwrap();
        let cfg = TrainerConfig {
            workers: 2,
            batch_size: 3,
            iterations: 7,
            scheme: QuantScheme::new(4, NormKind::L2, 4).unwrap(),
            ..Default::default()
        };
        let log = run_experiment(&cfg, &q).unwrap();
        // buckets of 4, 4, 2 with r = 4
        let per_msg = 3 * 32 + 10 * 4;
        assert_eq!(log.last().unwrap().bits_plain_cum, 7 * 2 * per_msg);
    }

    #[test]
    fn divergence_is_reported_with_partial_log() {
        let q = hand_quadratic();
        let cfg = TrainerConfig {
            eta: 5.0,
            workers: 1,
            batch_size: 2,
            iterations: 500,
            codec: CodecKind::Fp32,
            ..Default::default()
        };
        match run_experiment(&cfg, &q) {
            Err(Error::Diverged { iteration, partial }) => {
                assert_eq!(partial.rows.len(), iteration);
                assert_eq!(partial.status, RunStatus::Diverged { iteration });
                assert!(partial.to_csv().contains("# status = diverged"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn checkpoint_resume_matches_straight_run() {
        let q = crate::problems::gen_quadratic(8, 16, 2, (0.5, 2.0)).unwrap();
        let cfg = TrainerConfig {
            workers: 2,
            batch_size: 2,
            iterations: 30,
            ..Default::default()
        };
        let straight = run_experiment(&cfg, &q).unwrap();
        let mut tr = Trainer::new(cfg.clone(), &q).unwrap();
        for _ in 0..13 {
            tr.step(&q).unwrap();
        }
        let json = serde_json::to_string(&tr.checkpoint()).unwrap();
        let ckpt: Checkpoint = serde_json::from_str(&json).unwrap();
        let resumed = Trainer::resume(cfg, &q, ckpt).unwrap().run(&q).unwrap();
        assert_eq!(resumed.to_csv(), straight.to_csv());
    }

    #[test]
    fn codec_names_round_trip() {
        for c in CodecKind::ALL {
            assert_eq!(c.as_str().parse::<CodecKind>().unwrap(), c);
        }
        assert!("zip".parse::<CodecKind>().is_err());
    }
}
