//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # comment
//! problem.kind = regression
//! problem.d = 256
//! trainer.eta = 0.02
//! trainer.bucket_size = whole
//! ```
//!
//! Keys live in the `problem.`, `trainer.`, `output.`, `run.` and `verify.`
//! sections. Unknown or repeated keys are errors; omitted keys take their
//! defaults. [`ExperimentConfig::to_text`] writes every key, so parsing its
//! output gives back the same configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::analysis::VerifyConfig;
use crate::feedback::FeedbackConfig;
use crate::problems::{
    gen_classification, gen_quadratic, gen_regression, gen_sparse_classification, load_libsvm,
    DatasetProblem, Objective, SparseClassificationSpec, Task,
};
use crate::quantizer::{NormKind, QuantScheme};
use crate::sim::{CodecKind, TrainerConfig, WHOLE_VECTOR};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    Quadratic,
    Regression,
    Classification,
    SparseClassification,
    Libsvm,
}

impl ProblemKind {
    const ALL: [ProblemKind; 5] = [
        ProblemKind::Quadratic,
        ProblemKind::Regression,
        ProblemKind::Classification,
        ProblemKind::SparseClassification,
        ProblemKind::Libsvm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::Quadratic => "quadratic",
            ProblemKind::Regression => "regression",
            ProblemKind::Classification => "classification",
            ProblemKind::SparseClassification => "sparse_classification",
            ProblemKind::Libsvm => "libsvm",
        }
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown problem kind '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub d: usize,
    pub n: usize,
    pub seed: u64,
    pub noise_sigma: f64,
    pub a1: f64,
    pub a2: f64,
    /// Weight scale of the dense classification generator.
    pub scale: f64,
    pub nnz_per_row: usize,
    pub informative: usize,
    pub zipf_exponent: f64,
    pub path: String,
    pub test_path: String,
    pub task: Task,
    /// Gradient-descent iterations for the log-loss reference optimum;
    /// 0 skips computing an optimum for dataset problems.
    pub reference_iters: usize,
}

impl Default for ProblemSpec {
    fn default() -> Self {
        Self {
            kind: ProblemKind::Regression,
            d: 256,
            n: 10_000,
            seed: 0,
            noise_sigma: 1.0,
            a1: 1.0,
            a2: 10.0,
            scale: 4.0,
            nnz_per_row: 60,
            informative: 200,
            zipf_exponent: 0.8,
            path: String::new(),
            test_path: String::new(),
            task: Task::LogLoss,
            reference_iters: 100_000,
        }
    }
}

impl ProblemSpec {
    /// Materialize the objective.
    pub fn build(&self) -> Result<Box<dyn Objective + Send>> {
        let dataset = |ds, test| -> Result<Box<dyn Objective + Send>> {
            let mut p = DatasetProblem::new(ds, test)?;
            if self.reference_iters > 0 {
                p.compute_optimum(self.reference_iters)?;
            }
            Ok(Box::new(p))
        };
        match self.kind {
            ProblemKind::Quadratic => Ok(Box::new(gen_quadratic(
                self.d,
                self.n,
                self.seed,
                (self.a1, self.a2),
            )?)),
            ProblemKind::Regression => dataset(
                gen_regression(self.d, self.n, self.noise_sigma, self.seed)?.0,
                None,
            ),
            ProblemKind::Classification => dataset(
                gen_classification(self.d, self.n, self.scale, self.seed)?.0,
                None,
            ),
            ProblemKind::SparseClassification => {
                let spec = SparseClassificationSpec {
                    n: self.n,
                    d: self.d,
                    nnz_per_row: self.nnz_per_row,
                    zipf_exponent: self.zipf_exponent,
                    informative: self.informative,
                    weight_std: 2.0,
                    seed: self.seed,
                };
                dataset(gen_sparse_classification(&spec)?.0, None)
            }
            ProblemKind::Libsvm => {
                if self.path.is_empty() {
                    return Err(Error::InvalidParameter(
                        "problem.path is required for libsvm".into(),
                    ));
                }
                let dim = (self.d > 0).then_some(self.d);
                let train = load_libsvm(&self.path, self.task, dim)?;
                let test = if self.test_path.is_empty() {
                    None
                } else {
                    Some(load_libsvm(&self.test_path, self.task, Some(train.dim()))?)
                };
                dataset(train, test)
            }
        }
    }

    pub fn describe(&self) -> Vec<(String, String)> {
        [
            ("problem.kind", self.kind.as_str().to_string()),
            ("problem.d", self.d.to_string()),
            ("problem.n", self.n.to_string()),
            ("problem.seed", self.seed.to_string()),
            ("problem.noise_sigma", format!("{:?}", self.noise_sigma)),
            ("problem.a1", format!("{:?}", self.a1)),
            ("problem.a2", format!("{:?}", self.a2)),
            ("problem.scale", format!("{:?}", self.scale)),
            ("problem.nnz_per_row", self.nnz_per_row.to_string()),
            ("problem.informative", self.informative.to_string()),
            ("problem.zipf_exponent", format!("{:?}", self.zipf_exponent)),
            ("problem.path", self.path.clone()),
            ("problem.test_path", self.test_path.clone()),
            ("problem.task", self.task.as_str().to_string()),
            ("problem.reference_iters", self.reference_iters.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub trainer: TrainerConfig,
    pub output_dir: String,
    pub output_prefix: String,
    pub repetitions: usize,
    pub verify: VerifyConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: ProblemSpec::default(),
            trainer: TrainerConfig::default(),
            output_dir: "out".into(),
            output_prefix: "run".into(),
            repetitions: 1,
            verify: VerifyConfig::default(),
        }
    }
}

fn bucket_text(b: usize) -> String {
    if b == WHOLE_VECTOR {
        "whole".into()
    } else {
        b.to_string()
    }
}

impl ExperimentConfig {
    /// Every key with its value, in canonical order.
    pub fn describe(&self) -> Vec<(String, String)> {
        let mut out = self.problem.describe();
        for (k, v) in self.trainer.describe() {
            let v = if k == "trainer.bucket_size" {
                bucket_text(self.trainer.scheme.bucket_size())
            } else {
                v
            };
            out.push((k, v));
        }
        out.push(("output.dir".into(), self.output_dir.clone()));
        out.push(("output.prefix".into(), self.output_prefix.clone()));
        out.push(("run.repetitions".into(), self.repetitions.to_string()));
        out.extend(self.verify.describe());
        out
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.describe() {
            writeln!(s, "{k} = {v}").unwrap();
        }
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let known: Vec<String> = Self::default()
            .describe()
            .into_iter()
            .map(|(k, _)| k)
            .collect();
        let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let (k, v) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected 'key = value', got '{content}'"),
            })?;
            let (k, v) = (k.trim(), v.trim());
            if !known.iter().any(|x| x == k) {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown key '{k}'"),
                });
            }
            if entries
                .insert(k.to_string(), (line, v.to_string()))
                .is_some()
            {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate key '{k}'"),
                });
            }
        }
        Builder { entries }.build()
    }
}

struct Builder {
    entries: BTreeMap<String, (usize, String)>,
}

impl Builder {
    fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.entries.get(key) {
            None => Ok(default),
            Some((line, v)) => v.parse().map_err(|_| Error::Parse {
                line: *line,
                message: format!("{key}: invalid value '{v}'"),
            }),
        }
    }

    fn line_of(&self, keys: &[&str]) -> usize {
        keys.iter()
            .filter_map(|k| self.entries.get(*k).map(|e| e.0))
            .min()
            .unwrap_or(0)
    }

    fn at(&self, keys: &[&str], e: Error) -> Error {
        Error::Parse {
            line: self.line_of(keys),
            message: format!("{}: {e}", keys.join(", ")),
        }
    }

    fn build(self) -> Result<ExperimentConfig> {
        let d = ExperimentConfig::default();
        let p = &d.problem;
        let problem = ProblemSpec {
            kind: self.get("problem.kind", p.kind)?,
            d: self.get("problem.d", p.d)?,
            n: self.get("problem.n", p.n)?,
            seed: self.get("problem.seed", p.seed)?,
            noise_sigma: self.get("problem.noise_sigma", p.noise_sigma)?,
            a1: self.get("problem.a1", p.a1)?,
            a2: self.get("problem.a2", p.a2)?,
            scale: self.get("problem.scale", p.scale)?,
            nnz_per_row: self.get("problem.nnz_per_row", p.nnz_per_row)?,
            informative: self.get("problem.informative", p.informative)?,
            zipf_exponent: self.get("problem.zipf_exponent", p.zipf_exponent)?,
            path: self.get("problem.path", p.path.clone())?,
            test_path: self.get("problem.test_path", p.test_path.clone())?,
            task: self.get("problem.task", p.task)?,
            reference_iters: self.get("problem.reference_iters", p.reference_iters)?,
        };

        let t = &d.trainer;
        let bucket = match self.entries.get("trainer.bucket_size") {
            Some((_, v)) if v == "whole" => WHOLE_VECTOR,
            _ => self.get("trainer.bucket_size", t.scheme.bucket_size())?,
        };
        let scheme = QuantScheme::new(
            self.get("trainer.levels", t.scheme.levels())?,
            self.get::<NormKind>("trainer.norm", t.scheme.norm())?,
            bucket,
        )
        .map_err(|e| self.at(&["trainer.levels", "trainer.bucket_size"], e))?;
        let feedback = FeedbackConfig::new(
            self.get("trainer.alpha", t.feedback.alpha())?,
            self.get("trainer.beta", t.feedback.beta())?,
        )
        .map_err(|e| self.at(&["trainer.alpha", "trainer.beta"], e))?;
        let trainer = TrainerConfig {
            eta: self.get("trainer.eta", t.eta)?,
            workers: self.get("trainer.workers", t.workers)?,
            batch_size: self.get("trainer.batch_size", t.batch_size)?,
            iterations: self.get("trainer.iterations", t.iterations)?,
            codec: self.get::<CodecKind>("trainer.codec", t.codec)?,
            scheme,
            feedback,
            seed: self.get("trainer.seed", t.seed)?,
        };
        if !(trainer.eta.is_finite() && trainer.eta > 0.0) {
            return Err(self.at(
                &["trainer.eta"],
                Error::InvalidParameter("must be positive".into()),
            ));
        }
        if trainer.workers == 0 || trainer.batch_size == 0 {
            return Err(self.at(
                &["trainer.workers", "trainer.batch_size"],
                Error::InvalidParameter("must be positive".into()),
            ));
        }

        let v = &d.verify;
        let verify = VerifyConfig {
            d: self.get("verify.d", v.d)?,
            n: self.get("verify.n", v.n)?,
            conditioning: (
                self.get("verify.a1", v.conditioning.0)?,
                self.get("verify.a2", v.conditioning.1)?,
            ),
            eta: self.get("verify.eta", v.eta)?,
            levels: self.get("verify.levels", v.levels)?,
            alpha: self.get("verify.alpha", v.alpha)?,
            beta: self.get("verify.beta", v.beta)?,
            workers: self.get("verify.workers", v.workers)?,
            batch_size: self.get("verify.batch_size", v.batch_size)?,
            iterations: self.get("verify.iterations", v.iterations)?,
            seeds: self.get("verify.seeds", v.seeds)?,
            seed: self.get("verify.seed", v.seed)?,
            mc_draws: self.get("verify.mc_draws", v.mc_draws)?,
        };
        let repetitions = self.get("run.repetitions", d.repetitions)?;
        if repetitions == 0 {
            return Err(self.at(
                &["run.repetitions"],
                Error::InvalidParameter("must be >= 1".into()),
            ));
        }
        Ok(ExperimentConfig {
            problem,
            trainer,
            output_dir: self.get("output.dir", d.output_dir.clone())?,
            output_prefix: self.get("output.prefix", d.output_prefix.clone())?,
            repetitions,
            verify,
        })
    }
}
