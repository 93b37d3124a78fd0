//! Objectives the simulator can train on.
//!
//! [`QuadraticProblem`] is the analyzable testbed `Σ ½wᵀA_iw + b_iᵀw`;
//! [`DatasetProblem`] wraps a [`Dataset`] under squared loss or log loss.

mod cache;
mod dataset;
mod generate;
mod libsvm;
mod quadratic;

use std::ops::Range;

pub use cache::{read_cache, write_cache};
pub use dataset::{CsrMatrix, Dataset, DatasetProblem, Task};
pub use generate::{
    gen_classification, gen_regression, gen_sparse_classification, SparseClassificationSpec,
};
pub use libsvm::{load_libsvm, parse_libsvm, write_libsvm};
pub use quadratic::{gen_quadratic, QuadraticProblem, SampleTerm};

/// A differentiable training objective over `num_samples` samples.
pub trait Objective: Sync {
    fn dim(&self) -> usize;

    fn num_samples(&self) -> usize;

    /// Mini-batch gradient at `w` from the samples in `batch`, scaled so
    /// that its expectation under uniform sampling of indices equals the
    /// full gradient.
    fn batch_gradient(&self, w: &[f64], batch: &[usize], out: &mut [f64]);

    fn full_gradient(&self, w: &[f64]) -> Vec<f64>;

    fn loss(&self, w: &[f64]) -> f64;

    fn test_loss(&self, _w: &[f64]) -> Option<f64> {
        None
    }

    /// Minimizer used for the distance-to-optimum metric, when known.
    fn optimum(&self) -> Option<&[f64]>;

    /// True when [`Objective::optimum`] is a numerical reference rather than
    /// an exact solve.
    fn optimum_is_reference(&self) -> bool {
        false
    }
}

/// Split `0..n` into `p` contiguous ranges whose sizes differ by at most one.
pub fn shard_ranges(n: usize, p: usize) -> Vec<Range<usize>> {
    assert!(p > 0, "worker count must be positive");
    let base = n / p;
    let extra = n % p;
    let mut start = 0;
    (0..p)
        .map(|i| {
            let len = base + usize::from(i < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}
