use rand_distr::{Distribution, StandardNormal};

use super::dataset::{CsrMatrix, Dataset, Task};
use crate::linalg::dot;
use crate::rng::{Lane, RngStream};
use crate::{Error, Result};

fn gaussian_vec(rng: &mut RngStream, len: usize, std: f64) -> Vec<f64> {
    (0..len)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            std * z
        })
        .collect()
}

fn dense_rows(rng: &mut RngStream, d: usize, n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| gaussian_vec(rng, d, 1.0)).collect()
}

fn check_shape(d: usize, n: usize) -> Result<()> {
    if d == 0 || n == 0 {
        return Err(Error::InvalidParameter("d and n must be positive".into()));
    }
    Ok(())
}

/// Linear model `y = w*ᵀx + ε` with `x ~ N(0, I)`, `w* ~ N(0, I/d)` and
/// `ε ~ N(0, noise_sigma²)`. Returns the dataset and `w*`.
pub fn gen_regression(
    d: usize,
    n: usize,
    noise_sigma: f64,
    seed: u64,
) -> Result<(Dataset, Vec<f64>)> {
    check_shape(d, n)?;
    if !(noise_sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise_sigma must be >= 0, got {noise_sigma}"
        )));
    }
    let mut rng = RngStream::new(seed, 0, 0, Lane::Data);
    let w = gaussian_vec(&mut rng, d, 1.0 / (d as f64).sqrt());
    let rows = dense_rows(&mut rng, d, n);
    let y = rows
        .iter()
        .map(|x| {
            let e: f64 = StandardNormal.sample(&mut rng);
            dot(&w, x) + noise_sigma * e
        })
        .collect();
    let ds = Dataset::new(CsrMatrix::from_dense_rows(d, &rows)?, y, Task::SquaredLoss)?;
    Ok((ds, w))
}

/// Logistic model with `x ~ N(0, I)`, `w* ~ N(0, I/d)·scale` and
/// `P(y = 1 | x) = σ(w*ᵀx)`.
pub fn gen_classification(
    d: usize,
    n: usize,
    scale: f64,
    seed: u64,
) -> Result<(Dataset, Vec<f64>)> {
    check_shape(d, n)?;
    let mut rng = RngStream::new(seed, 0, 0, Lane::Data);
    let w = gaussian_vec(&mut rng, d, scale / (d as f64).sqrt());
    let rows = dense_rows(&mut rng, d, n);
    let y = rows
        .iter()
        .map(|x| f64::from(u8::from(rng.next_f64() < sigmoid(dot(&w, x)))))
        .collect();
    let ds = Dataset::new(CsrMatrix::from_dense_rows(d, &rows)?, y, Task::LogLoss)?;
    Ok((ds, w))
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// A sparse binary-classification generator shaped like a high-dimensional
/// text-style benchmark: few non-zeros per row, heavy-tailed feature
/// popularity, and a small set of informative features.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseClassificationSpec {
    pub n: usize,
    pub d: usize,
    pub nnz_per_row: usize,
    /// Zipf exponent of feature popularity.
    pub zipf_exponent: f64,
    /// Number of informative features, drawn from the more popular half.
    pub informative: usize,
    /// Standard deviation of the informative weights.
    pub weight_std: f64,
    pub seed: u64,
}

impl Default for SparseClassificationSpec {
    fn default() -> Self {
        Self {
            n: 6000,
            d: 5000,
            nnz_per_row: 60,
            zipf_exponent: 0.8,
            informative: 200,
            weight_std: 2.0,
            seed: 0,
        }
    }
}

/// Generate a sparse logistic dataset. Values are uniform on `(0, 1)`;
/// logits are centered at their median so classes are balanced.
pub fn gen_sparse_classification(spec: &SparseClassificationSpec) -> Result<(Dataset, Vec<f64>)> {
    let SparseClassificationSpec {
        n,
        d,
        nnz_per_row,
        zipf_exponent,
        informative,
        weight_std,
        seed,
    } = *spec;
    check_shape(d, n)?;
    if nnz_per_row == 0 || nnz_per_row > d || informative > d.div_ceil(2) {
        return Err(Error::InvalidParameter("sparse spec out of range".into()));
    }
    let mut rng = RngStream::new(seed, 0, 0, Lane::Data);

    let mut cdf: Vec<f64> = (1..=d).map(|j| (j as f64).powf(-zipf_exponent)).collect();
    let mut acc = 0.0;
    for c in cdf.iter_mut() {
        acc += *c;
        *c = acc;
    }

    let half = d.div_ceil(2);
    let mut pool: Vec<usize> = (0..half).collect();
    for i in 0..informative {
        let j = i + rng.next_index(half - i);
        pool.swap(i, j);
    }
    let mut w = vec![0.0; d];
    for &j in &pool[..informative] {
        let z: f64 = StandardNormal.sample(&mut rng);
        w[j] = weight_std * z;
    }

    let mut indptr = vec![0];
    let mut indices = Vec::with_capacity(n * nnz_per_row);
    let mut values = Vec::with_capacity(n * nnz_per_row);
    let mut row: Vec<u32> = Vec::with_capacity(nnz_per_row);
    for _ in 0..n {
        row.clear();
        while row.len() < nnz_per_row {
            let u = rng.next_f64() * acc;
            let j = cdf.partition_point(|&c| c <= u).min(d - 1) as u32;
            if !row.contains(&j) {
                row.push(j);
            }
        }
        row.sort_unstable();
        for &j in &row {
            indices.push(j);
            values.push(rng.next_f64());
        }
        indptr.push(indices.len());
    }
    let x = CsrMatrix::new(d, indptr, indices, values)?;

    let mut z: Vec<f64> = (0..n).map(|i| x.row_dot(i, &w)).collect();
    let mut sorted = z.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[n / 2];
    for zi in z.iter_mut() {
        *zi -= median;
    }
    let y = z
        .iter()
        .map(|&zi| f64::from(u8::from(rng.next_f64() < sigmoid(zi))))
        .collect();
    Ok((Dataset::new(x, y, Task::LogLoss)?, w))
}
