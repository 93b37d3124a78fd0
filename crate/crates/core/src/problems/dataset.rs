use nalgebra::DMatrix;

use super::Objective;
use crate::linalg::{axpy, dot, norm_sq, solve_spd, SpdSolution};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    /// `½ mean (wᵀx − y)²`
    SquaredLoss,
    /// `mean log(1 + e^z) − y·z` with `z = wᵀx`, `y ∈ {0, 1}`
    LogLoss,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::SquaredLoss => "squared",
            Task::LogLoss => "log",
        }
    }
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared" | "regression" => Ok(Task::SquaredLoss),
            "log" | "logistic" | "classification" => Ok(Task::LogLoss),
            other => Err(Error::InvalidParameter(format!("unknown task '{other}'"))),
        }
    }
}

/// Compressed sparse row matrix with sorted column indices per row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn new(
        cols: usize,
        indptr: Vec<usize>,
        indices: Vec<u32>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if indptr.first() != Some(&0)
            || indptr.last() != Some(&indices.len())
            || indices.len() != values.len()
        {
            return Err(Error::InvalidParameter("inconsistent CSR arrays".into()));
        }
        for r in indptr.windows(2) {
            if r[0] > r[1] {
                return Err(Error::InvalidParameter(
                    "row pointers must be non-decreasing".into(),
                ));
            }
            let row = &indices[r[0]..r[1]];
            if row.windows(2).any(|p| p[0] >= p[1])
                || row.last().is_some_and(|&c| c as usize >= cols)
            {
                return Err(Error::InvalidParameter(
                    "column indices must be sorted and in range".into(),
                ));
            }
        }
        Ok(Self {
            cols,
            indptr,
            indices,
            values,
        })
    }

    pub fn from_dense_rows(cols: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let mut indptr = vec![0];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: row.len(),
                });
            }
            for (j, &x) in row.iter().enumerate() {
                if x != 0.0 {
                    indices.push(j as u32);
                    values.push(x);
                }
            }
            indptr.push(indices.len());
        }
        Self::new(cols, indptr, indices, values)
    }

    pub fn rows(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let r = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[r.clone()], &self.values[r])
    }

    pub fn row_dot(&self, i: usize, w: &[f64]) -> f64 {
        let (idx, val) = self.row(i);
        idx.iter().zip(val).map(|(&j, &x)| x * w[j as usize]).sum()
    }

    /// `out += a · row_i`
    pub fn row_axpy(&self, i: usize, a: f64, out: &mut [f64]) {
        let (idx, val) = self.row(i);
        for (&j, &x) in idx.iter().zip(val) {
            out[j as usize] += a * x;
        }
    }

    pub fn dense_row(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        self.row_axpy(i, 1.0, &mut out);
        out
    }

    /// `XᵀX` as a dense matrix.
    pub fn gram(&self) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.cols, self.cols);
        for i in 0..self.rows() {
            let (idx, val) = self.row(i);
            for (&a, &x) in idx.iter().zip(val) {
                for (&b, &y) in idx.iter().zip(val) {
                    g[(a as usize, b as usize)] += x * y;
                }
            }
        }
        g
    }
}

/// Features, targets and the loss they are trained under.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: CsrMatrix,
    targets: Vec<f64>,
    task: Task,
}

impl Dataset {
    pub fn new(features: CsrMatrix, targets: Vec<f64>, task: Task) -> Result<Self> {
        if features.rows() != targets.len() {
            return Err(Error::DimensionMismatch {
                expected: features.rows(),
                got: targets.len(),
            });
        }
        if task == Task::LogLoss && targets.iter().any(|&y| y != 0.0 && y != 1.0) {
            return Err(Error::InvalidParameter(
                "classification targets must be 0 or 1".into(),
            ));
        }
        Ok(Self {
            features,
            targets,
            task,
        })
    }

    pub fn features(&self) -> &CsrMatrix {
        &self.features
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    /// Loss of sample `i` and its derivative with respect to `wᵀx_i`.
    #[inline]
    fn sample_loss_and_slope(&self, i: usize, w: &[f64]) -> (f64, f64) {
        let z = self.features.row_dot(i, w);
        let y = self.targets[i];
        match self.task {
            Task::SquaredLoss => {
                let r = z - y;
                (0.5 * r * r, r)
            }
            Task::LogLoss => (softplus(z) - y * z, sigmoid(z) - y),
        }
    }

    pub fn loss(&self, w: &[f64]) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| self.sample_loss_and_slope(i, w).0)
            .sum::<f64>()
            / n as f64
    }

    /// Mean gradient over `batch`.
    pub fn batch_gradient(&self, w: &[f64], batch: &[usize], out: &mut [f64]) {
        out.fill(0.0);
        let scale = 1.0 / batch.len() as f64;
        for &i in batch {
            let (_, slope) = self.sample_loss_and_slope(i, w);
            self.features.row_axpy(i, scale * slope, out);
        }
    }

    pub fn full_gradient(&self, w: &[f64]) -> Vec<f64> {
        let all: Vec<usize> = (0..self.len()).collect();
        let mut g = vec![0.0; self.dim()];
        self.batch_gradient(w, &all, &mut g);
        g
    }

    /// Least-squares minimizer through the normal equations.
    pub fn least_squares(&self) -> Result<SpdSolution> {
        let gram = self.features.gram();
        let mut rhs = vec![0.0; self.dim()];
        for i in 0..self.len() {
            self.features.row_axpy(i, self.targets[i], &mut rhs);
        }
        solve_spd(&gram, &rhs)
    }

    /// Upper bound on the Lipschitz constant of the mean log-loss gradient,
    /// `λ_max(XᵀX) / (4n)`, from power iteration.
    fn logistic_smoothness(&self) -> f64 {
        let n = self.len() as f64;
        let mut v = vec![1.0 / (self.dim() as f64).sqrt(); self.dim()];
        let mut est = 0.0;
        for _ in 0..100 {
            let mut next = vec![0.0; self.dim()];
            for i in 0..self.len() {
                let z = self.features.row_dot(i, &v);
                self.features.row_axpy(i, z, &mut next);
            }
            let nrm = norm_sq(&next).sqrt();
            if nrm == 0.0 {
                return 0.0;
            }
            est = nrm;
            v = next.into_iter().map(|x| x / nrm).collect();
        }
        // 1% headroom over the power-iteration estimate.
        1.01 * est / (4.0 * n)
    }

    /// Full-batch gradient descent reference solution for log loss.
    pub fn logistic_reference(&self, max_iters: usize, grad_tol: f64) -> Vec<f64> {
        let lip = self.logistic_smoothness();
        let mut w = vec![0.0; self.dim()];
        if lip == 0.0 {
            return w;
        }
        let step = 1.0 / lip;
        for _ in 0..max_iters {
            let g = self.full_gradient(&w);
            if norm_sq(&g).sqrt() <= grad_tol {
                break;
            }
            axpy(-step, &g, &mut w);
        }
        w
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Second-order statistics for evaluating squared loss in `O(d²)`.
#[derive(Clone, Debug)]
struct SquaredStats {
    gram: DMatrix<f64>,
    xty: Vec<f64>,
    yty: f64,
    n: f64,
}

impl SquaredStats {
    fn new(ds: &Dataset) -> Self {
        let mut xty = vec![0.0; ds.dim()];
        for i in 0..ds.len() {
            ds.features.row_axpy(i, ds.targets[i], &mut xty);
        }
        Self {
            gram: ds.features.gram(),
            xty,
            yty: norm_sq(&ds.targets),
            n: ds.len() as f64,
        }
    }

    fn loss(&self, w: &[f64]) -> f64 {
        let wv = nalgebra::DVector::from_column_slice(w);
        let quad = wv.dot(&(&self.gram * &wv));
        0.5 * (quad - 2.0 * dot(&self.xty, w) + self.yty) / self.n
    }
}

/// Largest dimension for which squared-loss statistics are kept dense.
pub const DENSE_STATS_MAX_DIM: usize = 2048;

/// A training set (and optional test set) as an [`Objective`].
#[derive(Clone, Debug)]
pub struct DatasetProblem {
    train: Dataset,
    test: Option<Dataset>,
    stats: Option<SquaredStats>,
    optimum: Option<Vec<f64>>,
    optimum_is_reference: bool,
    warning: Option<String>,
}

impl DatasetProblem {
    pub fn new(train: Dataset, test: Option<Dataset>) -> Result<Self> {
        if let Some(t) = &test {
            if t.dim() != train.dim() {
                return Err(Error::DimensionMismatch {
                    expected: train.dim(),
                    got: t.dim(),
                });
            }
            if t.task() != train.task() {
                return Err(Error::InvalidParameter(
                    "train and test tasks differ".into(),
                ));
            }
        }
        if train.is_empty() {
            return Err(Error::InvalidParameter("empty training set".into()));
        }
        let stats = (train.task() == Task::SquaredLoss && train.dim() <= DENSE_STATS_MAX_DIM)
            .then(|| SquaredStats::new(&train));
        Ok(Self {
            train,
            test,
            stats,
            optimum: None,
            optimum_is_reference: false,
            warning: None,
        })
    }

    /// Compute the optimum used for distance metrics: the normal-equation
    /// solve for squared loss, a gradient-descent reference for log loss.
    pub fn compute_optimum(&mut self, reference_iters: usize) -> Result<&[f64]> {
        match self.train.task() {
            Task::SquaredLoss => {
                let sol = match &self.stats {
                    Some(st) => solve_spd(&st.gram, &st.xty)?,
                    None => self.train.least_squares()?,
                };
                self.warning = sol.warning();
                self.optimum = Some(sol.x);
                self.optimum_is_reference = false;
            }
            Task::LogLoss => {
                self.optimum = Some(self.train.logistic_reference(reference_iters, 1e-10));
                self.optimum_is_reference = true;
            }
        }
        Ok(self.optimum.as_deref().unwrap())
    }

    pub fn with_optimum(mut self, reference_iters: usize) -> Result<Self> {
        self.compute_optimum(reference_iters)?;
        Ok(self)
    }

    pub fn train(&self) -> &Dataset {
        &self.train
    }

    pub fn test(&self) -> Option<&Dataset> {
        self.test.as_ref()
    }

    pub fn warning(&self) -> Option<&str> {
        self.warning.as_deref()
    }
}

impl Objective for DatasetProblem {
    fn dim(&self) -> usize {
        self.train.dim()
    }

    fn num_samples(&self) -> usize {
        self.train.len()
    }

    fn batch_gradient(&self, w: &[f64], batch: &[usize], out: &mut [f64]) {
        self.train.batch_gradient(w, batch, out);
    }

    fn full_gradient(&self, w: &[f64]) -> Vec<f64> {
        self.train.full_gradient(w)
    }

    fn loss(&self, w: &[f64]) -> f64 {
        match &self.stats {
            Some(st) => st.loss(w),
            None => self.train.loss(w),
        }
    }

    fn test_loss(&self, w: &[f64]) -> Option<f64> {
        self.test.as_ref().map(|t| t.loss(w))
    }

    fn optimum(&self) -> Option<&[f64]> {
        self.optimum.as_deref()
    }

    fn optimum_is_reference(&self) -> bool {
        self.optimum_is_reference
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_logistic() -> Dataset {
        let rows = vec![
            vec![1.0, 0.5],
            vec![-1.0, 0.2],
            vec![0.3, -1.0],
            vec![-0.4, -0.7],
            vec![0.9, 0.9],
            vec![-0.8, 0.1],
        ];
        let x = CsrMatrix::from_dense_rows(2, &rows).unwrap();
        Dataset::new(x, vec![1.0, 0.0, 1.0, 0.0, 0.0, 1.0], Task::LogLoss).unwrap()
    }

    #[test]
    fn csr_validation() {
        assert!(CsrMatrix::new(3, vec![0, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
        assert!(CsrMatrix::new(3, vec![0, 1], vec![3], vec![1.0]).is_err());
        assert!(CsrMatrix::new(3, vec![0, 2], vec![0, 2], vec![1.0]).is_err());
        let m = CsrMatrix::new(3, vec![0, 2, 2, 3], vec![0, 2, 1], vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m.rows(), 3);
        assert_eq!(m.dense_row(0), vec![1.0, 0.0, 2.0]);
        assert_eq!(m.dense_row(1), vec![0.0; 3]);
        assert_eq!(m.row_dot(2, &[1.0, 2.0, 3.0]), 6.0);
    }

    #[test]
    fn gram_matches_dense_product() {
        let rows = vec![vec![1.0, 0.0, 2.0], vec![0.0, 3.0, -1.0]];
        let m = CsrMatrix::from_dense_rows(3, &rows).unwrap();
        let x = DMatrix::from_fn(2, 3, |i, j| rows[i][j]);
        assert_eq!(m.gram(), x.transpose() * x);
    }

    #[test]
    fn logistic_at_zero_is_log_two() {
        let ds = small_logistic();
        assert!((ds.loss(&[0.0, 0.0]) - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn mean_of_per_sample_gradients_is_full_gradient() {
        let ds = small_logistic();
        let w = [0.3, -0.2];
        let full = ds.full_gradient(&w);
        let mut acc = [0.0; 2];
        for i in 0..ds.len() {
            let mut g = [0.0; 2];
            ds.batch_gradient(&w, &[i], &mut g);
            acc[0] += g[0] / ds.len() as f64;
            acc[1] += g[1] / ds.len() as f64;
        }
        assert!((acc[0] - full[0]).abs() < 1e-10 && (acc[1] - full[1]).abs() < 1e-10);
    }

    // Newton's method is an independent solver for the same objective.
    #[test]
    fn logistic_reference_agrees_with_newton() {
        let ds = small_logistic();
        let reference = ds.logistic_reference(100_000, 1e-12);
        let mut w = nalgebra::DVector::zeros(2);
        for _ in 0..50 {
            let g = nalgebra::DVector::from_vec(ds.full_gradient(w.as_slice()));
            let mut h = DMatrix::zeros(2, 2);
            for i in 0..ds.len() {
                let x = nalgebra::DVector::from_vec(ds.features().dense_row(i));
                let p = sigmoid(x.dot(&w));
                h += &x * x.transpose() * (p * (1.0 - p) / ds.len() as f64);
            }
            w -= h.cholesky().unwrap().solve(&g);
        }
        let diff = (ds.loss(&reference) - ds.loss(w.as_slice())).abs();
        assert!(diff < 1e-4, "loss gap {diff}");
        assert!(norm_sq(&ds.full_gradient(&reference)).sqrt() < 1e-6);
    }

    #[test]
    fn stats_loss_matches_direct() {
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| (0..3).map(|j| ((i * 3 + j) as f64).cos()).collect())
            .collect();
        let y: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        let ds = Dataset::new(
            CsrMatrix::from_dense_rows(3, &rows).unwrap(),
            y,
            Task::SquaredLoss,
        )
        .unwrap();
        let p = DatasetProblem::new(ds.clone(), None).unwrap();
        let w = [0.2, -0.4, 0.9];
        assert!((p.loss(&w) - ds.loss(&w)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_targets() {
        let x = CsrMatrix::from_dense_rows(1, &[vec![1.0]]).unwrap();
        assert!(Dataset::new(x.clone(), vec![2.0], Task::LogLoss).is_err());
        assert!(Dataset::new(x, vec![1.0, 0.0], Task::SquaredLoss).is_err());
    }
}
