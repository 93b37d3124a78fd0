use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use super::Objective;
use crate::linalg::{axpy, dot, solve_spd, sym_eigenvalues};
use crate::rng::{Lane, RngStream};
use crate::{Error, Result};

/// One sample `(A_i, b_i)` with `A_i = F·Fᵀ + ridge·I` kept in factored form.
#[derive(Clone, Debug)]
pub struct SampleTerm {
    factor: DMatrix<f64>,
    ridge: f64,
    b: Vec<f64>,
}

impl SampleTerm {
    pub fn new(factor: DMatrix<f64>, ridge: f64, b: Vec<f64>) -> Result<Self> {
        if factor.nrows() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: b.len(),
                got: factor.nrows(),
            });
        }
        if !(ridge >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "ridge must be >= 0, got {ridge}"
            )));
        }
        Ok(Self { factor, ridge, b })
    }

    /// `A_i = ridge·I`, no low-rank part.
    pub fn scaled_identity(ridge: f64, b: Vec<f64>) -> Result<Self> {
        let d = b.len();
        Self::new(DMatrix::zeros(d, 0), ridge, b)
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        &self.factor * self.factor.transpose() + DMatrix::identity(d, d) * self.ridge
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// `out += weight · (A_i w + b_i)`
    fn accumulate_gradient(&self, w: &[f64], weight: f64, out: &mut [f64]) {
        let d = w.len();
        for ((o, wi), bi) in out.iter_mut().zip(w).zip(&self.b) {
            *o += weight * (self.ridge * wi + bi);
        }
        for col in self.factor.as_slice().chunks_exact(d) {
            axpy(weight * dot(col, w), col, out);
        }
    }
}

/// `min_w Σ_i ½wᵀA_iw + b_iᵀw`, equivalently `½wᵀAw + bᵀw`.
#[derive(Clone, Debug)]
pub struct QuadraticProblem {
    samples: Vec<SampleTerm>,
    a: DMatrix<f64>,
    b: Vec<f64>,
    a1: f64,
    a2: f64,
    w_star: Vec<f64>,
    condition_warning: Option<String>,
}

impl QuadraticProblem {
    /// Aggregate the samples, check strong convexity and solve for `w*`.
    pub fn from_samples(samples: Vec<SampleTerm>) -> Result<Self> {
        let d = samples
            .first()
            .map(SampleTerm::dim)
            .ok_or_else(|| Error::InvalidParameter("quadratic problem needs samples".into()))?;
        let mut a = DMatrix::zeros(d, d);
        let mut b = vec![0.0; d];
        for s in &samples {
            if s.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: s.dim(),
                });
            }
            a += s.matrix();
            for (bi, x) in b.iter_mut().zip(s.b()) {
                *bi += x;
            }
        }
        let ev = sym_eigenvalues(&a);
        let (a1, a2) = (ev[0], ev[d - 1]);
        if a1 <= 0.0 {
            return Err(Error::Singular(format!(
                "aggregate A is not strongly convex (a1 = {a1:.3e})"
            )));
        }
        let rhs: Vec<f64> = b.iter().map(|x| -x).collect();
        let sol = solve_spd(&a, &rhs)?;
        Ok(Self {
            samples,
            a,
            b,
            a1,
            a2,
            w_star: sol.x.clone(),
            condition_warning: sol.warning(),
        })
    }

    pub fn samples(&self) -> &[SampleTerm] {
        &self.samples
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// Smallest eigenvalue of `A`.
    pub fn a1(&self) -> f64 {
        self.a1
    }

    /// Largest eigenvalue of `A`.
    pub fn a2(&self) -> f64 {
        self.a2
    }

    pub fn w_star(&self) -> &[f64] {
        &self.w_star
    }

    pub fn condition_warning(&self) -> Option<&str> {
        self.condition_warning.as_deref()
    }
}

impl Objective for QuadraticProblem {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn num_samples(&self) -> usize {
        self.samples.len()
    }

    fn batch_gradient(&self, w: &[f64], batch: &[usize], out: &mut [f64]) {
        out.fill(0.0);
        // Each draw carries weight n/|batch|.
        let weight = self.samples.len() as f64 / batch.len() as f64;
        for &i in batch {
            self.samples[i].accumulate_gradient(w, weight, out);
        }
    }

    fn full_gradient(&self, w: &[f64]) -> Vec<f64> {
        let aw = &self.a * DVector::from_column_slice(w);
        aw.iter().zip(&self.b).map(|(x, b)| x + b).collect()
    }

    fn loss(&self, w: &[f64]) -> f64 {
        let wv = DVector::from_column_slice(w);
        0.5 * wv.dot(&(&self.a * &wv)) + wv.dot(&DVector::from_column_slice(&self.b))
    }

    fn optimum(&self) -> Option<&[f64]> {
        Some(&self.w_star)
    }
}

/// Random strongly convex quadratic with `n` rank-one samples.
///
/// Sample `i` is `A_i = c·g_i g_iᵀ/d + (a1/n)·I` with `g_i ~ N(0, I)`, where
/// `c` rescales the low-rank part so the aggregate spectrum tops out at
/// `a2`; the smallest eigenvalue is then at least `a1`. `b_i ~ N(0, I/n)`.
pub fn gen_quadratic(
    d: usize,
    n: usize,
    seed: u64,
    conditioning: (f64, f64),
) -> Result<QuadraticProblem> {
    let (a1, a2) = conditioning;
    if d == 0 || n == 0 {
        return Err(Error::InvalidParameter("d and n must be positive".into()));
    }
    if !(a1 > 0.0 && a2 > a1) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < a1 < a2, got ({a1}, {a2})"
        )));
    }
    let mut rng = RngStream::new(seed, 0, 0, Lane::Data);
    let mut gs = Vec::with_capacity(n);
    let mut scatter = DMatrix::<f64>::zeros(d, d);
    for _ in 0..n {
        let g = DVector::<f64>::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
        scatter.ger(1.0 / d as f64, &g, &g, 1.0);
        gs.push(g);
    }
    let top = *sym_eigenvalues(&scatter).last().unwrap();
    let c = (a2 - a1) / top;
    let factor_scale = (c / d as f64).sqrt();
    let ridge = a1 / n as f64;
    let b_scale = 1.0 / (n as f64).sqrt();
    let samples = gs
        .into_iter()
        .map(|g| {
            let b = (0..d)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    b_scale * z
                })
                .collect();
            SampleTerm::new(
                DMatrix::from_column_slice(d, 1, (g * factor_scale).as_slice()),
                ridge,
                b,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    QuadraticProblem::from_samples(samples)
}
