//! Small dense-vector helpers and symmetric-matrix utilities.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `y += a·x`
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Spectral norm of a symmetric matrix: largest absolute eigenvalue.
pub fn sym_spectral_norm(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// Result of a symmetric positive-definite solve.
#[derive(Clone, Debug)]
pub struct SpdSolution {
    pub x: Vec<f64>,
    pub condition_number: f64,
}

impl SpdSolution {
    /// Solves with condition number above `1e12` deserve a warning.
    pub fn warning(&self) -> Option<String> {
        (self.condition_number > 1e12).then(|| {
            format!(
                "ill-conditioned solve (condition number {:.3e})",
                self.condition_number
            )
        })
    }
}

/// Solve `m·x = rhs` for symmetric positive-definite `m`.
pub fn solve_spd(m: &DMatrix<f64>, rhs: &[f64]) -> Result<SpdSolution> {
    let ev = sym_eigenvalues(m);
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    if lo <= 0.0 {
        return Err(Error::Singular(format!(
            "smallest eigenvalue {lo:.3e} is not positive"
        )));
    }
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Singular("Cholesky factorization failed".into()))?;
    let x = chol.solve(&DVector::from_column_slice(rhs));
    Ok(SpdSolution {
        x: x.iter().copied().collect(),
        condition_number: hi / lo,
    })
}
