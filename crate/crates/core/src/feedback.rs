//! Accumulated quantization error and gradient compensation.
//!
//! Each worker keeps `h`, the time-decayed sum of what quantization threw
//! away. Before quantizing it sends `g + α·h`, and afterwards it folds the
//! new error in with `h ← β·h + (g − g̃)`.

use crate::{Error, Result};

/// Compensation coefficient `alpha >= 0` and decay `beta ∈ [0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeedbackConfig {
    alpha: f64,
    beta: f64,
}

impl FeedbackConfig {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be >= 0, got {alpha}"
            )));
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidParameter(format!(
                "beta must be in [0, 1], got {beta}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// No compensation: plain quantized SGD.
    pub fn disabled() -> Self {
        Self {
            alpha: 0.0,
            beta: 1.0,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Stability constant `α²γ + (β − α)²`.
    pub fn lambda(&self, gamma: f64) -> f64 {
        self.alpha * self.alpha * gamma + (self.beta - self.alpha).powi(2)
    }
}

impl Default for FeedbackConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            beta: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeedbackState {
    h: Vec<f64>,
    iteration: u64,
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

impl FeedbackState {
    pub fn new(dim: usize) -> Self {
        Self {
            h: vec![0.0; dim],
            iteration: 0,
        }
    }

    /// Restore a checkpointed state verbatim.
    pub fn restore(h: Vec<f64>, iteration: u64) -> Self {
        Self { h, iteration }
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn dim(&self) -> usize {
        self.h.len()
    }

    pub fn norm_sq(&self) -> f64 {
        self.h.iter().map(|x| x * x).sum()
    }

    /// `g + α·h`; the state is left untouched.
    pub fn compensate(&self, g: &[f64], cfg: &FeedbackConfig) -> Result<Vec<f64>> {
        check_dim(self.h.len(), g.len())?;
        Ok(g.iter()
            .zip(&self.h)
            .map(|(gi, hi)| gi + cfg.alpha * hi)
            .collect())
    }

    /// `h ← β·h + (g − g̃)` where `g̃` is the dequantized transmitted vector.
    pub fn update(&mut self, g: &[f64], g_tilde: &[f64], cfg: &FeedbackConfig) -> Result<()> {
        check_dim(self.h.len(), g.len())?;
        check_dim(self.h.len(), g_tilde.len())?;
        for ((h, gi), gt) in self.h.iter_mut().zip(g).zip(g_tilde) {
            *h = cfg.beta * *h + (gi - gt);
        }
        self.iteration += 1;
        Ok(())
    }
}

/// Closed form of the accumulated error in terms of past quantization errors
/// `ε⁽ᵗ'⁾ = g̃⁽ᵗ'⁾ − (g⁽ᵗ'⁾ + α·h⁽ᵗ'⁾)`:
///
/// `h⁽ᵗ⁾ = −Σ_{t'<t} (β − α)^{t−1−t'} ε⁽ᵗ'⁾`.
///
/// This is an independent route to the value `FeedbackState::update`
/// maintains incrementally.
pub fn reconstruct_error_history(
    errors: &[Vec<f64>],
    cfg: &FeedbackConfig,
    dim: usize,
) -> Vec<f64> {
    let t = errors.len();
    let decay = cfg.beta - cfg.alpha;
    let mut h = vec![0.0; dim];
    for (tp, eps) in errors.iter().enumerate() {
        let w = decay.powi((t - 1 - tp) as i32);
        for (hi, e) in h.iter_mut().zip(eps) {
            *hi -= w * e;
        }
    }
    h
}
