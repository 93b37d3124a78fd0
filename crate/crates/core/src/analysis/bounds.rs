use nalgebra::DMatrix;

use crate::linalg::{norm_sq, sym_spectral_norm};
use crate::{Error, Result};

/// Quantizer variance constant `min(d/s², √d/s)`.
pub fn gamma(d: usize, s: u32) -> f64 {
    let (d, s) = (d as f64, f64::from(s));
    (d / (s * s)).min(d.sqrt() / s)
}

/// Stability constant `α²γ + (β − α)²`.
pub fn lambda_of(alpha: f64, beta: f64, gamma: f64) -> f64 {
    alpha * alpha * gamma + (beta - alpha) * (beta - alpha)
}

/// Constants of the quadratic-testbed analysis. `gamma`, `lambda` and `nu`
/// are always derived from the primaries.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundParams {
    pub d: usize,
    pub s: u32,
    /// Second-moment bound on a worker's stochastic gradient.
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    pub a1: f64,
    pub a2: f64,
    /// Bound on the second moment of the averaged gradient noise.
    pub sigma_sq: f64,
    /// Bound on `‖w − w*‖²`.
    pub r_sq: f64,
    pub workers: usize,
}

impl BoundParams {
    pub fn gamma(&self) -> f64 {
        gamma(self.d, self.s)
    }

    pub fn lambda(&self) -> f64 {
        lambda_of(self.alpha, self.beta, self.gamma())
    }

    /// `(β − α) / (1 − ηa₁)`.
    pub fn nu(&self) -> f64 {
        (self.beta - self.alpha) / (1.0 - self.eta * self.a1)
    }

    pub fn is_stable(&self) -> bool {
        self.lambda() < 1.0
    }

    /// Error if `λ >= 1`.
    pub fn require_stable(&self) -> Result<()> {
        let lambda = self.lambda();
        if lambda >= 1.0 {
            return Err(Error::UnstableRegime { lambda });
        }
        Ok(())
    }

    fn require_contraction(&self) -> Result<()> {
        if !(self.eta * self.a1 < 1.0) {
            return Err(Error::Precondition(format!(
                "need eta * a1 < 1, got {}",
                self.eta * self.a1
            )));
        }
        Ok(())
    }
}

/// `Σ_{k<n} x^k`, equal to `n` at `x = 1`.
fn geometric_sum(x: f64, n: usize) -> f64 {
    if (x - 1.0).abs() < 1e-12 {
        n as f64
    } else {
        (1.0 - x.powi(n as i32)) / (1.0 - x)
    }
}

/// Bound on a worker's quantization error second moment at step `t`:
/// `(1 + α²γ·(1 − λᵗ)/(1 − λ))·γB`.
pub fn variance_bound_ecq(t: usize, p: &BoundParams) -> f64 {
    let g = p.gamma();
    (1.0 + p.alpha * p.alpha * g * geometric_sum(p.lambda(), t)) * g * p.b
}

/// `t → ∞` value of [`variance_bound_ecq`] for `λ < 1`.
pub fn variance_bound_limit(p: &BoundParams) -> Result<f64> {
    p.require_stable()?;
    let g = p.gamma();
    Ok((1.0 + p.alpha * p.alpha * g / (1.0 - p.lambda())) * g * p.b)
}

/// Bound on the averaged error `ε = (1/P) Σ ε_p`: the worker bound over `P`.
pub fn pseudo_error_bound(t: usize, p: &BoundParams) -> f64 {
    variance_bound_ecq(t, p) / p.workers as f64
}

/// `H = I − ηA` and its spectral norm.
pub fn spectral_h(a: &DMatrix<f64>, eta: f64) -> (DMatrix<f64>, f64) {
    let n = a.nrows();
    let h = DMatrix::identity(n, n) - a * eta;
    let norm = sym_spectral_norm(&h);
    (h, norm)
}

/// `Θ` for gap `t − t'`, summed directly:
/// `H^gap − Σ_{k=1..gap} α(β − α)^{k−1} H^{gap−k}`.
pub fn theta_gap(gap: usize, alpha: f64, beta: f64, h: &DMatrix<f64>) -> DMatrix<f64> {
    let n = h.nrows();
    let mut powers = vec![DMatrix::identity(n, n)];
    for k in 1..=gap {
        powers.push(h * &powers[k - 1]);
    }
    let mut out = powers[gap].clone();
    for k in 1..=gap {
        out -= &powers[gap - k] * (alpha * (beta - alpha).powi(k as i32 - 1));
    }
    out
}

/// The multiplier of `ε⁽ᵗ'⁾` in the error bound after step `t`.
pub fn theta(t: usize, t_prime: usize, p: &BoundParams, h: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if t_prime > t {
        return Err(Error::Precondition(format!("t' = {t_prime} > t = {t}")));
    }
    Ok(theta_gap(t - t_prime, p.alpha, p.beta, h))
}

/// `Θ(0..=max_gap)` from `Θ(g) = H·Θ(g−1) − α(β − α)^{g−1}·I`.
pub fn theta_sequence(
    max_gap: usize,
    alpha: f64,
    beta: f64,
    h: &DMatrix<f64>,
) -> Vec<DMatrix<f64>> {
    let n = h.nrows();
    let mut out = vec![DMatrix::identity(n, n)];
    let mut decay = 1.0;
    for _ in 1..=max_gap {
        let mut next = h * out.last().unwrap();
        for i in 0..n {
            next[(i, i)] -= alpha * decay;
        }
        decay *= beta - alpha;
        out.push(next);
    }
    out
}

/// `1 − α/(1 − ηa₁)·(1 − ν^gap)/(1 − ν)`, evaluated as
/// `((c − β) + α·ν^gap)/(c − β + α)` with `c = 1 − ηa₁` so that small
/// values keep their relative precision.
pub fn theta_bound_coeff(gap: usize, p: &BoundParams) -> Result<f64> {
    p.require_contraction()?;
    let c = 1.0 - p.eta * p.a1;
    let nu = p.nu();
    if (nu - 1.0).abs() < 1e-12 {
        return Ok(1.0 - p.alpha / c * geometric_sum(nu, gap));
    }
    Ok(((c - p.beta) + p.alpha * nu.powf(gap as f64)) / (c - p.beta + p.alpha))
}

/// Upper bound on `τ⁽ᵗ'⁾/τ_QSGD⁽ᵗ'⁾` at gap `Δt ≥ 1`:
/// `coeff(Δt)²·(1 + α²γ/(1 − λ))`.
pub fn tau_ratio_bound(gap: usize, p: &BoundParams) -> Result<f64> {
    if gap == 0 {
        return Err(Error::Precondition(
            "the ratio is defined for gaps >= 1".into(),
        ));
    }
    p.require_stable()?;
    let c = theta_bound_coeff(gap, p)?;
    Ok(c * c * (1.0 + p.alpha * p.alpha * p.gamma() / (1.0 - p.lambda())))
}

/// Smallest gap after which [`tau_ratio_bound`] stays below `target`,
/// assuming `β = 1 − ηa₁` so that the coefficient is `ν^gap`. `None` when
/// the ratio never decays (`α = 0`).
pub fn tau_ratio_horizon(p: &BoundParams, target: f64) -> Result<Option<usize>> {
    p.require_stable()?;
    p.require_contraction()?;
    let nu = p.nu();
    if !(nu.abs() < 1.0) || p.alpha == 0.0 {
        return Ok(None);
    }
    let k = 1.0 + p.alpha * p.alpha * p.gamma() / (1.0 - p.lambda());
    if nu == 0.0 {
        return Ok(Some(1));
    }
    // ν^{2Δt}·k < target
    let gap = ((target / k).ln() / (2.0 * nu.abs().ln())).floor() as usize + 1;
    Ok(Some(gap.max(1)))
}

/// Spectral norms needed by [`error_bound_rhs`], precomputed up to a horizon.
#[derive(Clone, Debug)]
pub struct BoundTables {
    /// `‖H^k‖²` for `k = 0..=horizon + 1`.
    pub h_pow_norm_sq: Vec<f64>,
    /// `‖Θ(gap)‖²` for `gap = 0..=horizon`.
    pub theta_norm_sq: Vec<f64>,
}

impl BoundTables {
    pub fn new(horizon: usize, p: &BoundParams, h: &DMatrix<f64>) -> Self {
        let n = h.nrows();
        let mut pow = DMatrix::identity(n, n);
        let mut h_pow_norm_sq = Vec::with_capacity(horizon + 2);
        for _ in 0..=horizon + 1 {
            h_pow_norm_sq.push(sym_spectral_norm(&pow).powi(2));
            pow = h * pow;
        }
        let theta_norm_sq = theta_sequence(horizon, p.alpha, p.beta, h)
            .iter()
            .map(|m| sym_spectral_norm(m).powi(2))
            .collect();
        Self {
            h_pow_norm_sq,
            theta_norm_sq,
        }
    }

    pub fn horizon(&self) -> usize {
        self.theta_norm_sq.len() - 1
    }
}

/// Right-hand side of the distance bound after step `t`:
///
/// `R²‖H^{t+1}‖² + η²σ² Σ_{t'≤t} ‖H^{t'}‖² + η²E_t + η² Σ_{t'<t} ‖Θ(t−t')‖²·E_{t'}`
///
/// where `E_{t'}` is `eps_bounds[t']`.
pub fn error_bound_rhs(
    t: usize,
    p: &BoundParams,
    tables: &BoundTables,
    eps_bounds: &[f64],
) -> Result<f64> {
    if t > tables.horizon() || eps_bounds.len() <= t {
        return Err(Error::Precondition(format!("tables do not reach t = {t}")));
    }
    let eta2 = p.eta * p.eta;
    let noise: f64 = tables.h_pow_norm_sq[..=t].iter().sum();
    let past: f64 = (0..t)
        .map(|tp| tables.theta_norm_sq[t - tp] * eps_bounds[tp])
        .sum();
    Ok(p.r_sq * tables.h_pow_norm_sq[t + 1]
        + eta2 * p.sigma_sq * noise
        + eta2 * eps_bounds[t]
        + eta2 * past)
}

/// The full bound curve `t = 0..=horizon` with `E_{t'}` from
/// [`pseudo_error_bound`], in `O(horizon²)`.
pub fn error_bound_curve(p: &BoundParams, tables: &BoundTables) -> Vec<f64> {
    let eps: Vec<f64> = (0..=tables.horizon())
        .map(|t| pseudo_error_bound(t, p))
        .collect();
    (0..=tables.horizon())
        .map(|t| error_bound_rhs(t, p, tables, &eps).unwrap())
        .collect()
}

/// Mean of squared norms and its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub count: usize,
}

/// `E‖x‖²` over `samples` by two passes.
pub fn empirical_second_moment<V: AsRef<[f64]>>(samples: &[V]) -> Result<MomentEstimate> {
    if samples.len() < 2 {
        return Err(Error::Precondition("need at least two samples".into()));
    }
    let sq: Vec<f64> = samples.iter().map(|v| norm_sq(v.as_ref())).collect();
    let n = sq.len() as f64;
    let mean = sq.iter().sum::<f64>() / n;
    let var = sq.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    Ok(MomentEstimate {
        mean,
        std_err: (var / n).sqrt(),
        count: sq.len(),
    })
}

/// Streaming (Welford) counterpart of [`empirical_second_moment`].
#[derive(Clone, Debug, Default)]
pub struct SecondMoment {
    count: usize,
    mean: f64,
    m2: f64,
}

impl SecondMoment {
    pub fn push(&mut self, v: &[f64]) {
        self.push_value(norm_sq(v));
    }

    pub fn push_value(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn estimate(&self) -> Result<MomentEstimate> {
        if self.count < 2 {
            return Err(Error::Precondition("need at least two samples".into()));
        }
        let n = self.count as f64;
        Ok(MomentEstimate {
            mean: self.mean,
            std_err: (self.m2 / (n - 1.0) / n).sqrt(),
            count: self.count,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sym_eigenvalues;

    fn params(alpha: f64, beta: f64) -> BoundParams {
        BoundParams {
            d: 256,
            s: 4,
            b: 2.0,
            alpha,
            beta,
            eta: 0.1,
            a1: 1.0,
            a2: 5.0,
            sigma_sq: 0.5,
            r_sq: 3.0,
            workers: 4,
        }
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma(256, 4), 4.0);
        assert_eq!(gamma(1, 1), 1.0);
        assert_eq!(gamma(16, 4), 1.0);
        assert_eq!(gamma(100, 10), 1.0);
    }

    #[test]
    fn lambda_examples() {
        assert!((lambda_of(0.2, 0.9, 4.0) - 0.65).abs() < 1e-15);
        assert_eq!(lambda_of(0.0, 1.0, 7.0), 1.0);
        assert_eq!(lambda_of(0.0, 0.0, 7.0), 0.0);
    }

    #[test]
    fn variance_bound_cases() {
        let p = params(0.2, 0.9);
        let gb = p.gamma() * p.b;
        assert_eq!(variance_bound_ecq(0, &p), gb);
        let q = params(0.0, 0.9);
        for t in [0, 1, 50, 1000] {
            assert_eq!(variance_bound_ecq(t, &q), q.gamma() * q.b);
        }
        let lim = variance_bound_limit(&p).unwrap();
        assert!((variance_bound_ecq(10_000, &p) - lim).abs() < 1e-12 * lim);
        // γ = 1 and α = β = 1 give λ = 1, where the geometric sum is t
        let mut one = params(1.0, 1.0);
        one.d = 1;
        one.s = 1;
        assert_eq!(one.lambda(), 1.0);
        assert_eq!(variance_bound_ecq(5, &one), 6.0 * one.b);
    }

    #[test]
    fn h_norm_matches_eigensolver() {
        let (h, n) = spectral_h(&DMatrix::identity(3, 3), 0.5);
        assert_eq!(n, 0.5);
        assert_eq!(h, DMatrix::identity(3, 3) * 0.5);
        let (_, n0) = spectral_h(&DMatrix::from_diagonal_element(2, 2, 4.0), 0.0);
        assert_eq!(n0, 1.0);
        let g = DMatrix::from_fn(5, 5, |i, j| ((i * 7 + j * 3) as f64).sin());
        let a = &g * g.transpose() + DMatrix::identity(5, 5);
        let ev = sym_eigenvalues(&a);
        let (_, n) = spectral_h(&a, 0.05);
        let expect = (1.0 - 0.05 * ev[0]).abs().max((1.0 - 0.05 * ev[4]).abs());
        assert!((n - expect).abs() < 1e-10);
    }

    #[test]
    fn theta_cases() {
        let h = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.9, 0.5, -0.2]));
        let p = params(0.3, 0.8);
        assert_eq!(theta(4, 4, &p, &h).unwrap(), DMatrix::identity(3, 3));
        let one = theta(5, 4, &p, &h).unwrap();
        assert!((one - (&h - DMatrix::identity(3, 3) * 0.3)).norm() < 1e-15);
        let q = params(0.0, 0.8);
        let t = theta(6, 1, &q, &h).unwrap();
        assert!((t - h.pow(5)).norm() < 1e-14);
        assert!(theta(1, 2, &p, &h).is_err());
    }

    #[test]
    fn theta_recursion_matches_direct_sum() {
        let g = DMatrix::from_fn(4, 4, |i, j| ((i + 2 * j) as f64).cos());
        let a = &g * g.transpose() * 0.1 + DMatrix::identity(4, 4);
        let (h, _) = spectral_h(&a, 0.2);
        let seq = theta_sequence(30, 0.15, 0.7, &h);
        for gap in [0, 1, 2, 7, 30] {
            let direct = theta_gap(gap, 0.15, 0.7, &h);
            assert!(
                (&seq[gap] - &direct).norm() < 1e-12 * (1.0 + direct.norm()),
                "gap {gap}"
            );
        }
    }

    #[test]
    fn theta_coefficient_cases() {
        let q = params(0.0, 0.5);
        for gap in [1, 5, 100] {
            assert_eq!(theta_bound_coeff(gap, &q).unwrap(), 1.0);
        }
        let mut p = params(0.2, 0.0);
        p.beta = 1.0 - p.eta * p.a1;
        let nu = p.nu();
        for gap in [1, 3, 10, 40] {
            let c = theta_bound_coeff(gap, &p).unwrap();
            assert!((c - nu.powi(gap as i32)).abs() < 1e-12, "gap {gap}");
        }
        assert!(theta_bound_coeff(2000, &p).unwrap() < 1e-12);
        let far = theta_bound_coeff(300, &p).unwrap();
        assert!((far / nu.powi(300) - 1.0).abs() < 1e-10);

        let mut r = params(0.15, 0.6);
        let c = 1.0 - r.eta * r.a1;
        for gap in [1, 4, 50] {
            let direct = 1.0 - r.alpha / c * (1.0 - r.nu().powi(gap as i32)) / (1.0 - r.nu());
            assert!((theta_bound_coeff(gap, &r).unwrap() - direct).abs() < 1e-12);
        }
        r.beta = c + r.alpha;
        assert!((theta_bound_coeff(3, &r).unwrap() - (1.0 - 3.0 * r.alpha / c)).abs() < 1e-12);
        p.eta = 2.0;
        assert!(matches!(
            theta_bound_coeff(1, &p),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn tau_ratio_cases() {
        let mut p = params(0.1, 0.0);
        p.beta = 1.0 - p.eta * p.a1;
        let h = tau_ratio_horizon(&p, 1e-2).unwrap().unwrap();
        let mut prev = f64::INFINITY;
        for gap in 1..=h + 5 {
            let r = tau_ratio_bound(gap, &p).unwrap();
            assert!(r < prev);
            prev = r;
        }
        assert!(tau_ratio_bound(h, &p).unwrap() < 1e-2);
        assert!(tau_ratio_bound(h - 1, &p).unwrap() >= 1e-2);
        let q = params(0.0, 0.5);
        assert_eq!(tau_ratio_bound(9, &q).unwrap(), 1.0);
        assert_eq!(tau_ratio_horizon(&q, 1e-2).unwrap(), None);
        assert!(tau_ratio_bound(0, &p).is_err());
        let unstable = params(0.6, 1.0);
        assert!(matches!(
            tau_ratio_bound(1, &unstable),
            Err(Error::UnstableRegime { .. })
        ));
    }

    #[test]
    fn rhs_cases() {
        let p = params(0.2, 0.9);
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 5.0]));
        let (h, hn) = spectral_h(&a, p.eta);
        let tables = BoundTables::new(10, &p, &h);
        let curve = error_bound_curve(&p, &tables);
        let expect0 =
            p.r_sq * hn * hn + p.eta * p.eta * p.sigma_sq + p.eta * p.eta * p.gamma() * p.b / 4.0;
        assert!((curve[0] - expect0).abs() < 1e-12);

        let mut quiet = p.clone();
        quiet.sigma_sq = 0.0;
        let zeros = vec![0.0; 11];
        let r = error_bound_rhs(7, &quiet, &tables, &zeros).unwrap();
        assert!((r - p.r_sq * hn.powi(16)).abs() < 1e-12);

        let mut frozen = p.clone();
        frozen.eta = 1e-9;
        let (h0, _) = spectral_h(&a, frozen.eta);
        let t0 = BoundTables::new(5, &frozen, &h0);
        assert!((error_bound_curve(&frozen, &t0)[5] - p.r_sq).abs() < 1e-6);
    }

    #[test]
    fn second_moment_estimators() {
        let v = vec![vec![1.0, 2.0]; 5];
        let e = empirical_second_moment(&v).unwrap();
        assert_eq!((e.mean, e.std_err), (5.0, 0.0));
        let pm = vec![vec![3.0, -4.0], vec![-3.0, 4.0]];
        assert_eq!(empirical_second_moment(&pm).unwrap().mean, 25.0);
        assert!(empirical_second_moment(&[vec![1.0]]).is_err());

        let samples: Vec<Vec<f64>> = (0..500)
            .map(|i| vec![(i as f64 * 0.37).sin() * 1e3, (i as f64).cos()])
            .collect();
        let two = empirical_second_moment(&samples).unwrap();
        let mut w = SecondMoment::default();
        samples.iter().for_each(|s| w.push(s));
        let one = w.estimate().unwrap();
        assert!((one.mean - two.mean).abs() <= 1e-12 * two.mean);
        assert!((one.std_err - two.std_err).abs() <= 1e-9 * two.std_err);
    }
}
