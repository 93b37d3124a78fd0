use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;

use super::bounds::{
    error_bound_curve, gamma, spectral_h, tau_ratio_bound, tau_ratio_horizon, theta_bound_coeff,
    theta_sequence, variance_bound_ecq, BoundParams, BoundTables,
};
use crate::feedback::{reconstruct_error_history, FeedbackConfig};
use crate::linalg::{dist_sq, norm_sq, sym_eigenvalues, sym_spectral_norm};
use crate::problems::{gen_quadratic, Objective, QuadraticProblem};
use crate::quantizer::{quantize, NormKind, QuantScheme};
use crate::rng::{Lane, RngStream};
use crate::sim::{run_experiment_traced, CodecKind, TrainerConfig, WHOLE_VECTOR};
use crate::{Error, Result};

/// Safety factor applied to measured constants.
pub const SAFETY: f64 = 1.1;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub bound: f64,
    pub note: String,
}

impl CheckResult {
    fn at_most(name: &str, measured: f64, bound: f64, note: String) -> Self {
        Self {
            name: name.into(),
            passed: measured <= bound,
            measured,
            bound,
            note,
        }
    }
}

impl std::fmt::Display for CheckResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {}: measured {:.6e}, bound {:.6e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.bound
        )?;
        if !self.note.is_empty() {
            write!(f, " ({})", self.note)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub config: Vec<(String, String)>,
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn random_vector(d: usize, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = RngStream::new(seed, index, 0, Lane::Probe);
    (0..d).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Per-coordinate Monte-Carlo mean of the dequantized output against `v`,
/// as the largest z-score over coordinates.
pub fn check_unbiased(
    d: usize,
    scheme: &QuantScheme,
    draws: usize,
    seed: u64,
) -> Result<CheckResult> {
    let v = random_vector(d, seed, 0);
    let mut sum = vec![0.0; d];
    let mut sum_sq = vec![0.0; d];
    for k in 0..draws {
        let mut rng = RngStream::new(seed, 1, k as u64, Lane::Quantize);
        let q = quantize(&v, scheme, &mut rng)?.dequantize();
        for ((s, s2), x) in sum.iter_mut().zip(sum_sq.iter_mut()).zip(&q) {
            *s += x;
            *s2 += x * x;
        }
    }
    let n = draws as f64;
    let mut worst: f64 = 0.0;
    for i in 0..d {
        let mean = sum[i] / n;
        let var = ((sum_sq[i] - n * mean * mean) / (n - 1.0)).max(0.0);
        let se = (var / n).sqrt();
        let z = if se > 0.0 {
            (mean - v[i]).abs() / se
        } else if (mean - v[i]).abs() <= 1e-12 * v[i].abs().max(1e-300) {
            0.0
        } else {
            f64::INFINITY
        };
        worst = worst.max(z);
    }
    Ok(CheckResult::at_most(
        "quantizer unbiasedness",
        worst,
        4.0,
        format!(
            "d = {d}, s = {}, {draws} draws, max z-score",
            scheme.levels()
        ),
    ))
}

/// Largest ratio of the empirical `E‖Q(v) − v‖²` to `γ‖v‖²` over random
/// vectors, against `1.05`.
pub fn check_variance(
    d: usize,
    scheme: &QuantScheme,
    vectors: usize,
    draws: usize,
    seed: u64,
) -> Result<CheckResult> {
    let g = gamma(scheme.bucket_size().min(d), scheme.levels());
    let mut worst: f64 = 0.0;
    for j in 0..vectors {
        let mut v = random_vector(d, seed, j as u64 + 1);
        // vary scale and sparsity
        let scale = 10f64.powi(j as i32 % 5 - 2);
        for (i, x) in v.iter_mut().enumerate() {
            *x *= if (i + j) % (1 + j % 4) == 0 {
                scale
            } else {
                0.0
            };
        }
        let vn = norm_sq(&v);
        if vn == 0.0 {
            continue;
        }
        let mut err = 0.0;
        for k in 0..draws {
            let mut rng = RngStream::new(seed, j as u64 + 1, k as u64, Lane::Quantize);
            err += dist_sq(&quantize(&v, scheme, &mut rng)?.dequantize(), &v);
        }
        worst = worst.max(err / draws as f64 / (g * vn));
    }
    Ok(CheckResult::at_most(
        "quantizer variance bound",
        worst,
        1.05,
        format!("max E|Q(v)-v|^2 / (gamma |v|^2) over {vectors} vectors, gamma = {g}"),
    ))
}

/// Largest relative gap between the maintained `h` of every worker and the
/// closed form built from its recorded quantization errors.
pub fn check_h_identity<P: Objective + ?Sized>(
    problem: &P,
    cfg: &TrainerConfig,
) -> Result<CheckResult> {
    let fb = cfg
        .effective_feedback()
        .ok_or_else(|| Error::InvalidParameter("codec keeps no error state".into()))?;
    let mut errors: Vec<Vec<Vec<f64>>> = vec![Vec::new(); cfg.workers];
    let mut worst: f64 = 0.0;
    let d = problem.dim();
    run_experiment_traced(cfg, problem, |tr| {
        for (p, (out, wk)) in tr.outputs.iter().zip(tr.workers).enumerate() {
            errors[p].push(out.quant_error.clone());
            let rec = reconstruct_error_history(&errors[p], &fb, d);
            let h = wk.feedback().h();
            let rel = dist_sq(h, &rec).sqrt() / norm_sq(h).sqrt().max(f64::MIN_POSITIVE);
            worst = worst.max(if dist_sq(h, &rec) == 0.0 { 0.0 } else { rel });
        }
    })?;
    Ok(CheckResult::at_most(
        "error-history identity",
        worst,
        1e-10,
        format!(
            "alpha = {}, beta = {}, {} steps",
            fb.alpha(),
            fb.beta(),
            cfg.iterations
        ),
    ))
}

/// Per-step averages over an ensemble of seeds.
#[derive(Clone, Debug, Default)]
pub struct EnsembleStats {
    pub seeds: usize,
    /// `E‖w⁽ᵗ⁺¹⁾ − w*‖²`, indexed by step `t`.
    pub dist_sq: Vec<f64>,
    /// `E‖ε_p⁽ᵗ⁾‖²` averaged over workers.
    pub worker_error_sq: Vec<f64>,
    /// `E‖ε⁽ᵗ⁾‖²` of the worker average.
    pub pseudo_error_sq: Vec<f64>,
    /// `E‖ξ⁽ᵗ⁾‖²` of the averaged gradient noise.
    pub noise_sq: Vec<f64>,
    /// `E‖h_p‖²` after step `t`.
    pub h_norm_sq: Vec<f64>,
    /// Largest `‖g_p‖²` seen.
    pub max_grad_sq: f64,
    /// Largest `‖w − w*‖²` seen, including the start.
    pub max_dist_sq: f64,
}

impl EnsembleStats {
    fn add(&mut self, o: &EnsembleStats) {
        let add = |a: &mut Vec<f64>, b: &[f64]| {
            if a.is_empty() {
                a.resize(b.len(), 0.0);
            }
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        };
        self.seeds += o.seeds;
        add(&mut self.dist_sq, &o.dist_sq);
        add(&mut self.worker_error_sq, &o.worker_error_sq);
        add(&mut self.pseudo_error_sq, &o.pseudo_error_sq);
        add(&mut self.noise_sq, &o.noise_sq);
        add(&mut self.h_norm_sq, &o.h_norm_sq);
        self.max_grad_sq = self.max_grad_sq.max(o.max_grad_sq);
        self.max_dist_sq = self.max_dist_sq.max(o.max_dist_sq);
    }

    fn finish(mut self) -> Self {
        let k = self.seeds as f64;
        for v in [
            &mut self.dist_sq,
            &mut self.worker_error_sq,
            &mut self.pseudo_error_sq,
            &mut self.noise_sq,
            &mut self.h_norm_sq,
        ] {
            v.iter_mut().for_each(|x| *x /= k);
        }
        self
    }
}

fn single_run<P: Objective + ?Sized>(problem: &P, cfg: &TrainerConfig) -> Result<EnsembleStats> {
    let w_star = problem
        .optimum()
        .ok_or_else(|| Error::Precondition("ensemble statistics need a known optimum".into()))?;
    let p = cfg.workers as f64;
    let mut st = EnsembleStats {
        seeds: 1,
        max_dist_sq: norm_sq(w_star),
        ..Default::default()
    };
    run_experiment_traced(cfg, problem, |tr| {
        let d = tr.w.len();
        let full = problem.full_gradient(tr.w_before);
        let mut mean_g = vec![0.0; d];
        let mut mean_e = vec![0.0; d];
        let mut werr = 0.0;
        for o in tr.outputs {
            st.max_grad_sq = st.max_grad_sq.max(norm_sq(&o.gradient));
            werr += norm_sq(&o.quant_error);
            for i in 0..d {
                mean_g[i] += o.gradient[i] / p;
                mean_e[i] += o.quant_error[i] / p;
            }
        }
        let dist = dist_sq(tr.w, w_star);
        st.max_dist_sq = st.max_dist_sq.max(dist);
        st.dist_sq.push(dist);
        st.worker_error_sq.push(werr / p);
        st.pseudo_error_sq.push(norm_sq(&mean_e));
        st.noise_sq.push(dist_sq(&mean_g, &full));
        st.h_norm_sq.push(tr.row.h_norm_sq_mean);
    })?;
    Ok(st)
}

/// Run `seeds` independent seeds (`cfg.seed + k`) and average per step.
/// Seeds may run in parallel; the result does not depend on it.
pub fn run_ensemble<P: Objective + ?Sized>(
    problem: &P,
    cfg: &TrainerConfig,
    seeds: usize,
) -> Result<EnsembleStats> {
    let one = |k: usize| {
        let mut c = cfg.clone();
        c.seed = cfg.seed.wrapping_add(k as u64);
        single_run(problem, &c)
    };
    #[cfg(feature = "parallel")]
    let runs: Vec<Result<EnsembleStats>> = (0..seeds).into_par_iter().map(one).collect();
    #[cfg(not(feature = "parallel"))]
    let runs: Vec<Result<EnsembleStats>> = (0..seeds).map(one).collect();
    let mut total = EnsembleStats::default();
    for r in runs {
        total.add(&r?);
    }
    Ok(total.finish())
}

/// Bound constants for a quadratic from measured ensemble statistics, each
/// scaled by [`SAFETY`].
pub fn measured_params(
    problem: &QuadraticProblem,
    cfg: &TrainerConfig,
    stats: &EnsembleStats,
) -> BoundParams {
    let d = problem.dim();
    BoundParams {
        d: cfg.scheme.bucket_size().min(d),
        s: cfg.scheme.levels(),
        b: SAFETY * stats.max_grad_sq,
        alpha: cfg.feedback.alpha(),
        beta: cfg.feedback.beta(),
        eta: cfg.eta,
        a1: problem.a1(),
        a2: problem.a2(),
        sigma_sq: SAFETY * stats.noise_sq.iter().fold(0.0, |m: f64, &x| m.max(x)),
        r_sq: SAFETY * stats.max_dist_sq,
        workers: cfg.workers,
    }
}

/// Worker quantization error against the variance bound at every step.
pub fn check_variance_recursion(stats: &EnsembleStats, p: &BoundParams) -> CheckResult {
    let (mut worst, mut at) = (0.0f64, 0);
    for (t, &e) in stats.worker_error_sq.iter().enumerate() {
        let r = e / variance_bound_ecq(t, p);
        if r > worst {
            (worst, at) = (r, t);
        }
    }
    CheckResult::at_most(
        "accumulated-error variance bound",
        worst,
        1.0,
        format!(
            "max E|eps_p|^2 / bound over {} steps (worst at t = {at}), {} seeds, lambda = {:.4}",
            stats.worker_error_sq.len(),
            stats.seeds,
            p.lambda()
        ),
    )
}

/// Empirical distance to the optimum against the bound curve at every step.
pub fn check_distance_bound(
    stats: &EnsembleStats,
    p: &BoundParams,
    a: &DMatrix<f64>,
) -> CheckResult {
    let horizon = stats.dist_sq.len().saturating_sub(1);
    let (h, _) = spectral_h(a, p.eta);
    let tables = BoundTables::new(horizon, p, &h);
    let curve = error_bound_curve(p, &tables);
    let (mut worst, mut at) = (0.0f64, 0);
    for (t, (&e, &b)) in stats.dist_sq.iter().zip(&curve).enumerate() {
        let r = e / b;
        if r > worst {
            (worst, at) = (r, t);
        }
    }
    CheckResult::at_most(
        "distance-to-optimum bound",
        worst,
        1.0,
        format!(
            "max E|w-w*|^2 / bound for t <= {horizon} (worst at t = {at}), {} seeds",
            stats.seeds
        ),
    )
}

/// Grid of `(α, β)` in the stable regime with `β` strictly below `1 − ηa₁`.
pub fn theta_grid(eta: f64, a1: f64) -> Vec<(f64, f64)> {
    let c = 1.0 - eta * a1;
    let mut out = Vec::new();
    for alpha in [0.01, 0.05, 0.1, 0.2, 0.3] {
        for frac in [0.5, 0.7, 0.85, 0.95] {
            out.push((alpha, frac * c));
        }
    }
    out
}

pub const THETA_GAPS: [usize; 5] = [1, 5, 20, 100, 400];

fn theta_params(eta: f64, a1: f64, a2: f64, d: usize, alpha: f64, beta: f64) -> BoundParams {
    BoundParams {
        d,
        s: 1,
        b: 0.0,
        alpha,
        beta,
        eta,
        a1,
        a2,
        sigma_sq: 0.0,
        r_sq: 0.0,
        workers: 1,
    }
}

/// `‖Θ(gap)‖ ≤ coeff(gap)·‖H^gap‖ + 1e-10` over the `(α, β, gap)` grid.
pub fn check_theta_norm(
    a: &DMatrix<f64>,
    eta: f64,
    grid: &[(f64, f64)],
    gaps: &[usize],
) -> Result<CheckResult> {
    let ev = sym_eigenvalues(a);
    let (a1, a2) = (ev[0], ev[ev.len() - 1]);
    let (h, _) = spectral_h(a, eta);
    let max_gap = gaps.iter().copied().max().unwrap_or(0);
    let mut pow_norm = vec![1.0];
    let mut pow = DMatrix::identity(h.nrows(), h.nrows());
    for _ in 0..max_gap {
        pow = &h * pow;
        pow_norm.push(sym_spectral_norm(&pow));
    }
    let mut worst = f64::NEG_INFINITY;
    let mut points = 0;
    for &(alpha, beta) in grid {
        let p = theta_params(eta, a1, a2, a.nrows(), alpha, beta);
        let thetas = theta_sequence(max_gap, alpha, beta, &h);
        for &g in gaps {
            let lhs = sym_spectral_norm(&thetas[g]);
            let rhs = theta_bound_coeff(g, &p)? * pow_norm[g];
            worst = worst.max(lhs - rhs);
            points += 1;
        }
    }
    Ok(CheckResult::at_most(
        "theta norm bound",
        worst,
        1e-10,
        format!("max |Theta| - coeff |H^gap| over {points} grid points"),
    ))
}

/// `Θ(gap) ⪯ coeff(gap)·H^gap` (largest eigenvalue of the difference) over
/// the grid plus the boundary `β = 1 − ηa₁`.
pub fn check_theta_loewner(
    a: &DMatrix<f64>,
    eta: f64,
    grid: &[(f64, f64)],
    gaps: &[usize],
) -> Result<CheckResult> {
    let ev = sym_eigenvalues(a);
    let (a1, a2) = (ev[0], ev[ev.len() - 1]);
    let (h, _) = spectral_h(a, eta);
    let max_gap = gaps.iter().copied().max().unwrap_or(0);
    let mut pows = vec![DMatrix::identity(h.nrows(), h.nrows())];
    for k in 0..max_gap {
        pows.push(&h * &pows[k]);
    }
    let c = 1.0 - eta * a1;
    let mut all: Vec<(f64, f64)> = grid.to_vec();
    all.extend([0.01, 0.1, 0.3].map(|alpha| (alpha, c)));
    let mut worst = f64::NEG_INFINITY;
    for &(alpha, beta) in &all {
        let p = theta_params(eta, a1, a2, a.nrows(), alpha, beta);
        let thetas = theta_sequence(max_gap, alpha, beta, &h);
        for &g in gaps {
            let diff = &thetas[g] - &pows[g] * theta_bound_coeff(g, &p)?;
            let top = *sym_eigenvalues(&diff).last().unwrap();
            worst = worst.max(top);
        }
    }
    Ok(CheckResult::at_most(
        "theta semidefinite bound",
        worst,
        1e-10,
        format!(
            "largest eigenvalue of Theta - coeff H^gap, {} (alpha, beta) pairs",
            all.len()
        ),
    ))
}

/// With `β = 1 − ηa₁` the ratio bound must strictly decrease in the gap and
/// drop below `0.01` at the computed horizon; with `α = 0` it must be 1.
pub fn check_tau_decay(p: &BoundParams) -> Result<CheckResult> {
    let mut p = p.clone();
    p.beta = 1.0 - p.eta * p.a1;
    if p.alpha == 0.0 {
        let worst = (1..=200)
            .map(|g| tau_ratio_bound(g, &p).map(|r| (r - 1.0).abs()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        return Ok(CheckResult {
            name: "tau ratio decay".into(),
            passed: worst == 0.0,
            measured: 1.0 + worst,
            bound: 1.0,
            note: "QSGD baseline".into(),
        });
    }
    let horizon = tau_ratio_horizon(&p, 1e-2)?
        .ok_or_else(|| Error::Precondition("ratio does not decay for these parameters".into()))?;
    let mut prev = f64::INFINITY;
    let mut monotone = true;
    for g in 1..=horizon + 50 {
        let r = tau_ratio_bound(g, &p)?;
        monotone &= r < prev || (r == 0.0 && prev == 0.0);
        prev = r;
    }
    let at = tau_ratio_bound(horizon, &p)?;
    Ok(CheckResult {
        name: "tau ratio decay".into(),
        passed: monotone && at < 1e-2,
        measured: at,
        bound: 1e-2,
        note: format!(
            "beta = 1 - eta a1 = {:.6}, horizon {horizon}, strictly decreasing: {monotone}",
            p.beta
        ),
    })
}

/// `P·E‖ε‖²` should not depend on `P`: every value within 20% of the
/// single-worker one.
pub fn check_pseudo_error_scaling(
    problem: &QuadraticProblem,
    cfg: &TrainerConfig,
    workers: &[usize],
    seeds: usize,
) -> Result<CheckResult> {
    let mut scaled = Vec::new();
    for &p in workers {
        let mut c = cfg.clone();
        c.workers = p;
        let st = run_ensemble(problem, &c, seeds)?;
        let mean = st.pseudo_error_sq.iter().sum::<f64>() / st.pseudo_error_sq.len() as f64;
        scaled.push(mean * p as f64);
    }
    let base = scaled[0];
    let worst = scaled
        .iter()
        .map(|x| (x / base - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(CheckResult::at_most(
        "pseudo-error 1/P scaling",
        worst,
        0.2,
        format!("P * E|eps|^2 for P in {workers:?}: {scaled:?}"),
    ))
}

/// Parameters of `verify-bounds`.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    pub d: usize,
    pub n: usize,
    pub conditioning: (f64, f64),
    pub eta: f64,
    pub levels: u32,
    pub alpha: f64,
    pub beta: f64,
    pub workers: usize,
    pub batch_size: usize,
    /// Steps in the distance and variance checks.
    pub iterations: usize,
    pub seeds: usize,
    pub seed: u64,
    pub mc_draws: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            d: 16,
            n: 64,
            conditioning: (1.0, 10.0),
            eta: 0.05,
            levels: 4,
            alpha: 0.2,
            beta: 0.9,
            workers: 4,
            batch_size: 4,
            iterations: 501,
            seeds: 200,
            seed: 0,
            mc_draws: 20_000,
        }
    }
}

/// Sample count of the problem used by the 1/P scaling check.
pub const SCALING_SAMPLES: usize = 4096;

/// Largest dimension for which the matrix checks run.
pub const MAX_VERIFY_DIM: usize = 64;

impl VerifyConfig {
    pub fn lambda(&self) -> f64 {
        FeedbackConfig::new(self.alpha, self.beta)
            .map(|f| f.lambda(gamma(self.d, self.levels)))
            .unwrap_or(f64::NAN)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.d > MAX_VERIFY_DIM {
            return Err(Error::Precondition(format!(
                "verification needs 1 <= d <= {MAX_VERIFY_DIM}, got {}",
                self.d
            )));
        }
        FeedbackConfig::new(self.alpha, self.beta)?;
        let lambda = self.lambda();
        if lambda >= 1.0 {
            return Err(Error::UnstableRegime { lambda });
        }
        if self.seeds < 2 || self.iterations == 0 {
            return Err(Error::InvalidParameter(
                "need at least 2 seeds and 1 iteration".into(),
            ));
        }
        Ok(())
    }

    pub fn trainer(&self) -> Result<TrainerConfig> {
        Ok(TrainerConfig {
            eta: self.eta,
            workers: self.workers,
            batch_size: self.batch_size,
            iterations: self.iterations,
            codec: CodecKind::Ecq,
            scheme: QuantScheme::new(self.levels, NormKind::L2, WHOLE_VECTOR)?,
            feedback: FeedbackConfig::new(self.alpha, self.beta)?,
            seed: self.seed,
        })
    }

    pub fn describe(&self) -> Vec<(String, String)> {
        [
            ("verify.d", self.d.to_string()),
            ("verify.n", self.n.to_string()),
            ("verify.a1", format!("{:?}", self.conditioning.0)),
            ("verify.a2", format!("{:?}", self.conditioning.1)),
            ("verify.eta", format!("{:?}", self.eta)),
            ("verify.levels", self.levels.to_string()),
            ("verify.alpha", format!("{:?}", self.alpha)),
            ("verify.beta", format!("{:?}", self.beta)),
            ("verify.workers", self.workers.to_string()),
            ("verify.batch_size", self.batch_size.to_string()),
            ("verify.iterations", self.iterations.to_string()),
            ("verify.seeds", self.seeds.to_string()),
            ("verify.seed", self.seed.to_string()),
            ("verify.mc_draws", self.mc_draws.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

/// Run every check at the sizes in `cfg`.
pub fn verify_bounds(cfg: &VerifyConfig) -> Result<Report> {
    cfg.validate()?;
    let problem = gen_quadratic(cfg.d, cfg.n, cfg.seed, cfg.conditioning)?;
    let trainer = cfg.trainer()?;
    if !(cfg.eta * problem.a1() < 1.0) {
        return Err(Error::Precondition(format!(
            "need eta * a1 < 1, got {}",
            cfg.eta * problem.a1()
        )));
    }
    let mut checks = Vec::new();
    let scheme = trainer.scheme;
    checks.push(check_unbiased(64, &scheme, cfg.mc_draws, cfg.seed)?);
    checks.push(check_variance(
        64,
        &scheme,
        100,
        (cfg.mc_draws / 20).max(100),
        cfg.seed,
    )?);

    let mut short = trainer.clone();
    short.iterations = 20;
    checks.push(check_h_identity(&problem, &short)?);

    let stats = run_ensemble(&problem, &trainer, cfg.seeds)?;
    let params = measured_params(&problem, &trainer, &stats);
    checks.push(check_variance_recursion(&stats, &params));
    checks.push(check_distance_bound(&stats, &params, problem.a()));

    let grid = theta_grid(cfg.eta, problem.a1());
    checks.push(check_theta_norm(problem.a(), cfg.eta, &grid, &THETA_GAPS)?);
    checks.push(check_theta_loewner(
        problem.a(),
        cfg.eta,
        &grid,
        &THETA_GAPS,
    )?);
    checks.push(check_tau_decay(&params)?);

    let mut qsgd = trainer.clone();
    qsgd.codec = CodecKind::Qsgd;
    qsgd.iterations = 1;
    let wide = gen_quadratic(cfg.d, SCALING_SAMPLES, cfg.seed, cfg.conditioning)?;
    checks.push(check_pseudo_error_scaling(
        &wide,
        &qsgd,
        &[1, 2, 4, 8],
        5 * cfg.seeds,
    )?);

    Ok(Report {
        config: cfg.describe(),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unstable_config_is_rejected() {
        let cfg = VerifyConfig {
            d: 64,
            alpha: 0.8,
            beta: 1.0,
            ..Default::default()
        };
        assert!(cfg.lambda() >= 1.2);
        match verify_bounds(&cfg) {
            Err(e @ Error::UnstableRegime { .. }) => {
                assert!(e.to_string().contains("unstable regime"))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn alpha_zero_is_qsgd_baseline() {
        let p = BoundParams {
            d: 16,
            s: 4,
            b: 1.0,
            alpha: 0.0,
            beta: 0.9,
            eta: 0.05,
            a1: 1.0,
            a2: 10.0,
            sigma_sq: 1.0,
            r_sq: 1.0,
            workers: 4,
        };
        let r = check_tau_decay(&p).unwrap();
        assert!(r.passed);
        assert_eq!(r.measured, 1.0);
        assert_eq!(r.note, "QSGD baseline");
    }

    #[test]
    fn quick_verify_passes() {
        let cfg = VerifyConfig {
            seeds: 24,
            iterations: 120,
            mc_draws: 4000,
            ..Default::default()
        };
        let report = verify_bounds(&cfg).unwrap();
        for c in &report.checks {
            assert!(c.passed, "{c}");
        }
        assert!(report.to_json().contains("\"checks\""));
    }
}
