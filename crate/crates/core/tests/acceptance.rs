//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::time::{Duration, Instant};

use ecq_core::analysis::{
    check_distance_bound, check_h_identity, check_tau_decay, check_theta_loewner, check_theta_norm,
    check_unbiased, check_variance, measured_params, run_ensemble, theta_grid, BoundParams,
    VerifyConfig, THETA_GAPS,
};
use ecq_core::codec::{decode, encode, plain_cost_bits};
use ecq_core::feedback::FeedbackConfig;
use ecq_core::problems::{
    gen_quadratic, gen_regression, gen_sparse_classification, load_libsvm, write_libsvm,
    DatasetProblem, Objective, QuadraticProblem, SparseClassificationSpec, Task,
};
use ecq_core::quantizer::{NormKind, QuantScheme, QuantizedVector};
use ecq_core::rng::{Lane, RngStream};
use ecq_core::sim::{
    run_experiment, run_experiment_traced, CodecKind, MetricsLog, TrainerConfig, WHOLE_VECTOR,
};
use ecq_core::{Error, Result};
use rayon::prelude::*;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        passed,
        detail: detail.into(),
    })
}

fn within(limit_secs: u64, elapsed: Duration) -> bool {
    elapsed <= Duration::from_secs(limit_secs)
}

fn quadratic16(seed: u64) -> Result<QuadraticProblem> {
    gen_quadratic(16, 64, seed, (1.0, 10.0))
}

fn small_trainer(codec: CodecKind, iterations: usize) -> TrainerConfig {
    TrainerConfig {
        eta: 0.05,
        workers: 4,
        batch_size: 4,
        iterations,
        codec,
        scheme: QuantScheme::new(4, NormKind::L2, WHOLE_VECTOR).unwrap(),
        feedback: FeedbackConfig::new(0.2, 0.9).unwrap(),
        seed: 3,
    }
}

fn c1_unbiased() -> Result<Outcome> {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for s in [1, 4] {
        let scheme = QuantScheme::new(s, NormKind::L2, WHOLE_VECTOR)?;
        let r = check_unbiased(64, &scheme, 100_000, 11)?;
        ok &= r.passed;
        parts.push(format!("s={s} max z {:.3}", r.measured));
    }
    let el = start.elapsed();
    outcome(
        ok && within(10, el),
        format!(
            "{} (limit 4), {:.1}s of 10s",
            parts.join(", "),
            el.as_secs_f64()
        ),
    )
}

fn c2_variance() -> Result<Outcome> {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for s in [1, 4] {
        let scheme = QuantScheme::new(s, NormKind::L2, WHOLE_VECTOR)?;
        let r = check_variance(64, &scheme, 100, 2000, 12)?;
        ok &= r.passed;
        parts.push(format!("s={s} worst ratio {:.4}", r.measured));
    }
    let el = start.elapsed();
    outcome(
        ok && within(30, el),
        format!(
            "{} (limit 1.05), {:.1}s of 30s",
            parts.join(", "),
            el.as_secs_f64()
        ),
    )
}

fn random_quantized(rng: &mut RngStream) -> QuantizedVector {
    let levels = 1 + rng.next_index(20) as u32;
    let dim = rng.next_index(300);
    let bucket = match rng.next_index(3) {
        0 => WHOLE_VECTOR,
        _ => 1 + rng.next_index(64),
    };
    let norm = if rng.next_index(2) == 0 {
        NormKind::L2
    } else {
        NormKind::LInf
    };
    let scheme = QuantScheme::new(levels, norm, bucket).unwrap();
    let s = levels as i64;
    let mut codes: Vec<i32> = (0..dim)
        .map(|_| (rng.next_index(2 * s as usize + 1) as i64 - s) as i32)
        .collect();
    let scales: Vec<f32> = scheme
        .bucket_ranges(dim)
        .map(|r| {
            if rng.next_index(8) == 0 {
                codes[r].iter_mut().for_each(|c| *c = 0);
                0.0
            } else {
                (rng.next_f64() * 1e3) as f32 + f32::MIN_POSITIVE
            }
        })
        .collect();
    QuantizedVector::from_parts(scheme, scales, codes).unwrap()
}

fn c3_codec() -> Result<Outcome> {
    let start = Instant::now();
    let mut rng = RngStream::new(13, 0, 0, Lane::Probe);
    let mut bad_roundtrip = 0;
    let mut bad_cost = 0;
    for _ in 0..10_000 {
        let qv = random_quantized(&mut rng);
        let msg = encode(&qv)?;
        match decode(&msg) {
            Ok(back) if back == qv && encode(&back)?.as_bytes() == msg.as_bytes() => {}
            _ => bad_roundtrip += 1,
        }
        let s = qv.scheme();
        let r = ((2 * s.levels() + 1) as f64).log2().ceil() as u64;
        let buckets = if qv.dim() == 0 {
            0
        } else {
            (qv.dim() + s.bucket_size() - 1) / s.bucket_size()
        } as u64;
        if plain_cost_bits(qv.dim(), s) != 32 * buckets + qv.dim() as u64 * r {
            bad_cost += 1;
        }
    }
    let el = start.elapsed();
    outcome(
        bad_roundtrip == 0 && bad_cost == 0 && within(10, el),
        format!(
            "10000 vectors, {bad_roundtrip} round-trip mismatches, {bad_cost} cost mismatches, {:.1}s of 10s",
            el.as_secs_f64()
        ),
    )
}

type Trace = (Vec<Vec<Vec<u8>>>, Vec<Vec<u64>>);

fn trace(cfg: &TrainerConfig, problem: &QuadraticProblem) -> Result<Trace> {
    let mut msgs = Vec::new();
    let mut ws = Vec::new();
    run_experiment_traced(cfg, problem, |tr| {
        msgs.push(
            tr.outputs
                .iter()
                .map(|o| o.message.as_bytes().to_vec())
                .collect(),
        );
        ws.push(tr.w.iter().map(|x| x.to_bits()).collect());
    })?;
    Ok((msgs, ws))
}

fn c4_qsgd_reduction() -> Result<Outcome> {
    let problem = quadratic16(4)?;
    let mut same = true;
    for bucket in [WHOLE_VECTOR, 5] {
        let mut ecq = small_trainer(CodecKind::Ecq, 100);
        ecq.scheme = QuantScheme::new(4, NormKind::L2, bucket)?;
        ecq.feedback = FeedbackConfig::new(0.0, 0.9)?;
        let mut qsgd = ecq.clone();
        qsgd.codec = CodecKind::Qsgd;
        same &= trace(&ecq, &problem)? == trace(&qsgd, &problem)?;
    }
    outcome(
        same,
        "100 iterations, whole-vector and 5-entry buckets, messages and iterates compared bitwise",
    )
}

fn c5_h_identity() -> Result<Outcome> {
    let problem = quadratic16(5)?;
    let mut worst: f64 = 0.0;
    let mut ok = true;
    let settings = [(0.1, 1.0), (0.2, 0.9), (0.5, 0.5), (0.3, 0.7), (1.0, 1.0)];
    for (a, b) in settings {
        let mut cfg = small_trainer(CodecKind::Ecq, 20);
        cfg.feedback = FeedbackConfig::new(a, b)?;
        let r = check_h_identity(&problem, &cfg)?;
        ok &= r.passed;
        worst = worst.max(r.measured);
    }
    outcome(
        ok,
        format!("5 (alpha, beta) settings, worst relative gap {worst:.3e} (limit 1e-10)"),
    )
}

fn c6_regression() -> Result<Outcome> {
    let start = Instant::now();
    let seeds = 20u64;
    let per_seed: Vec<Result<[f64; 3]>> = (0..seeds)
        .into_par_iter()
        .map(|seed| {
            let (ds, _) = gen_regression(256, 10_000, 1.0, 600 + seed)?;
            let problem = DatasetProblem::new(ds, None)?.with_optimum(0)?;
            let mut out = [0.0; 3];
            for (slot, codec) in [CodecKind::Fp32, CodecKind::Ecq, CodecKind::Qsgd]
                .into_iter()
                .enumerate()
            {
                let cfg = TrainerConfig {
                    codec,
                    seed,
                    ..TrainerConfig::default()
                };
                let log = run_experiment(&cfg, &problem)?;
                out[slot] = log.last().and_then(|r| r.dist_sq_to_opt).unwrap();
            }
            Ok(out)
        })
        .collect();
    let mut mean = [0.0; 3];
    for r in per_seed {
        let r = r?;
        (0..3).for_each(|i| mean[i] += r[i] / seeds as f64);
    }
    let [fp32, ecq, qsgd] = mean;
    let el = start.elapsed();
    let ok =
        fp32 <= ecq && ecq <= qsgd && ecq <= 0.8 * qsgd && ecq <= 2.0 * fp32 && within(300, el);
    outcome(
        ok,
        format!(
            "d=256, 20 seeds, T=1000: dist_sq FP32 {fp32:.4e}, ECQ {ecq:.4e}, QSGD {qsgd:.4e}; ECQ/QSGD {:.3} (<= 0.8), ECQ/FP32 {:.3} (<= 2), {:.0}s of 300s",
            ecq / qsgd,
            ecq / fp32,
            el.as_secs_f64()
        ),
    )
}

fn c7_distance_bound() -> Result<Outcome> {
    let start = Instant::now();
    let vc = VerifyConfig::default();
    let problem = gen_quadratic(vc.d, vc.n, vc.seed, vc.conditioning)?;
    let trainer = vc.trainer()?;
    let stats = run_ensemble(&problem, &trainer, 200)?;
    let params = measured_params(&problem, &trainer, &stats);
    let r = check_distance_bound(&stats, &params, problem.a());
    let el = start.elapsed();
    outcome(
        r.passed && stats.dist_sq.len() == 501 && within(300, el),
        format!(
            "d=16, 200 seeds, t <= 500: max E|w-w*|^2 / bound {:.4} (limit 1), {:.0}s of 300s",
            r.measured,
            el.as_secs_f64()
        ),
    )
}

fn c8_theta() -> Result<Outcome> {
    let vc = VerifyConfig::default();
    let problem = gen_quadratic(vc.d, vc.n, vc.seed, vc.conditioning)?;
    let grid = theta_grid(vc.eta, problem.a1());
    let norm = check_theta_norm(problem.a(), vc.eta, &grid, &THETA_GAPS)?;
    let loewner = check_theta_loewner(problem.a(), vc.eta, &grid, &THETA_GAPS)?;
    outcome(
        norm.passed && grid.len() * THETA_GAPS.len() == 100,
        format!(
            "100 grid points, max |Theta| - coeff |H^gap| = {:.3e} (limit 1e-10); semidefinite form incl. beta = 1 - eta a1: {:.3e} ({})",
            norm.measured,
            loewner.measured,
            if loewner.passed { "holds" } else { "violated" }
        ),
    )
}

fn c9_tau() -> Result<Outcome> {
    let problem = quadratic16(9)?;
    let base = BoundParams {
        d: 16,
        s: 4,
        b: 1.0,
        alpha: 0.2,
        beta: 0.9,
        eta: 0.05,
        a1: problem.a1(),
        a2: problem.a2(),
        sigma_sq: 1.0,
        r_sq: 1.0,
        workers: 4,
    };
    let ecq = check_tau_decay(&base)?;
    let qsgd = check_tau_decay(&BoundParams { alpha: 0.0, ..base })?;
    outcome(
        ecq.passed && qsgd.passed && qsgd.measured == 1.0,
        format!("alpha=0.2: {}; alpha=0: ratio {}", ecq.note, qsgd.measured),
    )
}

fn c10_sparse_logistic() -> Result<Outcome> {
    let start = Instant::now();
    let (problem, source) = match std::env::var_os("ECQ_GISETTE") {
        Some(path) => {
            let ds = load_libsvm(&path, Task::LogLoss, Some(5000))?;
            (
                DatasetProblem::new(ds, None)?,
                format!("{}", path.to_string_lossy()),
            )
        }
        None => {
            let (ds, _) = gen_sparse_classification(&SparseClassificationSpec::default())?;
            let dir = std::env::temp_dir().join(format!("ecq-acceptance-{}", std::process::id()));
            std::fs::create_dir_all(&dir)?;
            let file = dir.join("surrogate.libsvm");
            write_libsvm(&ds, std::io::BufWriter::new(std::fs::File::create(&file)?))?;
            let back = load_libsvm(&file, Task::LogLoss, Some(ds.dim()))?;
            std::fs::remove_dir_all(&dir)?;
            (
                DatasetProblem::new(back, None)?,
                "synthetic surrogate, n=6000 d=5000".to_string(),
            )
        }
    };
    let base = TrainerConfig {
        eta: 0.5,
        workers: 4,
        batch_size: 16,
        iterations: 1000,
        codec: CodecKind::Fp32,
        scheme: QuantScheme::new(4, NormKind::L2, WHOLE_VECTOR)?,
        feedback: FeedbackConfig::new(0.2, 0.9)?,
        seed: 10,
    };
    let fp = run_experiment(&base, &problem)?;
    let ecq = run_experiment(
        &TrainerConfig {
            codec: CodecKind::Ecq,
            ..base.clone()
        },
        &problem,
    )?;
    let (fl, el_) = (fp.last().unwrap(), ecq.last().unwrap());
    let gap = (el_.train_loss - fl.train_loss).abs() / fl.train_loss;
    let ratio = fl.bits_plain_cum as f64 / el_.bits_entropy_cum;
    let el = start.elapsed();
    outcome(
        gap <= 0.05 && ratio > 100.0 && within(600, el),
        format!(
            "{source}: log-loss FP32 {:.4e}, ECQ {:.4e} (gap {:.2}%, limit 5%), entropy compression {ratio:.1}x (> 100x), {:.0}s of 600s",
            fl.train_loss,
            el_.train_loss,
            100.0 * gap,
            el.as_secs_f64()
        ),
    )
}

fn c11_stability() -> Result<Outcome> {
    let problem = quadratic16(11)?;
    let mut parts = Vec::new();
    let mut ok = true;
    for (a, b) in [(0.2, 0.9), (0.5, 1.0)] {
        let mut cfg = small_trainer(CodecKind::Ecq, 2000);
        cfg.feedback = FeedbackConfig::new(a, b)?;
        let lambda = cfg.lambda(problem.dim());
        let st = run_ensemble(&problem, &cfg, 20)?;
        let h = &st.h_norm_sq;
        let early = h[100..1000].iter().copied().fold(0.0, f64::max);
        let late = h[1000..].iter().copied().fold(0.0, f64::max);
        let bounded = lambda < 1.0 && h.iter().all(|x| x.is_finite()) && late <= 1.5 * early;
        ok &= bounded;
        parts.push(format!(
            "lambda {lambda:.3}: max E|h|^2 {early:.3e} -> {late:.3e}"
        ));
    }
    let mut cfg = small_trainer(CodecKind::Ecq, 2000);
    cfg.scheme = QuantScheme::new(1, NormKind::L2, WHOLE_VECTOR)?;
    cfg.feedback = FeedbackConfig::new(0.6, 1.0)?;
    let lambda = cfg.lambda(problem.dim());
    ok &= lambda > 1.2;
    match run_ensemble(&problem, &cfg, 20) {
        Err(Error::Diverged { iteration, .. }) => {
            parts.push(format!(
                "lambda {lambda:.3}: divergence detected at iteration {iteration}"
            ));
        }
        Err(e) => return Err(e),
        Ok(st) => {
            let h = &st.h_norm_sq;
            let monotone = h.len() > 100 && h[99..].windows(2).all(|w| w[1] >= w[0]);
            ok &= monotone;
            parts.push(format!(
                "lambda {lambda:.3}: E|h|^2 {:.3e} -> {:.3e}, monotone after 100: {monotone}",
                h[99],
                h[h.len() - 1]
            ));
        }
    }
    outcome(ok, parts.join("; "))
}

fn csv_in_pool(threads: usize) -> Result<Vec<String>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Precondition(e.to_string()))?;
    pool.install(|| {
        let quad = quadratic16(12)?;
        let (ds, _) = gen_regression(32, 2000, 0.5, 12)?;
        let reg = DatasetProblem::new(ds, None)?.with_optimum(0)?;
        let mut out = Vec::new();
        for codec in CodecKind::ALL {
            let cfg = TrainerConfig {
                workers: 8,
                iterations: 150,
                codec,
                ..small_trainer(codec, 150)
            };
            out.push(run_experiment(&cfg, &quad)?.to_csv());
            let reps: Vec<Result<MetricsLog>> = (0..4u64)
                .into_par_iter()
                .map(|k| {
                    run_experiment(
                        &TrainerConfig {
                            seed: k,
                            eta: 0.01,
                            ..cfg.clone()
                        },
                        &reg,
                    )
                })
                .collect();
            let reps = reps.into_iter().collect::<Result<Vec<_>>>()?;
            out.extend(reps.iter().map(MetricsLog::to_csv));
            out.push(MetricsLog::mean(&reps)?.to_csv());
        }
        Ok(out)
    })
}

fn c12_determinism() -> Result<Outcome> {
    let one = csv_in_pool(1)?;
    let eight = csv_in_pool(8)?;
    let again = csv_in_pool(8)?;
    outcome(
        one == eight && eight == again,
        format!(
            "{} CSVs from every codec compared byte-for-byte across 1 and 8 threads",
            one.len()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Result<Outcome>); 12] = [
        ("quantizer unbiasedness", c1_unbiased),
        ("quantizer variance bound", c2_variance),
        ("codec exactness", c3_codec),
        ("QSGD reduction at alpha = 0", c4_qsgd_reduction),
        ("error-history identity", c5_h_identity),
        ("regression ordering FP32 <= ECQ <= QSGD", c6_regression),
        ("distance-to-optimum bound", c7_distance_bound),
        ("theta coefficient bound", c8_theta),
        ("tau ratio decay", c9_tau),
        ("sparse logistic loss and compression", c10_sparse_logistic),
        ("feedback stability", c11_stability),
        ("determinism across thread counts", c12_determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let o = run().unwrap_or_else(|e| Outcome {
            passed: false,
            detail: format!("error: {e}"),
        });
        failed += usize::from(!o.passed);
        println!(
            "{} {:>2} {name}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!("acceptance: {} of 12 passed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
