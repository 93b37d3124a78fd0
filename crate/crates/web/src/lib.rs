//! Browser bindings: quantize a vector, train on a small quadratic under
//! each codec, and plot the error-ratio bound.

use ecq_core::analysis::{tau_ratio_bound, BoundParams};
use ecq_core::codec::{encode, entropy_cost_bits, plain_cost_bits};
use ecq_core::feedback::FeedbackConfig;
use ecq_core::problems::gen_quadratic;
use ecq_core::quantizer::{quantize, NormKind, QuantScheme};
use ecq_core::rng::{Lane, RngStream};
use ecq_core::sim::{run_experiment, CodecKind, TrainerConfig, WHOLE_VECTOR};
use wasm_bindgen::prelude::*;

const DEMO_DIM: usize = 32;
const DEMO_SAMPLES: usize = 256;
const DEMO_CONDITIONING: (f64, f64) = (1.0, 10.0);

#[wasm_bindgen]
#[derive(Clone, Debug)]
pub struct Quantized {
    dequantized: Vec<f64>,
    codes: Vec<i32>,
    plain_bits: u64,
    entropy_bits: f64,
    wire_bytes: usize,
}

#[wasm_bindgen]
impl Quantized {
    #[wasm_bindgen(getter)]
    pub fn dequantized(&self) -> Vec<f64> {
        self.dequantized.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn codes(&self) -> Vec<i32> {
        self.codes.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn plain_bits(&self) -> f64 {
        self.plain_bits as f64
    }

    #[wasm_bindgen(getter)]
    pub fn entropy_bits(&self) -> f64 {
        self.entropy_bits
    }

    #[wasm_bindgen(getter)]
    pub fn wire_bytes(&self) -> usize {
        self.wire_bytes
    }
}

pub fn quantize_inner(
    values: &[f64],
    levels: u32,
    linf: bool,
    bucket: usize,
    seed: u64,
) -> Result<Quantized, String> {
    let norm = if linf { NormKind::LInf } else { NormKind::L2 };
    let bucket = if bucket == 0 { WHOLE_VECTOR } else { bucket };
    let scheme = QuantScheme::new(levels, norm, bucket).map_err(|e| e.to_string())?;
    let mut rng = RngStream::new(seed, 0, 0, Lane::Quantize);
    let q = quantize(values, &scheme, &mut rng).map_err(|e| e.to_string())?;
    Ok(Quantized {
        dequantized: q.dequantize(),
        codes: q.codes().to_vec(),
        plain_bits: plain_cost_bits(values.len(), &scheme),
        entropy_bits: entropy_cost_bits(&q),
        wire_bytes: encode(&q).map_err(|e| e.to_string())?.len(),
    })
}

/// Quantize `values` with `levels` levels; `bucket = 0` means one bucket.
#[wasm_bindgen]
pub fn quantize_vector(
    values: &[f64],
    levels: u32,
    linf: bool,
    bucket: usize,
    seed: u32,
) -> Result<Quantized, JsError> {
    quantize_inner(values, levels, linf, bucket, seed.into()).map_err(|e| JsError::new(&e))
}

pub fn simulate_inner(
    codec: &str,
    alpha: f64,
    beta: f64,
    levels: u32,
    eta: f64,
    iterations: usize,
    seed: u64,
) -> Result<Vec<f64>, String> {
    let problem =
        gen_quadratic(DEMO_DIM, DEMO_SAMPLES, 0, DEMO_CONDITIONING).map_err(|e| e.to_string())?;
    let cfg = TrainerConfig {
        eta,
        workers: 4,
        batch_size: 32,
        iterations,
        codec: codec.parse::<CodecKind>().map_err(|e| e.to_string())?,
        scheme: QuantScheme::new(levels, NormKind::L2, WHOLE_VECTOR).map_err(|e| e.to_string())?,
        feedback: FeedbackConfig::new(alpha, beta).map_err(|e| e.to_string())?,
        seed,
    };
    let log = match run_experiment(&cfg, &problem) {
        Ok(log) => log,
        Err(ecq_core::Error::Diverged { partial, .. }) => *partial,
        Err(e) => return Err(e.to_string()),
    };
    Ok(log.rows.iter().filter_map(|r| r.dist_sq_to_opt).collect())
}

/// `‖w − w*‖²` per iteration on a fixed 32-dimensional quadratic. A
/// diverging run returns the rows up to detection.
#[wasm_bindgen]
pub fn simulate(
    codec: &str,
    alpha: f64,
    beta: f64,
    levels: u32,
    eta: f64,
    iterations: usize,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    simulate_inner(codec, alpha, beta, levels, eta, iterations, seed.into())
        .map_err(|e| JsError::new(&e))
}

pub fn tau_ratio_inner(
    alpha: f64,
    eta: f64,
    levels: u32,
    max_gap: usize,
) -> Result<Vec<f64>, String> {
    let problem =
        gen_quadratic(DEMO_DIM, DEMO_SAMPLES, 0, DEMO_CONDITIONING).map_err(|e| e.to_string())?;
    let p = BoundParams {
        d: DEMO_DIM,
        s: levels,
        b: 1.0,
        alpha,
        beta: 1.0 - eta * problem.a1(),
        eta,
        a1: problem.a1(),
        a2: problem.a2(),
        sigma_sq: 1.0,
        r_sq: 1.0,
        workers: 4,
    };
    (1..=max_gap)
        .map(|g| tau_ratio_bound(g, &p).map_err(|e| e.to_string()))
        .collect()
}

/// ECQ-to-QSGD error-contribution ratio bound for gaps `1..=max_gap`, with
/// `β = 1 − ηa₁` on the demo quadratic.
#[wasm_bindgen]
pub fn tau_ratio_curve(
    alpha: f64,
    eta: f64,
    levels: u32,
    max_gap: usize,
) -> Result<Vec<f64>, JsError> {
    tau_ratio_inner(alpha, eta, levels, max_gap).map_err(|e| JsError::new(&e))
}

/// `α²γ + (β − α)²` for the demo dimension.
#[wasm_bindgen]
pub fn stability_lambda(alpha: f64, beta: f64, levels: u32) -> f64 {
    let gamma = ecq_core::analysis::gamma(DEMO_DIM, levels.max(1));
    ecq_core::analysis::lambda_of(alpha, beta, gamma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantize_reports_costs() {
        let v: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let q = quantize_inner(&v, 4, false, 0, 1).unwrap();
        assert_eq!(q.plain_bits, 32 + 100 * 4);
        assert_eq!(q.codes.len(), 100);
        assert!(q.codes.iter().all(|c| c.abs() <= 4));
        assert!(quantize_inner(&v, 0, false, 0, 1).is_err());
    }

    #[test]
    fn simulate_orders_codecs() {
        let last = |c| {
            *simulate_inner(c, 0.2, 0.9, 2, 0.01, 500, 0)
                .unwrap()
                .last()
                .unwrap()
        };
        let (fp32, ecq, qsgd) = (last("fp32"), last("ecq"), last("qsgd"));
        assert!(fp32 < ecq && ecq < qsgd, "{fp32} {ecq} {qsgd}");
        assert!(simulate_inner("nope", 0.2, 0.9, 2, 0.05, 10, 0).is_err());
    }

    #[test]
    fn tau_curve_decays() {
        let c = tau_ratio_inner(0.1, 0.05, 4, 60).unwrap();
        assert!(c.windows(2).all(|w| w[1] < w[0]));
        assert!(c[59] < 1e-2);
        assert!(tau_ratio_inner(0.0, 0.05, 4, 5)
            .unwrap()
            .iter()
            .all(|&r| r == 1.0));
    }
}
