//! Stochastic uniform quantization of gradient vectors.
//!
//! Every bucket of `bucket_size` consecutive entries is scaled by its own
//! norm `σ`, and each entry with ratio `u = |v_i| / σ` in `[l/s, (l+1)/s)`
//! is rounded to level `l` with probability `l + 1 - s·u` and to `l + 1`
//! otherwise. The reconstruction `σ · sgn(v_i) · level / s` is unbiased.
//!
//! Scales are stored as `f32` because that is what crosses the wire. The
//! `f64` norm is rounded *up* to the next representable `f32` before the
//! ratios are formed, so `u ≤ 1` holds and the stored scale is exactly the
//! one the draws were made against.

use std::ops::Range;

use crate::rng::RngStream;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NormKind {
    L2,
    LInf,
}

impl NormKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NormKind::L2 => "l2",
            NormKind::LInf => "linf",
        }
    }
}

impl std::str::FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l2" => Ok(NormKind::L2),
            "linf" | "l_inf" | "inf" => Ok(NormKind::LInf),
            other => Err(Error::InvalidParameter(format!("unknown norm '{other}'"))),
        }
    }
}

/// Quantizer configuration: `s` non-zero levels per sign, the scaling norm
/// and the bucket size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QuantScheme {
    levels: u32,
    norm: NormKind,
    bucket_size: usize,
}

impl QuantScheme {
    pub fn new(levels: u32, norm: NormKind, bucket_size: usize) -> Result<Self> {
        if levels == 0 {
            return Err(Error::InvalidParameter(
                "quantization levels must be >= 1".into(),
            ));
        }
        if bucket_size == 0 {
            return Err(Error::InvalidParameter("bucket size must be >= 1".into()));
        }
        Ok(Self {
            levels,
            norm,
            bucket_size,
        })
    }

    /// Stochastic ternary quantization (one level, max-norm scaling).
    pub fn ternary(bucket_size: usize) -> Result<Self> {
        Self::new(1, NormKind::LInf, bucket_size)
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn norm(&self) -> NormKind {
        self.norm
    }

    pub fn bucket_size(&self) -> usize {
        self.bucket_size
    }

    /// Bits per code, `⌈log₂(2s+1)⌉`: the bit length of `2s`.
    pub fn code_width(&self) -> u32 {
        let top = 2 * u64::from(self.levels);
        u64::BITS - top.leading_zeros()
    }

    pub fn num_buckets(&self, dim: usize) -> usize {
        dim.div_ceil(self.bucket_size)
    }

    /// Index ranges of the buckets of a `dim`-vector; the last may be short.
    pub fn bucket_ranges(&self, dim: usize) -> impl Iterator<Item = Range<usize>> + '_ {
        let bs = self.bucket_size;
        (0..self.num_buckets(dim)).map(move |b| b * bs..((b + 1) * bs).min(dim))
    }
}

/// Per-bucket scale factors plus integer level codes in `[-s, s]`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantizedVector {
    dim: usize,
    scheme: QuantScheme,
    scales: Vec<f32>,
    codes: Vec<i32>,
}

impl QuantizedVector {
    /// Assemble from raw parts, checking every structural invariant.
    pub fn from_parts(scheme: QuantScheme, scales: Vec<f32>, codes: Vec<i32>) -> Result<Self> {
        let dim = codes.len();
        let nb = scheme.num_buckets(dim);
        if scales.len() != nb {
            return Err(Error::DimensionMismatch {
                expected: nb,
                got: scales.len(),
            });
        }
        let s = scheme.levels() as i32;
        for (range, &scale) in scheme.bucket_ranges(dim).zip(&scales) {
            if !scale.is_finite() || scale < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "invalid bucket scale {scale}"
                )));
            }
            let bucket = &codes[range];
            if let Some(&c) = bucket.iter().find(|c| c.abs() > s) {
                return Err(Error::InvalidParameter(format!(
                    "code {c} outside [-{s}, {s}]"
                )));
            }
            if scale == 0.0 && bucket.iter().any(|&c| c != 0) {
                return Err(Error::InvalidParameter(
                    "non-zero code in zero-scale bucket".into(),
                ));
            }
        }
        Ok(Self {
            dim,
            scheme,
            scales,
            codes,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scheme(&self) -> &QuantScheme {
        &self.scheme
    }

    pub fn scales(&self) -> &[f32] {
        &self.scales
    }

    pub fn codes(&self) -> &[i32] {
        &self.codes
    }

    pub fn zero_fraction(&self) -> f64 {
        if self.dim == 0 {
            return 0.0;
        }
        self.codes.iter().filter(|&&c| c == 0).count() as f64 / self.dim as f64
    }

    pub fn dequantize(&self) -> Vec<f64> {
        dequantize(self)
    }
}

/// l₂ or l∞ norm of `v`.
pub fn scale_of(v: &[f64], norm: NormKind) -> Result<f64> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let out = match norm {
        NormKind::L2 => {
            // Rescale by the max magnitude so huge entries do not overflow.
            let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if max == 0.0 {
                0.0
            } else {
                max * v.iter().map(|x| (x / max) * (x / max)).sum::<f64>().sqrt()
            }
        }
        NormKind::LInf => v.iter().fold(0.0f64, |m, x| m.max(x.abs())),
    };
    Ok(out)
}

/// Smallest `f32` that is `>= x`.
fn f32_round_up(x: f64) -> f32 {
    let f = x as f32;
    if f64::from(f) < x {
        f.next_up()
    } else {
        f
    }
}

fn quantize_bucket(
    bucket: &[f64],
    levels: u32,
    scale: f32,
    rng: &RngStream,
    base: u64,
    out: &mut [i32],
) {
    let s = f64::from(levels);
    let sigma = f64::from(scale);
    for (i, (&x, code)) in bucket.iter().zip(out.iter_mut()).enumerate() {
        let u = (x.abs() / sigma).min(1.0);
        let level = if u >= 1.0 {
            levels as i32
        } else {
            let scaled = u * s;
            let lower = scaled.floor();
            let p_up = scaled - lower;
            let up = p_up > 0.0 && rng.uniform_at(base + i as u64) < p_up;
            lower as i32 + i32::from(up)
        };
        *code = if x < 0.0 { -level } else { level };
    }
}

/// Stochastically quantize `v`. Entry `i` consumes draw `counter + i` of
/// `rng`; on return the stream has advanced by `v.len()`.
pub fn quantize(v: &[f64], scheme: &QuantScheme, rng: &mut RngStream) -> Result<QuantizedVector> {
    let dim = v.len();
    let base = rng.draw_counter();
    let mut scales = Vec::with_capacity(scheme.num_buckets(dim));
    let mut codes = vec![0i32; dim];
    for range in scheme.bucket_ranges(dim) {
        let bucket = &v[range.clone()];
        let sigma = scale_of(bucket, scheme.norm())?;
        let scale = f32_round_up(sigma);
        if !scale.is_finite() {
            return Err(Error::Unsupported(format!(
                "bucket scale {sigma} overflows f32"
            )));
        }
        if scale > 0.0 {
            quantize_bucket(
                bucket,
                scheme.levels(),
                scale,
                rng,
                base + range.start as u64,
                &mut codes[range],
            );
        }
        scales.push(scale);
    }
    rng.advance(dim as u64);
    Ok(QuantizedVector {
        dim,
        scheme: *scheme,
        scales,
        codes,
    })
}

/// Reconstruct `scale · code / s` for every entry.
pub fn dequantize(qv: &QuantizedVector) -> Vec<f64> {
    let s = f64::from(qv.scheme.levels());
    let mut out = vec![0.0; qv.dim];
    for (range, &scale) in qv.scheme.bucket_ranges(qv.dim).zip(&qv.scales) {
        let step = f64::from(scale) / s;
        for i in range {
            out[i] = step * f64::from(qv.codes[i]);
        }
    }
    out
}

/// One bit per entry with two reconstruction values per bucket.
///
/// Bit 1 marks a strictly positive entry. Each bucket stores the mean of
/// its non-positive entries and the mean of its positive entries; an empty
/// class reconstructs to 0.
#[derive(Clone, Debug, PartialEq)]
pub struct OneBitVector {
    dim: usize,
    bucket_size: usize,
    /// `[non-positive mean, positive mean]` per bucket.
    recon: Vec<[f32; 2]>,
    bits: Vec<bool>,
}

impl OneBitVector {
    pub fn from_parts(bucket_size: usize, recon: Vec<[f32; 2]>, bits: Vec<bool>) -> Result<Self> {
        if bucket_size == 0 {
            return Err(Error::InvalidParameter("bucket size must be >= 1".into()));
        }
        let nb = bits.len().div_ceil(bucket_size);
        if recon.len() != nb {
            return Err(Error::DimensionMismatch {
                expected: nb,
                got: recon.len(),
            });
        }
        if recon.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            dim: bits.len(),
            bucket_size,
            recon,
            bits,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bucket_size(&self) -> usize {
        self.bucket_size
    }

    pub fn recon(&self) -> &[[f32; 2]] {
        &self.recon
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn dequantize(&self) -> Vec<f64> {
        self.bits
            .iter()
            .enumerate()
            .map(|(i, &b)| f64::from(self.recon[i / self.bucket_size][usize::from(b)]))
            .collect()
    }
}

/// Sign quantization with per-bucket, per-sign-class mean reconstruction.
pub fn quantize_onebit(v: &[f64], bucket_size: usize) -> Result<OneBitVector> {
    if bucket_size == 0 {
        return Err(Error::InvalidParameter("bucket size must be >= 1".into()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let bits: Vec<bool> = v.iter().map(|&x| x > 0.0).collect();
    let recon = v
        .chunks(bucket_size)
        .map(|bucket| {
            let mut sum = [0.0f64; 2];
            let mut count = [0usize; 2];
            for &x in bucket {
                let k = usize::from(x > 0.0);
                sum[k] += x;
                count[k] += 1;
            }
            let mean = |k: usize| {
                if count[k] == 0 {
                    0.0
                } else {
                    (sum[k] / count[k] as f64) as f32
                }
            };
            [mean(0), mean(1)]
        })
        .collect();
    Ok(OneBitVector {
        dim: v.len(),
        bucket_size,
        recon,
        bits,
    })
}
