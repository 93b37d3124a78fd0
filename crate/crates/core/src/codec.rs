//! Wire formats and communication-cost accounting.
//!
//! Quantized vectors travel as `ECQ1` messages:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "ECQ1"
//! 4       4     dim, u32 little-endian
//! 8       1     s, u8
//! 9       1     norm: 0 = l2, 1 = linf
//! 10      4     bucket_size, u32 little-endian
//! 14      ...   per bucket: scale (binary32 LE), then the bucket's codes,
//!               each stored as c + s in r = ⌈log₂(2s+1)⌉ bits,
//!               least-significant bit first, zero-padded to a byte
//! ```
//!
//! Two auxiliary layouts carry the baselines: `ECB1` for one-bit vectors
//! (dim u32, bucket_size u32, then per bucket two binary32 reconstruction
//! values followed by one bit per entry, padded) and `ECF1` for dense
//! 32-bit gradients (dim u32, then binary32 values).

use thiserror::Error;

use crate::quantizer::{NormKind, OneBitVector, QuantScheme, QuantizedVector};
use crate::{Error, Result};

pub const MAGIC_QUANTIZED: [u8; 4] = *b"ECQ1";
pub const MAGIC_ONEBIT: [u8; 4] = *b"ECB1";
pub const MAGIC_DENSE: [u8; 4] = *b"ECF1";

/// Bits of one scale factor on the wire.
pub const SCALE_BITS: u64 = 32;

const QUANTIZED_HEADER: usize = 14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecodeError {
    #[error("bad magic")]
    BadMagic,
    #[error("truncated payload")]
    Truncated,
    #[error("code value {value} exceeds 2s = {max}")]
    CodeOutOfRange { value: u32, max: u32 },
    #[error("invalid header: {0}")]
    InvalidHeader(String),
    #[error("invalid scale {0}")]
    InvalidScale(f32),
    #[error("{0} trailing bytes")]
    TrailingBytes(usize),
}

/// An encoded message as it would cross the network.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WireMessage(Vec<u8>);

impl WireMessage {
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

struct BitWriter {
    out: Vec<u8>,
    acc: u64,
    nbits: u32,
}

impl BitWriter {
    fn new(out: Vec<u8>) -> Self {
        Self {
            out,
            acc: 0,
            nbits: 0,
        }
    }

    fn put(&mut self, value: u32, width: u32) {
        self.acc |= u64::from(value) << self.nbits;
        self.nbits += width;
        while self.nbits >= 8 {
            self.out.push(self.acc as u8);
            self.acc >>= 8;
            self.nbits -= 8;
        }
    }

    /// Zero-pad to the next byte boundary.
    fn align(&mut self) {
        if self.nbits > 0 {
            self.out.push(self.acc as u8);
            self.acc = 0;
            self.nbits = 0;
        }
    }

    fn finish(mut self) -> Vec<u8> {
        self.align();
        self.out
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        let end = self.pos.checked_add(n).ok_or(DecodeError::Truncated)?;
        let out = self.buf.get(self.pos..end).ok_or(DecodeError::Truncated)?;
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8, DecodeError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, DecodeError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32, DecodeError> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    /// Read `count` codes of `width` bits, LSB first, from the next
    /// `⌈count·width/8⌉` bytes.
    fn packed(&mut self, count: usize, width: u32) -> Result<Vec<u32>, DecodeError> {
        let nbytes = (count * width as usize).div_ceil(8);
        let bytes = self.take(nbytes)?;
        let mask = (1u64 << width) - 1;
        let mut out = Vec::with_capacity(count);
        let mut acc = 0u64;
        let mut nbits = 0u32;
        let mut it = bytes.iter();
        for _ in 0..count {
            while nbits < width {
                acc |= u64::from(*it.next().expect("byte count checked")) << nbits;
                nbits += 8;
            }
            out.push((acc & mask) as u32);
            acc >>= width;
            nbits -= width;
        }
        Ok(out)
    }

    fn finish(self) -> Result<(), DecodeError> {
        match self.buf.len() - self.pos {
            0 => Ok(()),
            n => Err(DecodeError::TrailingBytes(n)),
        }
    }
}

fn dim_u32(dim: usize) -> Result<u32> {
    u32::try_from(dim).map_err(|_| Error::Unsupported(format!("dimension {dim} exceeds u32")))
}

/// Serialize a quantized vector in the `ECQ1` layout.
pub fn encode(qv: &QuantizedVector) -> Result<WireMessage> {
    let scheme = qv.scheme();
    let s = scheme.levels();
    if s > 127 {
        return Err(Error::Unsupported(format!(
            "s = {s} > 127 cannot be encoded"
        )));
    }
    let dim = dim_u32(qv.dim())?;
    let bucket = u32::try_from(scheme.bucket_size())
        .map_err(|_| Error::Unsupported("bucket size exceeds u32".into()))?;
    let width = scheme.code_width();
    let mut out = Vec::with_capacity(wire_size_bytes(qv.dim(), scheme));
    out.extend_from_slice(&MAGIC_QUANTIZED);
    out.extend_from_slice(&dim.to_le_bytes());
    out.push(s as u8);
    out.push(match scheme.norm() {
        NormKind::L2 => 0,
        NormKind::LInf => 1,
    });
    out.extend_from_slice(&bucket.to_le_bytes());
    let si = s as i32;
    let mut w = BitWriter::new(out);
    for (range, &scale) in scheme.bucket_ranges(qv.dim()).zip(qv.scales()) {
        for b in scale.to_le_bytes() {
            w.put(u32::from(b), 8);
        }
        for &c in &qv.codes()[range] {
            w.put((c + si) as u32, width);
        }
        w.align();
    }
    Ok(WireMessage(w.finish()))
}

/// Parse an `ECQ1` message back into a quantized vector.
pub fn decode(msg: &WireMessage) -> Result<QuantizedVector, DecodeError> {
    let mut r = Reader::new(&msg.0);
    if r.take(4).map_err(|_| DecodeError::BadMagic)? != MAGIC_QUANTIZED {
        return Err(DecodeError::BadMagic);
    }
    let dim = r.u32()? as usize;
    let s = u32::from(r.u8()?);
    let norm = match r.u8()? {
        0 => NormKind::L2,
        1 => NormKind::LInf,
        f => return Err(DecodeError::InvalidHeader(format!("norm flag {f}"))),
    };
    let bucket_size = r.u32()? as usize;
    if s == 0 || s > 127 {
        return Err(DecodeError::InvalidHeader(format!("s = {s}")));
    }
    let scheme = QuantScheme::new(s, norm, bucket_size)
        .map_err(|e| DecodeError::InvalidHeader(e.to_string()))?;
    let width = scheme.code_width();
    let max = 2 * s;
    let mut scales = Vec::with_capacity(scheme.num_buckets(dim));
    let mut codes = Vec::with_capacity(dim.min(msg.0.len() * 8));
    for range in scheme.bucket_ranges(dim) {
        let scale = r.f32()?;
        if !scale.is_finite() || scale < 0.0 {
            return Err(DecodeError::InvalidScale(scale));
        }
        let raw = r.packed(range.len(), width)?;
        for value in raw {
            if value > max {
                return Err(DecodeError::CodeOutOfRange { value, max });
            }
            let c = value as i32 - s as i32;
            if scale == 0.0 && c != 0 {
                return Err(DecodeError::InvalidScale(scale));
            }
            codes.push(c);
        }
        scales.push(scale);
    }
    r.finish()?;
    QuantizedVector::from_parts(scheme, scales, codes)
        .map_err(|e| DecodeError::InvalidHeader(e.to_string()))
}

/// Exact byte length of the `ECQ1` encoding (header plus padded buckets).
pub fn wire_size_bytes(dim: usize, scheme: &QuantScheme) -> usize {
    let width = scheme.code_width() as usize;
    QUANTIZED_HEADER
        + scheme
            .bucket_ranges(dim)
            .map(|r| 4 + (r.len() * width).div_ceil(8))
            .sum::<usize>()
}

/// Idealized cost: one 32-bit scale plus `r` bits per entry, per bucket.
pub fn plain_cost_bits(dim: usize, scheme: &QuantScheme) -> u64 {
    let width = u64::from(scheme.code_width());
    scheme
        .bucket_ranges(dim)
        .map(|r| SCALE_BITS + r.len() as u64 * width)
        .sum()
}

/// Cost of sending `dim` raw 32-bit floats.
pub fn fp32_cost_bits(dim: usize) -> u64 {
    32 * dim as u64
}

/// `Σ_k d_k·log₂(d/d_k)` over the level histogram, with `d_k = 0` terms
/// dropped.
pub fn histogram_entropy_bits(counts: impl IntoIterator<Item = usize>) -> f64 {
    let counts: Vec<usize> = counts.into_iter().filter(|&c| c > 0).collect();
    let d: usize = counts.iter().sum();
    if d == 0 {
        return 0.0;
    }
    let d = d as f64;
    counts
        .iter()
        .map(|&k| k as f64 * (d / k as f64).log2())
        .sum()
}

/// Entropy-coded length bound of the codes plus 32 bits per bucket scale.
pub fn entropy_cost_bits(qv: &QuantizedVector) -> f64 {
    let s = qv.scheme().levels() as usize;
    let mut counts = vec![0usize; 2 * s + 1];
    for &c in qv.codes() {
        counts[(c + s as i32) as usize] += 1;
    }
    let buckets = qv.scheme().num_buckets(qv.dim()) as f64;
    histogram_entropy_bits(counts) + SCALE_BITS as f64 * buckets
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostReport {
    pub plain_bits: u64,
    pub entropy_bits: f64,
    pub wire_bits: u64,
    pub ratio_vs_fp32: f64,
    pub entropy_ratio_vs_fp32: f64,
}

pub fn cost_report(qv: &QuantizedVector) -> CostReport {
    let plain_bits = plain_cost_bits(qv.dim(), qv.scheme());
    let entropy_bits = entropy_cost_bits(qv);
    let fp32 = fp32_cost_bits(qv.dim()) as f64;
    CostReport {
        plain_bits,
        entropy_bits,
        wire_bits: 8 * wire_size_bytes(qv.dim(), qv.scheme()) as u64,
        ratio_vs_fp32: fp32 / plain_bits as f64,
        entropy_ratio_vs_fp32: fp32 / entropy_bits,
    }
}

pub fn encode_onebit(v: &OneBitVector) -> Result<WireMessage> {
    let dim = dim_u32(v.dim())?;
    let bucket = u32::try_from(v.bucket_size())
        .map_err(|_| Error::Unsupported("bucket size exceeds u32".into()))?;
    let mut out = Vec::new();
    out.extend_from_slice(&MAGIC_ONEBIT);
    out.extend_from_slice(&dim.to_le_bytes());
    out.extend_from_slice(&bucket.to_le_bytes());
    let mut w = BitWriter::new(out);
    for (chunk, recon) in v.bits().chunks(v.bucket_size()).zip(v.recon()) {
        for x in recon {
            for b in x.to_le_bytes() {
                w.put(u32::from(b), 8);
            }
        }
        for &bit in chunk {
            w.put(u32::from(bit), 1);
        }
        w.align();
    }
    Ok(WireMessage(w.finish()))
}

pub fn decode_onebit(msg: &WireMessage) -> Result<OneBitVector, DecodeError> {
    let mut r = Reader::new(&msg.0);
    if r.take(4).map_err(|_| DecodeError::BadMagic)? != MAGIC_ONEBIT {
        return Err(DecodeError::BadMagic);
    }
    let dim = r.u32()? as usize;
    let bucket_size = r.u32()? as usize;
    if bucket_size == 0 {
        return Err(DecodeError::InvalidHeader("bucket size 0".into()));
    }
    let mut recon = Vec::new();
    let mut bits = Vec::with_capacity(dim.min(msg.0.len() * 8));
    let mut remaining = dim;
    while remaining > 0 {
        let n = remaining.min(bucket_size);
        let pair = [r.f32()?, r.f32()?];
        if pair.iter().any(|x| !x.is_finite()) {
            return Err(DecodeError::InvalidScale(if pair[0].is_finite() {
                pair[1]
            } else {
                pair[0]
            }));
        }
        recon.push(pair);
        bits.extend(r.packed(n, 1)?.into_iter().map(|b| b == 1));
        remaining -= n;
    }
    r.finish()?;
    OneBitVector::from_parts(bucket_size, recon, bits)
        .map_err(|e| DecodeError::InvalidHeader(e.to_string()))
}

pub fn onebit_plain_bits(v: &OneBitVector) -> u64 {
    let buckets = v.dim().div_ceil(v.bucket_size()) as u64;
    2 * SCALE_BITS * buckets + v.dim() as u64
}

pub fn onebit_entropy_bits(v: &OneBitVector) -> f64 {
    let ones = v.bits().iter().filter(|&&b| b).count();
    let buckets = v.dim().div_ceil(v.bucket_size()) as f64;
    histogram_entropy_bits([ones, v.dim() - ones]) + 2.0 * SCALE_BITS as f64 * buckets
}

/// Dense 32-bit payload; values are rounded to binary32.
pub fn encode_dense(v: &[f64]) -> Result<WireMessage> {
    let dim = dim_u32(v.len())?;
    let mut out = Vec::with_capacity(8 + 4 * v.len());
    out.extend_from_slice(&MAGIC_DENSE);
    out.extend_from_slice(&dim.to_le_bytes());
    for &x in v {
        out.extend_from_slice(&(x as f32).to_le_bytes());
    }
    Ok(WireMessage(out))
}

pub fn decode_dense(msg: &WireMessage) -> Result<Vec<f32>, DecodeError> {
    let mut r = Reader::new(&msg.0);
    if r.take(4).map_err(|_| DecodeError::BadMagic)? != MAGIC_DENSE {
        return Err(DecodeError::BadMagic);
    }
    let dim = r.u32()? as usize;
    let body = r.take(dim.checked_mul(4).ok_or(DecodeError::Truncated)?)?;
    r.finish()?;
    Ok(body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

/// Any decoded message.
#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    Quantized(QuantizedVector),
    OneBit(OneBitVector),
    Dense(Vec<f32>),
}

impl Payload {
    pub fn dim(&self) -> usize {
        match self {
            Payload::Quantized(q) => q.dim(),
            Payload::OneBit(q) => q.dim(),
            Payload::Dense(v) => v.len(),
        }
    }

    pub fn dequantize(&self) -> Vec<f64> {
        match self {
            Payload::Quantized(q) => q.dequantize(),
            Payload::OneBit(q) => q.dequantize(),
            Payload::Dense(v) => v.iter().map(|&x| f64::from(x)).collect(),
        }
    }

    pub fn plain_bits(&self) -> u64 {
        match self {
            Payload::Quantized(q) => plain_cost_bits(q.dim(), q.scheme()),
            Payload::OneBit(q) => onebit_plain_bits(q),
            Payload::Dense(v) => fp32_cost_bits(v.len()),
        }
    }

    /// Entropy-coded bound; raw floats are not entropy coded.
    pub fn entropy_bits(&self) -> f64 {
        match self {
            Payload::Quantized(q) => entropy_cost_bits(q),
            Payload::OneBit(q) => onebit_entropy_bits(q),
            Payload::Dense(v) => fp32_cost_bits(v.len()) as f64,
        }
    }
}

/// Decode a message of any of the three layouts, dispatching on the magic.
pub fn decode_payload(msg: &WireMessage) -> Result<Payload, DecodeError> {
    match msg.0.get(..4) {
        Some(m) if m == MAGIC_QUANTIZED => decode(msg).map(Payload::Quantized),
        Some(m) if m == MAGIC_ONEBIT => decode_onebit(msg).map(Payload::OneBit),
        Some(m) if m == MAGIC_DENSE => decode_dense(msg).map(Payload::Dense),
        _ => Err(DecodeError::BadMagic),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantizer::{quantize, quantize_onebit};
    use crate::rng::{Lane, RngStream};

    fn scheme(s: u32, norm: NormKind, bucket: usize) -> QuantScheme {
        QuantScheme::new(s, norm, bucket).unwrap()
    }

    #[test]
    fn on_grid_example_layout() {
        let sc = scheme(4, NormKind::LInf, 4);
        let qv = QuantizedVector::from_parts(sc, vec![1.0], vec![4, -2, 0, 1]).unwrap();
        let msg = encode(&qv).unwrap();
        // header, 4-byte scale, 4 codes x 4 bits = 2 bytes
        assert_eq!(msg.len(), 14 + 4 + 2);
        assert_eq!(&msg.as_bytes()[..4], b"ECQ1");
        assert_eq!(&msg.as_bytes()[4..8], &4u32.to_le_bytes());
        assert_eq!(msg.as_bytes()[8], 4);
        assert_eq!(msg.as_bytes()[9], 1);
        assert_eq!(&msg.as_bytes()[10..14], &4u32.to_le_bytes());
        assert_eq!(&msg.as_bytes()[14..18], &1.0f32.to_le_bytes());
        // offsets 8, 2, 4, 5 packed LSB first: 0x28, 0x54
        assert_eq!(&msg.as_bytes()[18..], &[0x28, 0x54]);
        assert_eq!(decode(&msg).unwrap(), qv);
    }

    #[test]
    fn zero_vector_hand_packed() {
        let sc = scheme(1, NormKind::L2, 8);
        let qv = quantize(&[0.0; 8], &sc, &mut RngStream::new(0, 0, 0, Lane::Quantize)).unwrap();
        let msg = encode(&qv).unwrap();
        // every code is 0 + s = 1 in 2 bits: 0b01010101 twice
        assert_eq!(&msg.as_bytes()[14..18], &0.0f32.to_le_bytes());
        assert_eq!(&msg.as_bytes()[18..], &[0x55, 0x55]);
    }

    #[test]
    fn decode_errors() {
        let sc = scheme(2, NormKind::L2, 3);
        let qv = QuantizedVector::from_parts(sc, vec![1.5, 2.0], vec![1, -2, 0, 2, 1]).unwrap();
        let msg = encode(&qv).unwrap();
        let bytes = msg.as_bytes();

        for cut in [0, 3, 10, 16, bytes.len() - 1] {
            let err = decode(&WireMessage::from_bytes(bytes[..cut].to_vec())).unwrap_err();
            let expect = if cut < 4 {
                DecodeError::BadMagic
            } else {
                DecodeError::Truncated
            };
            assert_eq!(err, expect, "cut at {cut}");
        }

        let mut bad = bytes.to_vec();
        bad[0] = b'X';
        assert_eq!(
            decode(&WireMessage::from_bytes(bad)).unwrap_err(),
            DecodeError::BadMagic
        );

        // s = 2 gives 3-bit codes; 7 > 2s = 4
        let mut bad = bytes.to_vec();
        bad[18] |= 0b111;
        assert_eq!(
            decode(&WireMessage::from_bytes(bad)).unwrap_err(),
            DecodeError::CodeOutOfRange { value: 7, max: 4 }
        );

        let mut bad = bytes.to_vec();
        bad.push(0);
        assert_eq!(
            decode(&WireMessage::from_bytes(bad)).unwrap_err(),
            DecodeError::TrailingBytes(1)
        );

        let mut bad = bytes.to_vec();
        bad[9] = 7;
        assert!(matches!(
            decode(&WireMessage::from_bytes(bad)),
            Err(DecodeError::InvalidHeader(_))
        ));
    }

    #[test]
    fn encode_rejects_large_s() {
        let sc = scheme(128, NormKind::L2, 4);
        let qv = QuantizedVector::from_parts(sc, vec![1.0], vec![0]).unwrap();
        assert!(matches!(encode(&qv), Err(Error::Unsupported(_))));
        let sc = scheme(127, NormKind::L2, 4);
        let qv = QuantizedVector::from_parts(sc, vec![1.0], vec![-127]).unwrap();
        assert_eq!(decode(&encode(&qv).unwrap()).unwrap(), qv);
    }

    #[test]
    fn plain_cost_examples() {
        assert_eq!(plain_cost_bits(1000, &scheme(4, NormKind::L2, 1000)), 4032);
        assert_eq!(plain_cost_bits(1, &scheme(1, NormKind::L2, 1)), 34);
        assert_eq!(
            plain_cost_bits(1000, &scheme(1, NormKind::LInf, 4096)),
            2032
        );
        assert_eq!(fp32_cost_bits(1000), 32000);
        let ratio = fp32_cost_bits(1000) as f64 / 4032.0;
        assert!((ratio - 7.936_507_936_507_937).abs() < 1e-12);
        // three buckets of 4, 4, 2 entries at r = 3
        assert_eq!(
            plain_cost_bits(10, &scheme(2, NormKind::L2, 4)),
            3 * 32 + 30
        );
    }

    #[test]
    fn wire_size_is_padded_plain_cost_plus_header() {
        let sc = scheme(2, NormKind::L2, 3);
        let plain = plain_cost_bits(10, &sc);
        let wire = wire_size_bytes(10, &sc);
        assert!(8 * (wire - 14) as u64 >= plain);
        assert_eq!(wire, 14 + 3 * (4 + 2) + (4 + 1));
    }

    #[test]
    fn entropy_examples() {
        let sc = scheme(1, NormKind::L2, 8);
        let qv = QuantizedVector::from_parts(sc, vec![1.0], vec![0, 0, 1, 0, -1, 0, 0, 0]).unwrap();
        let expect = 6.0 * (8.0f64 / 6.0).log2() + 3.0 + 3.0 + 32.0;
        assert!((entropy_cost_bits(&qv) - expect).abs() < 1e-12);
        assert!((expect - 32.0 - 8.490_224_995_673_063).abs() < 1e-12);

        // uniform histogram over 2s + 1 = 5 levels
        let sc = scheme(2, NormKind::L2, 10);
        let qv = QuantizedVector::from_parts(sc, vec![1.0], vec![-2, -1, 0, 1, 2, 2, 1, 0, -1, -2])
            .unwrap();
        assert!((entropy_cost_bits(&qv) - 32.0 - 10.0 * 5f64.log2()).abs() < 1e-12);

        let qv = QuantizedVector::from_parts(sc, vec![1.0], vec![1; 10]).unwrap();
        assert_eq!(entropy_cost_bits(&qv), 32.0);
    }

    #[test]
    fn onebit_round_trip_and_errors() {
        let v = quantize_onebit(&[1.0, -3.0, 2.0, 0.0, 5.0, -1.0, 4.0], 3).unwrap();
        let msg = encode_onebit(&v).unwrap();
        assert_eq!(msg.len(), 12 + 3 * 8 + 3);
        assert_eq!(decode_onebit(&msg).unwrap(), v);
        let short = WireMessage::from_bytes(msg.as_bytes()[..msg.len() - 1].to_vec());
        assert_eq!(decode_onebit(&short).unwrap_err(), DecodeError::Truncated);
        assert_eq!(onebit_plain_bits(&v), 3 * 64 + 7);
    }

    #[test]
    fn dense_round_trip() {
        let v = [1.5, -2.25, 1e-3];
        let msg = encode_dense(&v).unwrap();
        let back = decode_dense(&msg).unwrap();
        assert_eq!(back, vec![1.5f32, -2.25, 1e-3]);
        match decode_payload(&msg).unwrap() {
            Payload::Dense(d) => assert_eq!(d.len(), 3),
            other => panic!("unexpected payload {other:?}"),
        }
        assert_eq!(
            decode_payload(&WireMessage::from_bytes(b"NOPE".to_vec())).unwrap_err(),
            DecodeError::BadMagic
        );
    }
}
