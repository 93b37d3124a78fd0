use std::process::ExitCode;

use anyhow::Result;
use clap::Args;
use ecq_core::codec::{decode, encode, entropy_cost_bits, fp32_cost_bits, plain_cost_bits};
use ecq_core::quantizer::{quantize, NormKind, QuantScheme};
use ecq_core::rng::{Lane, RngStream};
use ecq_core::sim::WHOLE_VECTOR;
use rand_distr::{Distribution, StandardNormal};

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "1000,10000")]
    pub dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1,4,16")]
    pub levels: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "l2,linf")]
    pub norms: Vec<NormKind>,
    /// Bucket size, or `whole`.
    #[arg(long, default_value = "whole", value_parser = parse_bucket)]
    pub bucket: usize,
    /// Fractions of input entries set to zero.
    #[arg(long, value_delimiter = ',', default_value = "0,0.9")]
    pub zeros: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Emit CSV instead of an aligned table.
    #[arg(long)]
    pub csv: bool,
}

fn parse_bucket(s: &str) -> Result<usize, String> {
    if s == "whole" {
        return Ok(WHOLE_VECTOR);
    }
    match s.parse::<usize>() {
        Ok(b) if b > 0 => Ok(b),
        _ => Err(format!(
            "expected a positive bucket size or 'whole', got '{s}'"
        )),
    }
}

pub struct BenchRow {
    pub d: usize,
    pub s: u32,
    pub norm: NormKind,
    pub zeros: f64,
    pub round_trip: bool,
    pub plain_bits: u64,
    pub entropy_bits: f64,
}

impl BenchRow {
    fn plain_ratio(&self) -> f64 {
        fp32_cost_bits(self.d) as f64 / self.plain_bits as f64
    }

    fn entropy_ratio(&self) -> f64 {
        fp32_cost_bits(self.d) as f64 / self.entropy_bits
    }
}

fn input(d: usize, zeros: f64, seed: u64) -> Vec<f64> {
    let mut rng = RngStream::new(seed, d as u64, 0, Lane::Probe);
    (0..d)
        .map(|_| {
            let x: f64 = StandardNormal.sample(&mut rng);
            if rng.next_f64() < zeros {
                0.0
            } else {
                x
            }
        })
        .collect()
}

pub fn measure(
    d: usize,
    s: u32,
    norm: NormKind,
    bucket: usize,
    zeros: f64,
    seed: u64,
) -> Result<BenchRow> {
    let scheme = QuantScheme::new(s, norm, bucket)?;
    let v = input(d, zeros, seed);
    let mut rng = RngStream::new(seed, 0, 0, Lane::Quantize);
    let q = quantize(&v, &scheme, &mut rng)?;
    let msg = encode(&q)?;
    let round_trip = match decode(&msg) {
        Ok(back) => back == q && encode(&back)?.as_bytes() == msg.as_bytes(),
        Err(_) => false,
    };
    Ok(BenchRow {
        d,
        s,
        norm,
        zeros,
        round_trip,
        plain_bits: plain_cost_bits(d, &scheme),
        entropy_bits: entropy_cost_bits(&q),
    })
}

pub fn bench(args: BenchArgs) -> Result<ExitCode> {
    let mut rows = Vec::new();
    for &d in &args.dims {
        for &s in &args.levels {
            for &norm in &args.norms {
                for &z in &args.zeros {
                    rows.push(measure(d, s, norm, args.bucket, z, args.seed)?);
                }
            }
        }
    }
    if args.csv {
        println!(
            "d,s,norm,zero_fraction,round_trip,plain_bits,entropy_bits,plain_ratio,entropy_ratio"
        );
        for r in &rows {
            println!(
                "{},{},{},{:?},{},{},{:?},{:?},{:?}",
                r.d,
                r.s,
                r.norm.as_str(),
                r.zeros,
                r.round_trip,
                r.plain_bits,
                r.entropy_bits,
                r.plain_ratio(),
                r.entropy_ratio()
            );
        }
    } else {
        println!(
            "{:>8} {:>4} {:>5} {:>6} {:>6} {:>12} {:>14} {:>10} {:>10}",
            "d", "s", "norm", "zeros", "ok", "plain bits", "entropy bits", "plain", "entropy"
        );
        for r in &rows {
            println!(
                "{:>8} {:>4} {:>5} {:>6.2} {:>6} {:>12} {:>14.1} {:>9.2}x {:>9.2}x",
                r.d,
                r.s,
                r.norm.as_str(),
                r.zeros,
                r.round_trip,
                r.plain_bits,
                r.entropy_bits,
                r.plain_ratio(),
                r.entropy_ratio()
            );
        }
    }
    if rows.iter().all(|r| r.round_trip) {
        Ok(ExitCode::SUCCESS)
    } else {
        anyhow::bail!("codec round trip failed")
    }
}
