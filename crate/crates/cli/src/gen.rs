use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use ecq_core::problems::{
    gen_classification, gen_regression, gen_sparse_classification, write_cache, write_libsvm,
    SparseClassificationSpec,
};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Kind {
    Regression,
    Classification,
    SparseClassification,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Format {
    Libsvm,
    Cache,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Target noise for regression.
    #[arg(long, default_value_t = 1.0)]
    pub noise_sigma: f64,
    /// Weight scale for dense classification.
    #[arg(long, default_value_t = 4.0)]
    pub scale: f64,
    #[arg(long, default_value_t = 60)]
    pub nnz_per_row: usize,
    #[arg(long, default_value_t = 200)]
    pub informative: usize,
    #[arg(long, default_value_t = 0.8)]
    pub zipf_exponent: f64,
    #[arg(long, value_enum, default_value = "libsvm")]
    pub format: Format,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the generating weights, one per line.
    #[arg(long)]
    pub weights: Option<PathBuf>,
}

pub fn gen(args: GenArgs) -> Result<ExitCode> {
    let (ds, w) = match args.kind {
        Kind::Regression => gen_regression(args.d, args.n, args.noise_sigma, args.seed)?,
        Kind::Classification => gen_classification(args.d, args.n, args.scale, args.seed)?,
        Kind::SparseClassification => gen_sparse_classification(&SparseClassificationSpec {
            n: args.n,
            d: args.d,
            nnz_per_row: args.nnz_per_row,
            zipf_exponent: args.zipf_exponent,
            informative: args.informative,
            seed: args.seed,
            ..Default::default()
        })?,
    };
    if args.out.is_dir() {
        bail!("{} is a directory", args.out.display());
    }
    let file =
        File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut out = BufWriter::new(file);
    match args.format {
        Format::Libsvm => write_libsvm(&ds, &mut out)?,
        Format::Cache => write_cache(&ds, &mut out)?,
    }
    out.flush()?;
    if let Some(path) = &args.weights {
        let mut f = BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        );
        for x in &w {
            writeln!(f, "{x:?}")?;
        }
        f.flush()?;
    }
    println!(
        "wrote {} rows x {} features ({} non-zeros) to {}",
        ds.len(),
        ds.dim(),
        ds.features().nnz(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}
