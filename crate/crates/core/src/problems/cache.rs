//! Binary dataset cache.
//!
//! Layout, all little-endian: magic `ECQD`, `u32` version, `u8` task
//! (0 squared, 1 log), `u64` rows, `u64` cols, `u64` nnz, then `rows + 1`
//! `u64` row pointers, `nnz` `u32` column indices, `nnz` `f64` values and
//! `rows` `f64` targets.

use std::io::{Read, Write};

use super::dataset::{CsrMatrix, Dataset, Task};
use crate::{Error, Result};

const MAGIC: [u8; 4] = *b"ECQD";
const VERSION: u32 = 1;

pub fn write_cache<W: Write>(ds: &Dataset, mut w: W) -> Result<()> {
    let x = ds.features();
    let mut buf = Vec::with_capacity(32 + 8 * (x.rows() + 1) + 12 * x.nnz() + 8 * x.rows());
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.push(match ds.task() {
        Task::SquaredLoss => 0,
        Task::LogLoss => 1,
    });
    for n in [x.rows(), x.cols(), x.nnz()] {
        buf.extend_from_slice(&(n as u64).to_le_bytes());
    }
    for &p in x.indptr() {
        buf.extend_from_slice(&(p as u64).to_le_bytes());
    }
    for &i in x.indices() {
        buf.extend_from_slice(&i.to_le_bytes());
    }
    for &v in x.values().iter().chain(ds.targets()) {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn bad(msg: &str) -> Error {
    Error::InvalidParameter(format!("dataset cache: {msg}"))
}

struct Cursor<'a>(&'a [u8]);

impl Cursor<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        if self.0.len() < N {
            return Err(bad("truncated"));
        }
        let (head, rest) = self.0.split_at(N);
        self.0 = rest;
        Ok(head.try_into().unwrap())
    }

    fn u64(&mut self) -> Result<usize> {
        usize::try_from(u64::from_le_bytes(self.take()?)).map_err(|_| bad("size overflow"))
    }
}

pub fn read_cache<R: Read>(mut r: R) -> Result<Dataset> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let mut c = Cursor(&bytes);
    if c.take::<4>()? != MAGIC {
        return Err(bad("bad magic"));
    }
    let version = u32::from_le_bytes(c.take()?);
    if version != VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let task = match c.take::<1>()?[0] {
        0 => Task::SquaredLoss,
        1 => Task::LogLoss,
        _ => return Err(bad("unknown task")),
    };
    let (rows, cols, nnz) = (c.u64()?, c.u64()?, c.u64()?);
    let need = rows
        .checked_add(1)
        .and_then(|r| r.checked_mul(8))
        .and_then(|a| nnz.checked_mul(12).and_then(|b| a.checked_add(b)))
        .and_then(|a| rows.checked_mul(8).and_then(|b| a.checked_add(b)))
        .ok_or_else(|| bad("size overflow"))?;
    if c.0.len() != need {
        return Err(bad("length does not match header"));
    }
    let indptr = (0..=rows).map(|_| c.u64()).collect::<Result<Vec<_>>>()?;
    let indices = (0..nnz)
        .map(|_| c.take().map(u32::from_le_bytes))
        .collect::<Result<Vec<_>>>()?;
    let mut f64s = (0..nnz + rows).map(|_| c.take().map(f64::from_le_bytes));
    let values = f64s.by_ref().take(nnz).collect::<Result<Vec<_>>>()?;
    let targets = f64s.collect::<Result<Vec<_>>>()?;
    Dataset::new(
        CsrMatrix::new(cols, indptr, indices, values)?,
        targets,
        task,
    )
}
