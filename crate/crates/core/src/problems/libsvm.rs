use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::dataset::{CsrMatrix, Dataset, Task};
use crate::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn map_label(raw: f64, task: Task, line: usize) -> Result<f64> {
    match task {
        Task::SquaredLoss => Ok(raw),
        Task::LogLoss => match raw {
            x if x == 1.0 => Ok(1.0),
            x if x == -1.0 || x == 0.0 => Ok(0.0),
            x => Err(parse_err(
                line,
                format!("classification label {x} is not -1, 0 or 1"),
            )),
        },
    }
}

/// Parse LibSVM text: `label idx:val idx:val ...` with 1-based indices.
///
/// Blank lines and `#` comments are skipped. Indices within a line need not
/// be sorted but may not repeat. Classification labels `{-1, +1}` (or
/// `{0, 1}`) map to `{0, 1}`. With `dim = None` the dimension is the
/// largest index seen.
pub fn parse_libsvm<R: BufRead>(reader: R, task: Task, dim: Option<usize>) -> Result<Dataset> {
    let mut indptr = vec![0];
    let mut indices: Vec<u32> = Vec::new();
    let mut values = Vec::new();
    let mut targets = Vec::new();
    let mut max_index = 0usize;
    let mut row: Vec<(u32, f64)> = Vec::new();

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().unwrap();
        let label: f64 = label_tok
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad label '{label_tok}'")))?;
        targets.push(map_label(label, task, lineno)?);

        row.clear();
        for tok in tokens {
            let (i, v) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(lineno, format!("expected idx:val, got '{tok}'")))?;
            let i: usize = i
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad index '{i}'")))?;
            if i == 0 {
                return Err(parse_err(lineno, "indices are 1-based"));
            }
            if let Some(d) = dim {
                if i > d {
                    return Err(parse_err(
                        lineno,
                        format!("index {i} exceeds dimension {d}"),
                    ));
                }
            }
            let v: f64 = v
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad value '{v}'")))?;
            if !v.is_finite() {
                return Err(parse_err(lineno, format!("non-finite value '{v}'")));
            }
            let i = u32::try_from(i - 1).map_err(|_| parse_err(lineno, "index too large"))?;
            max_index = max_index.max(i as usize + 1);
            row.push((i, v));
        }
        row.sort_unstable_by_key(|&(i, _)| i);
        if row.windows(2).any(|p| p[0].0 == p[1].0) {
            return Err(parse_err(lineno, "repeated index"));
        }
        for &(i, v) in &row {
            if v != 0.0 {
                indices.push(i);
                values.push(v);
            }
        }
        indptr.push(indices.len());
    }
    let cols = dim.unwrap_or(max_index);
    Dataset::new(
        CsrMatrix::new(cols, indptr, indices, values)?,
        targets,
        task,
    )
}

pub fn load_libsvm(path: impl AsRef<Path>, task: Task, dim: Option<usize>) -> Result<Dataset> {
    parse_libsvm(BufReader::new(File::open(path)?), task, dim)
}

/// Write `ds` in LibSVM format. Classification targets are written as
/// `-1`/`+1`; floats use the shortest representation that round-trips.
pub fn write_libsvm<W: Write>(ds: &Dataset, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    let x = ds.features();
    for (i, &y) in ds.targets().iter().enumerate() {
        match ds.task() {
            Task::LogLoss => write!(w, "{}", if y == 1.0 { "+1" } else { "-1" })?,
            Task::SquaredLoss => write!(w, "{y:?}")?,
        }
        let (idx, val) = x.row(i);
        for (&j, &v) in idx.iter().zip(val) {
            write!(w, " {}:{v:?}", j + 1)?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}
