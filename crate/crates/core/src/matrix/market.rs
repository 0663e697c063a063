//! MatrixMarket coordinate I/O.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

use super::csr::CsrMatrix;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn read_matrix_market<T: Real>(path: impl AsRef<Path>) -> Result<CsrMatrix<T>> {
    let f = File::open(path)?;
    parse_matrix_market(BufReader::new(f))
}

/// Parses a square `coordinate real|integer symmetric|general` matrix.
/// Symmetric storage is expanded to full storage.
pub fn parse_matrix_market<T: Real, R: BufRead>(reader: R) -> Result<CsrMatrix<T>> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (lno, header) = match lines.next() {
        Some((n, l)) => (n, l?),
        None => return Err(parse_err(1, "empty file")),
    };
    let tokens: Vec<String> = header.split_whitespace().map(|s| s.to_ascii_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(lno, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'"));
    }
    if tokens[2] != "coordinate" {
        return Err(parse_err(lno, format!("unsupported format '{}'", tokens[2])));
    }
    if tokens[3] != "real" && tokens[3] != "integer" {
        return Err(parse_err(lno, format!("unsupported field '{}', need real", tokens[3])));
    }
    let symmetric = match tokens[4].as_str() {
        "symmetric" => true,
        "general" => false,
        s => return Err(parse_err(lno, format!("unsupported symmetry '{s}'"))),
    };

    let mut size: Option<(usize, usize)> = None;
    let mut triplets: Vec<(usize, usize, T)> = Vec::new();
    let mut entries = 0usize;
    let mut last_line = lno;
    for (lno, line) in lines {
        let line = line?;
        last_line = lno;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let mut it = t.split_whitespace();
        match size {
            None => {
                let mut next_num = |what: &str| -> Result<usize> {
                    it.next()
                        .ok_or_else(|| parse_err(lno, format!("missing {what} in size line")))?
                        .parse::<usize>()
                        .map_err(|e| parse_err(lno, format!("bad {what}: {e}")))
                };
                let rows = next_num("row count")?;
                let cols = next_num("column count")?;
                let nnz = next_num("entry count")?;
                if rows != cols {
                    return Err(parse_err(lno, format!("matrix is {rows}x{cols}, must be square")));
                }
                size = Some((rows, nnz));
                triplets.reserve(if symmetric { 2 * nnz } else { nnz });
            }
            Some((n, nnz)) => {
                let mut idx = |what: &str| -> Result<usize> {
                    let v = it
                        .next()
                        .ok_or_else(|| parse_err(lno, format!("missing {what}")))?
                        .parse::<usize>()
                        .map_err(|e| parse_err(lno, format!("bad {what}: {e}")))?;
                    if v == 0 || v > n {
                        return Err(parse_err(lno, format!("{what} {v} outside 1..={n}")));
                    }
                    Ok(v - 1)
                };
                let i = idx("row index")?;
                let j = idx("column index")?;
                let v: f64 = it
                    .next()
                    .ok_or_else(|| parse_err(lno, "missing value"))?
                    .parse()
                    .map_err(|e| parse_err(lno, format!("bad value: {e}")))?;
                if it.next().is_some() {
                    return Err(parse_err(lno, "trailing tokens after value"));
                }
                if entries == nnz {
                    return Err(parse_err(lno, format!("more than the declared {nnz} entries")));
                }
                entries += 1;
                let v = lit::<T>(v);
                triplets.push((i, j, v));
                if symmetric && i != j {
                    triplets.push((j, i, v));
                }
            }
        }
    }
    let (n, nnz) = size.ok_or_else(|| parse_err(last_line, "missing size line"))?;
    if entries != nnz {
        return Err(parse_err(last_line, format!("declared {nnz} entries, found {entries}")));
    }
    CsrMatrix::from_triplets(n, &triplets)
}

/// Writes `a` in symmetric coordinate form (lower triangle, 1-based).
pub fn write_matrix_market<T: Real>(a: &CsrMatrix<T>, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix_market_to(a, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_matrix_market_to<T: Real, W: Write>(a: &CsrMatrix<T>, w: &mut W) -> Result<()> {
    let nnz = a.lower_triplets().count();
    writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(w, "{} {} {}", a.n(), a.n(), nnz)?;
    for (i, j, v) in a.lower_triplets() {
        writeln!(w, "{} {} {:e}", i + 1, j + 1, to_f64(v))?;
    }
    Ok(())
}
