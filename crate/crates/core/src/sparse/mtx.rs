//! Matrix Market coordinate reader (real/integer field, general or symmetric).

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};

use super::CsrMatrix;

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<CsrMatrix> {
    let file = File::open(path)?;
    parse_matrix_market(BufReader::new(file))
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

pub fn parse_matrix_market<R: BufRead>(reader: R) -> Result<CsrMatrix> {
    let mut lines = reader.lines().enumerate().map(|(k, l)| (k + 1, l));

    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file"))?;
    let header = header?;
    let tokens: Vec<String> = header
        .split_whitespace()
        .map(|t| t.to_ascii_lowercase())
        .collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(1, format!("bad header '{header}'")));
    }
    if tokens[2] != "coordinate" {
        return Err(parse_err(1, format!("unsupported format '{}'", tokens[2])));
    }
    match tokens[3].as_str() {
        "real" | "integer" => {}
        other => return Err(parse_err(1, format!("unsupported field '{other}'"))),
    }
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(parse_err(1, format!("unsupported symmetry '{other}'"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut entries = Vec::new();
    let mut read_entries = 0usize;
    let mut last_line = 1;
    for (no, line) in lines {
        let line = line?;
        last_line = no;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut it = trimmed.split_whitespace();
        match size {
            None => {
                let mut dim = || -> Result<usize> {
                    it.next()
                        .ok_or_else(|| parse_err(no, "size line needs rows, cols, nnz"))?
                        .parse()
                        .map_err(|e| parse_err(no, format!("bad size: {e}")))
                };
                let (r, c, nnz) = (dim()?, dim()?, dim()?);
                if symmetric && r != c {
                    return Err(parse_err(no, "symmetric matrix must be square"));
                }
                entries.reserve(if symmetric { 2 * nnz } else { nnz });
                size = Some((r, c, nnz));
            }
            Some((rows, cols, nnz)) => {
                if read_entries == nnz {
                    return Err(parse_err(no, format!("more than the declared {nnz} entries")));
                }
                let mut idx = |bound: usize| -> Result<usize> {
                    let v: usize = it
                        .next()
                        .ok_or_else(|| parse_err(no, "entry needs row, col, value"))?
                        .parse()
                        .map_err(|e| parse_err(no, format!("bad index: {e}")))?;
                    if v == 0 || v > bound {
                        return Err(parse_err(no, format!("index {v} outside 1..={bound}")));
                    }
                    Ok(v - 1)
                };
                let i = idx(rows)?;
                let j = idx(cols)?;
                let v: f64 = it
                    .next()
                    .ok_or_else(|| parse_err(no, "entry needs a value"))?
                    .parse()
                    .map_err(|e| parse_err(no, format!("bad value: {e}")))?;
                entries.push((i, j, v));
                if symmetric && i != j {
                    entries.push((j, i, v));
                }
                read_entries += 1;
            }
        }
    }
    let (rows, cols, nnz) = size.ok_or_else(|| parse_err(last_line, "missing size line"))?;
    if read_entries != nnz {
        return Err(parse_err(
            last_line,
            format!("expected {nnz} entries, found {read_entries}"),
        ));
    }
    CsrMatrix::from_triplets(rows, cols, &entries)
}
