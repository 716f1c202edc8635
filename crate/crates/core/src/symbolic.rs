//! Fill-level symbolic analysis for ILU(k).
//!
//! Levels follow the usual recurrence: positions of the input pattern start
//! at level 0, everything else at infinity, and eliminating pivot `p` from
//! row `i` offers `level(i,p) + level(p,j) + 1` to every `j > p`. A position
//! survives when its final level is at most `k`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, PatternMatrix};

/// Sentinel for "not in the pattern"; larger than any reachable level.
pub const INFINITE_LEVEL: usize = usize::MAX;

/// Fill level `k` of ILU(k). `k = 0` keeps the original pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, PartialOrd, Ord, Hash)]
pub struct FillParams {
    pub k: usize,
}

impl FillParams {
    pub const fn new(k: usize) -> Self {
        Self { k }
    }
}

/// Surviving positions and their fill levels, row by row, columns ascending.
pub type LevelRows = Vec<Vec<(usize, usize)>>;

/// Computes the ILU(k) fill pattern of `pattern` without looking at any values.
///
/// Every diagonal position must be present.
pub fn symbolic_phase(pattern: &PatternMatrix, params: FillParams) -> Result<PatternMatrix> {
    let rows = fill_levels(pattern, params)?
        .into_iter()
        .map(|r| r.into_iter().map(|(j, _)| j).collect())
        .collect();
    Ok(PatternMatrix::from_sorted_rows_unchecked(pattern.n(), rows))
}

/// Same as [`symbolic_phase`] but keeps the level of every surviving position.
pub fn fill_levels(pattern: &PatternMatrix, params: FillParams) -> Result<LevelRows> {
    let n = pattern.n();
    let k = params.k;
    let mut level = vec![INFINITE_LEVEL; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut pivots: BinaryHeap<Reverse<usize>> = BinaryHeap::new();
    // finished rows restricted to columns right of the diagonal
    let mut upper: Vec<Vec<(usize, usize)>> = Vec::with_capacity(n);
    let mut out: LevelRows = Vec::with_capacity(n);

    for i in 0..n {
        let row = pattern.row(i);
        if row.binary_search(&i).is_err() {
            return Err(Error::structure(format!(
                "missing diagonal entry in row {i}"
            )));
        }
        for &j in row {
            level[j] = 0;
            touched.push(j);
            if j < i {
                pivots.push(Reverse(j));
            }
        }
        // Pivots come out in increasing order and a level can only be lowered
        // by a smaller pivot, so level[p] is final when p is popped. Offers
        // above k are skipped: they can never bring a position down to k.
        while let Some(Reverse(p)) = pivots.pop() {
            let lip = level[p];
            if lip > k {
                continue;
            }
            for &(j, lpj) in &upper[p] {
                let offer = lip.saturating_add(lpj).saturating_add(1);
                if offer > k {
                    continue;
                }
                if level[j] == INFINITE_LEVEL {
                    touched.push(j);
                    if j < i {
                        pivots.push(Reverse(j));
                    }
                }
                if offer < level[j] {
                    level[j] = offer;
                }
            }
        }

        touched.sort_unstable();
        let finished: Vec<(usize, usize)> = touched
            .iter()
            .filter(|&&j| level[j] <= k)
            .map(|&j| (j, level[j]))
            .collect();
        for &j in &touched {
            level[j] = INFINITE_LEVEL;
        }
        touched.clear();

        let diag = finished.partition_point(|&(j, _)| j <= i);
        upper.push(finished[diag..].to_vec());
        out.push(finished);
    }
    Ok(out)
}

/// Point-wise ILU(k) with levels and values updated together in one sweep.
///
/// This is the textbook coupled formulation on dense working storage, kept
/// as a reference for checking the decoupled symbolic + numeric pipeline. It
/// is quadratic in memory and only suitable for small matrices. Returns the
/// in-place factors (unit-lower L below the diagonal, U on and above) on the
/// surviving pattern, and that pattern.
pub fn coupled_iluk(a: &CsrMatrix, params: FillParams) -> Result<(CsrMatrix, PatternMatrix)> {
    if !a.is_square() {
        return Err(Error::structure("coupled ILU(k) requires a square matrix"));
    }
    let n = a.num_rows();
    let k = params.k;
    let mut val = a.to_dense();
    let mut lev = vec![INFINITE_LEVEL; n * n];
    for i in 0..n {
        for &j in a.row(i).0 {
            lev[i * n + j] = 0;
        }
    }

    for i in 1..n {
        for p in 0..i {
            if lev[i * n + p] > k {
                continue;
            }
            let pivot = val[p * n + p];
            if pivot.abs() < 1e-300 {
                return Err(Error::ZeroPivot { row: p });
            }
            val[i * n + p] /= pivot;
            let lip = lev[i * n + p];
            let aip = val[i * n + p];
            for j in p + 1..n {
                val[i * n + j] -= aip * val[p * n + j];
                let offer = lip.saturating_add(lev[p * n + j]).saturating_add(1);
                if offer < lev[i * n + j] {
                    lev[i * n + j] = offer;
                }
            }
        }
        for j in 0..n {
            if lev[i * n + j] > k {
                val[i * n + j] = 0.0;
            }
        }
    }

    let mut row_ptr = vec![0];
    let mut col_idx = Vec::new();
    let mut values = Vec::new();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::new();
        for j in 0..n {
            if lev[i * n + j] <= k {
                row.push(j);
                col_idx.push(j);
                values.push(val[i * n + j]);
            }
        }
        row_ptr.push(col_idx.len());
        rows.push(row);
    }
    Ok((
        CsrMatrix::from_parts_unchecked(n, n, row_ptr, col_idx, values),
        PatternMatrix::from_sorted_rows_unchecked(n, rows),
    ))
}
