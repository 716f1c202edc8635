//! Numeric ILU factorization on a prepared pattern and the block `L D U'` split.
//!
//! Factors are kept in place in the usual `L\U` layout: strictly-lower slots
//! hold the unit-lower factor, the diagonal and upper slots hold `U`.

use crate::dense;
use crate::error::{Error, Result, Stage};
use crate::sparse::{BcsrMatrix, CsrMatrix, PatternMatrix};
use crate::symbolic::{symbolic_phase, FillParams};

/// Pivot magnitude treated as zero by the point-wise factorization.
pub const ZERO_PIVOT: f64 = 1e-300;

/// `A ≈ L D (I + U')`, with `L` and `U'` unit-triangular at block level.
#[derive(Debug, Clone)]
pub struct BlockIlukFactors {
    /// Strictly lower block triangle.
    pub lower: BcsrMatrix,
    /// Block-diagonal matrix of inverted diagonal blocks of `U`.
    pub dinv: BcsrMatrix,
    /// Strictly upper block triangle of `D^-1 U`.
    pub upper: BcsrMatrix,
}

impl BlockIlukFactors {
    pub fn block_size(&self) -> usize {
        self.lower.block_size()
    }

    /// Number of block rows.
    pub fn n(&self) -> usize {
        self.lower.num_block_rows()
    }

    /// Point dimension `n * bs`.
    pub fn dim(&self) -> usize {
        self.lower.num_rows()
    }

    /// Block structure of `L + I + U'`.
    pub fn pattern(&self) -> PatternMatrix {
        let n = self.n();
        let rows = (0..n)
            .map(|i| {
                let lo = &self.lower.col_idx()[self.lower.row_ptr()[i]..self.lower.row_ptr()[i + 1]];
                let up = &self.upper.col_idx()[self.upper.row_ptr()[i]..self.upper.row_ptr()[i + 1]];
                lo.iter().copied().chain([i]).chain(up.iter().copied()).collect()
            })
            .collect();
        PatternMatrix::from_sorted_rows_unchecked(n, rows)
    }
}

fn check_square_pattern(n: usize, pattern: &PatternMatrix) -> Result<()> {
    if pattern.n() != n {
        return Err(Error::Dimension {
            expected: n,
            found: pattern.n(),
        });
    }
    Ok(())
}

/// Builds `A'` with exactly the structure of `pattern`: blocks of `A` copied,
/// every other position an explicit zero block.
pub fn materialize(a: &BcsrMatrix, pattern: &PatternMatrix) -> Result<BcsrMatrix> {
    if a.num_block_rows() != a.num_block_cols() {
        return Err(Error::structure("materialize requires a square block matrix"));
    }
    let n = a.num_block_rows();
    check_square_pattern(n, pattern)?;
    let bs = a.block_size();
    let bs2 = bs * bs;
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::with_capacity(pattern.nnz());
    let mut values = vec![0.0; pattern.nnz() * bs2];
    row_ptr.push(0);
    for i in 0..n {
        let mut src = a.row_ptr()[i];
        let src_end = a.row_ptr()[i + 1];
        for &j in pattern.row(i) {
            if src < src_end && a.col_idx()[src] < j {
                break;
            }
            if src < src_end && a.col_idx()[src] == j {
                let dst = col_idx.len();
                values[dst * bs2..(dst + 1) * bs2].copy_from_slice(a.block(src));
                src += 1;
            }
            col_idx.push(j);
        }
        if src < src_end {
            return Err(Error::structure(format!(
                "pattern misses block ({i}, {}) of the matrix",
                a.col_idx()[src]
            )));
        }
        row_ptr.push(col_idx.len());
    }
    Ok(BcsrMatrix::from_parts_unchecked(
        bs, n, n, row_ptr, col_idx, values,
    ))
}

/// Point-wise counterpart of [`materialize`].
pub fn materialize_csr(a: &CsrMatrix, pattern: &PatternMatrix) -> Result<CsrMatrix> {
    if !a.is_square() {
        return Err(Error::structure("materialize requires a square matrix"));
    }
    let n = a.num_rows();
    check_square_pattern(n, pattern)?;
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::with_capacity(pattern.nnz());
    let mut values = Vec::with_capacity(pattern.nnz());
    row_ptr.push(0);
    for i in 0..n {
        let (cols, vals) = a.row(i);
        let mut src = 0;
        for &j in pattern.row(i) {
            if src < cols.len() && cols[src] < j {
                break;
            }
            if src < cols.len() && cols[src] == j {
                values.push(vals[src]);
                src += 1;
            } else {
                values.push(0.0);
            }
            col_idx.push(j);
        }
        if src < cols.len() {
            return Err(Error::structure(format!(
                "pattern misses entry ({i}, {}) of the matrix",
                cols[src]
            )));
        }
        row_ptr.push(col_idx.len());
    }
    Ok(CsrMatrix::from_parts_unchecked(n, n, row_ptr, col_idx, values))
}

fn diagonal_slots(n: usize, row_ptr: &[usize], col_idx: &[usize]) -> Result<Vec<usize>> {
    (0..n)
        .map(|i| {
            col_idx[row_ptr[i]..row_ptr[i + 1]]
                .binary_search(&i)
                .map(|k| row_ptr[i] + k)
                .map_err(|_| Error::structure(format!("missing diagonal entry in row {i}")))
        })
        .collect()
}

/// In-place point-wise ILU(0) restricted to the stored pattern of `a`.
pub fn point_ilu0_factorize(a: &mut CsrMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::structure("ILU(0) requires a square matrix"));
    }
    let n = a.num_rows();
    let diag = diagonal_slots(n, a.row_ptr(), a.col_idx())?;
    let row_ptr = a.row_ptr().to_vec();
    let col_idx = a.col_idx().to_vec();
    let values = a.values_mut();
    // slot_in_row[j] is the slot of (i, j) while row i is being processed
    let mut slot_in_row = vec![usize::MAX; n];

    for i in 0..n {
        for t in row_ptr[i]..row_ptr[i + 1] {
            slot_in_row[col_idx[t]] = t;
        }
        for t in row_ptr[i]..diag[i] {
            let p = col_idx[t];
            let pivot = values[diag[p]];
            if pivot.abs() < ZERO_PIVOT {
                return Err(Error::ZeroPivot { row: p });
            }
            values[t] /= pivot;
            let aip = values[t];
            for s in diag[p] + 1..row_ptr[p + 1] {
                let dst = slot_in_row[col_idx[s]];
                if dst != usize::MAX {
                    values[dst] -= aip * values[s];
                }
            }
        }
        for t in row_ptr[i]..row_ptr[i + 1] {
            slot_in_row[col_idx[t]] = usize::MAX;
        }
    }
    Ok(())
}

/// In-place block ILU(0) restricted to the stored block pattern of `a`.
///
/// Each diagonal block is inverted once, right after its row is finished,
/// and applied by multiplication to the blocks below it.
pub fn block_ilu0_factorize(a: &mut BcsrMatrix) -> Result<()> {
    if a.num_block_rows() != a.num_block_cols() {
        return Err(Error::structure("block ILU(0) requires a square block matrix"));
    }
    let n = a.num_block_rows();
    let bs = a.block_size();
    let bs2 = bs * bs;
    let diag = diagonal_slots(n, a.row_ptr(), a.col_idx())?;
    let row_ptr = a.row_ptr().to_vec();
    let col_idx = a.col_idx().to_vec();
    let values = a.values_mut();
    let mut diag_inv = vec![0.0; n * bs2];
    let mut slot_in_row = vec![usize::MAX; n];
    let mut lip = vec![0.0; bs2];

    for i in 0..n {
        for t in row_ptr[i]..row_ptr[i + 1] {
            slot_in_row[col_idx[t]] = t;
        }
        let (done, current) = values.split_at_mut(row_ptr[i] * bs2);
        let base = row_ptr[i];
        for t in row_ptr[i]..diag[i] {
            let p = col_idx[t];
            let blk = &mut current[(t - base) * bs2..(t - base + 1) * bs2];
            dense::matmul(blk, &diag_inv[p * bs2..(p + 1) * bs2], bs, &mut lip);
            blk.copy_from_slice(&lip);
            for s in diag[p] + 1..row_ptr[p + 1] {
                let dst = slot_in_row[col_idx[s]];
                if dst != usize::MAX {
                    dense::gemm_sub(
                        &mut current[(dst - base) * bs2..(dst - base + 1) * bs2],
                        &lip,
                        &done[s * bs2..(s + 1) * bs2],
                        bs,
                    );
                }
            }
        }
        let d = &current[(diag[i] - base) * bs2..(diag[i] - base + 1) * bs2];
        if !dense::invert(d, bs, &mut diag_inv[i * bs2..(i + 1) * bs2]) {
            return Err(Error::SingularBlock { row: i });
        }
        for t in row_ptr[i]..row_ptr[i + 1] {
            slot_in_row[col_idx[t]] = usize::MAX;
        }
    }
    Ok(())
}

/// Splits in-place block factors into `L`, `D^-1` and `U' = D^-1 U`.
pub fn split_ldu(f: &BcsrMatrix) -> Result<BlockIlukFactors> {
    if f.num_block_rows() != f.num_block_cols() {
        return Err(Error::structure("split requires a square block matrix"));
    }
    let n = f.num_block_rows();
    let bs = f.block_size();
    let bs2 = bs * bs;
    let diag = diagonal_slots(n, f.row_ptr(), f.col_idx())?;

    let mut dinv = vec![0.0; n * bs2];
    let (mut l_ptr, mut l_idx, mut l_val) = (vec![0], Vec::new(), Vec::new());
    let (mut u_ptr, mut u_idx, mut u_val) = (vec![0], Vec::new(), Vec::new());
    let mut scaled = vec![0.0; bs2];
    for i in 0..n {
        let di = &mut dinv[i * bs2..(i + 1) * bs2];
        if !dense::invert(f.block(diag[i]), bs, di) {
            return Err(Error::SingularBlock { row: i });
        }
        for t in f.row_ptr()[i]..diag[i] {
            l_idx.push(f.col_idx()[t]);
            l_val.extend_from_slice(f.block(t));
        }
        for t in diag[i] + 1..f.row_ptr()[i + 1] {
            dense::matmul(di, f.block(t), bs, &mut scaled);
            u_idx.push(f.col_idx()[t]);
            u_val.extend_from_slice(&scaled);
        }
        l_ptr.push(l_idx.len());
        u_ptr.push(u_idx.len());
    }
    Ok(BlockIlukFactors {
        lower: BcsrMatrix::from_parts_unchecked(bs, n, n, l_ptr, l_idx, l_val),
        dinv: BcsrMatrix::from_parts_unchecked(
            bs,
            n,
            n,
            (0..=n).collect(),
            (0..n).collect(),
            dinv,
        ),
        upper: BcsrMatrix::from_parts_unchecked(bs, n, n, u_ptr, u_idx, u_val),
    })
}

/// Symbolic phase on the block structure followed by block ILU(0) on the
/// zero-backfilled matrix. Returns the in-place `L\U` factors.
pub fn block_iluk_factorize(a: &BcsrMatrix, params: FillParams) -> Result<BcsrMatrix> {
    let pattern = a
        .extract_point_pattern()
        .map_err(|e| e.at(Stage::PatternExtraction))?;
    let filled = symbolic_phase(&pattern, params).map_err(|e| e.at(Stage::Symbolic))?;
    let mut prepared = materialize(a, &filled).map_err(|e| e.at(Stage::Materialize))?;
    block_ilu0_factorize(&mut prepared).map_err(|e| e.at(Stage::Factorize))?;
    Ok(prepared)
}

/// Decoupled block ILU(k): factorization plus the `L D U'` split.
pub fn build_preconditioner(a: &BcsrMatrix, params: FillParams) -> Result<BlockIlukFactors> {
    let f = block_iluk_factorize(a, params)?;
    split_ldu(&f).map_err(|e| e.at(Stage::Split))
}

/// Point-wise decoupled ILU(k): symbolic phase, zero backfill, ILU(0).
pub fn point_iluk_factorize(a: &CsrMatrix, params: FillParams) -> Result<CsrMatrix> {
    let pattern = PatternMatrix::from_csr(a).map_err(|e| e.at(Stage::PatternExtraction))?;
    let filled = symbolic_phase(&pattern, params).map_err(|e| e.at(Stage::Symbolic))?;
    let mut prepared = materialize_csr(a, &filled).map_err(|e| e.at(Stage::Materialize))?;
    point_ilu0_factorize(&mut prepared).map_err(|e| e.at(Stage::Factorize))?;
    Ok(prepared)
}
