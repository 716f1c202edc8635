use crate::error::{check_len, Error, Result};
use crate::exec::{self, Exec};

use super::csr::validate_structure;
use super::{CsrMatrix, PatternMatrix};

/// Block sparse row matrix with a runtime block size.
///
/// Every stored block is dense, `bs * bs` values in column-major order, and
/// block slot `t` occupies `values[t * bs * bs..(t + 1) * bs * bs]`. Blocks of a
/// block row appear in ascending block-column order.
#[derive(Debug, Clone, PartialEq)]
pub struct BcsrMatrix {
    block_size: usize,
    num_block_rows: usize,
    num_block_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl BcsrMatrix {
    pub fn new(
        block_size: usize,
        num_block_rows: usize,
        num_block_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if block_size == 0 {
            return Err(Error::structure("block size must be at least 1"));
        }
        validate_structure(num_block_rows, num_block_cols, &row_ptr, &col_idx)?;
        check_len(col_idx.len() * block_size * block_size, values.len())?;
        Ok(Self {
            block_size,
            num_block_rows,
            num_block_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub(crate) fn from_parts_unchecked(
        block_size: usize,
        num_block_rows: usize,
        num_block_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        debug_assert!(
            validate_structure(num_block_rows, num_block_cols, &row_ptr, &col_idx).is_ok()
        );
        debug_assert_eq!(col_idx.len() * block_size * block_size, values.len());
        Self {
            block_size,
            num_block_rows,
            num_block_cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Groups a point-wise matrix into `bs x bs` blocks.
    ///
    /// A block is stored when at least one of its entries is nonzero; stored
    /// blocks keep their zero entries explicitly.
    pub fn from_csr(a: &CsrMatrix, bs: usize) -> Result<Self> {
        if bs == 0 {
            return Err(Error::structure("block size must be at least 1"));
        }
        if a.num_rows() % bs != 0 || a.num_cols() % bs != 0 {
            return Err(Error::structure(format!(
                "block size {bs} does not divide {}x{}",
                a.num_rows(),
                a.num_cols()
            )));
        }
        let nbr = a.num_rows() / bs;
        let nbc = a.num_cols() / bs;
        let bs2 = bs * bs;

        // slot_of[J] is valid when owner[J] == I
        let mut owner = vec![usize::MAX; nbc];
        let mut slot_of = vec![0usize; nbc];
        let mut row_ptr = Vec::with_capacity(nbr + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        let mut block_cols = Vec::new();
        for bi in 0..nbr {
            block_cols.clear();
            for i in bi * bs..(bi + 1) * bs {
                let (cols, vals) = a.row(i);
                for (&j, &v) in cols.iter().zip(vals) {
                    if v != 0.0 && owner[j / bs] != bi {
                        owner[j / bs] = bi;
                        block_cols.push(j / bs);
                    }
                }
            }
            block_cols.sort_unstable();
            let base = col_idx.len();
            for (k, &bj) in block_cols.iter().enumerate() {
                slot_of[bj] = base + k;
            }
            col_idx.extend_from_slice(&block_cols);
            values.resize(col_idx.len() * bs2, 0.0);
            for r in 0..bs {
                let (cols, vals) = a.row(bi * bs + r);
                for (&j, &v) in cols.iter().zip(vals) {
                    if v != 0.0 {
                        let c = j % bs;
                        values[slot_of[j / bs] * bs2 + r + c * bs] = v;
                    }
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self::from_parts_unchecked(
            bs, nbr, nbc, row_ptr, col_idx, values,
        ))
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn num_block_rows(&self) -> usize {
        self.num_block_rows
    }

    pub fn num_block_cols(&self) -> usize {
        self.num_block_cols
    }

    pub fn num_rows(&self) -> usize {
        self.num_block_rows * self.block_size
    }

    pub fn num_cols(&self) -> usize {
        self.num_block_cols * self.block_size
    }

    /// Number of stored blocks.
    pub fn nnzb(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Column-major values of block slot `t`.
    #[inline]
    pub fn block(&self, t: usize) -> &[f64] {
        let bs2 = self.block_size * self.block_size;
        &self.values[t * bs2..(t + 1) * bs2]
    }

    #[inline]
    pub fn block_mut(&mut self, t: usize) -> &mut [f64] {
        let bs2 = self.block_size * self.block_size;
        &mut self.values[t * bs2..(t + 1) * bs2]
    }

    /// Slot of block `(bi, bj)`, if stored.
    pub fn find(&self, bi: usize, bj: usize) -> Option<usize> {
        let start = self.row_ptr[bi];
        self.col_idx[start..self.row_ptr[bi + 1]]
            .binary_search(&bj)
            .ok()
            .map(|k| start + k)
    }

    /// Block-level structure as a pattern, one entry per stored block.
    ///
    /// Only the index arrays are consulted.
    pub fn extract_point_pattern(&self) -> Result<PatternMatrix> {
        if self.num_block_rows != self.num_block_cols {
            return Err(Error::structure(format!(
                "pattern requires square block structure, got {}x{} blocks",
                self.num_block_rows, self.num_block_cols
            )));
        }
        let rows = (0..self.num_block_rows)
            .map(|i| self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]].to_vec())
            .collect();
        Ok(PatternMatrix::from_sorted_rows_unchecked(
            self.num_block_rows,
            rows,
        ))
    }

    /// Point-wise expansion; zeros inside stored blocks are dropped.
    pub fn to_csr(&self) -> CsrMatrix {
        let bs = self.block_size;
        let bs2 = bs * bs;
        let mut row_ptr = Vec::with_capacity(self.num_rows() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for bi in 0..self.num_block_rows {
            for r in 0..bs {
                for t in self.row_ptr[bi]..self.row_ptr[bi + 1] {
                    let bj = self.col_idx[t];
                    let blk = &self.values[t * bs2..(t + 1) * bs2];
                    for c in 0..bs {
                        let v = blk[r + c * bs];
                        if v != 0.0 {
                            col_idx.push(bj * bs + c);
                            values.push(v);
                        }
                    }
                }
                row_ptr.push(col_idx.len());
            }
        }
        CsrMatrix::from_parts_unchecked(self.num_rows(), self.num_cols(), row_ptr, col_idx, values)
    }

    /// `y = A x` computed block row by block row.
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64], exec: Exec) -> Result<()> {
        check_len(self.num_cols(), x.len())?;
        check_len(self.num_rows(), y.len())?;
        let bs = self.block_size;
        let bs2 = bs * bs;
        exec::fill_chunks(exec, y, bs, |bi, out| {
            out.fill(0.0);
            for t in self.row_ptr[bi]..self.row_ptr[bi + 1] {
                let xj = &x[self.col_idx[t] * bs..(self.col_idx[t] + 1) * bs];
                let blk = &self.values[t * bs2..(t + 1) * bs2];
                for (c, &xc) in xj.iter().enumerate() {
                    let col = &blk[c * bs..(c + 1) * bs];
                    for (o, &a) in out.iter_mut().zip(col) {
                        *o += a * xc;
                    }
                }
            }
        });
        Ok(())
    }
}
