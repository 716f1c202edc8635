use crate::error::{check_len, Error, Result};
use crate::exec::{self, Exec};

/// Point-wise sparse matrix in compressed sparse row form.
///
/// Column indices are strictly increasing within every row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    num_rows: usize,
    num_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from raw arrays, checking every structural invariant.
    pub fn new(
        num_rows: usize,
        num_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        validate_structure(num_rows, num_cols, &row_ptr, &col_idx)?;
        check_len(col_idx.len(), values.len())?;
        Ok(Self {
            num_rows,
            num_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub(crate) fn from_parts_unchecked(
        num_rows: usize,
        num_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        debug_assert!(validate_structure(num_rows, num_cols, &row_ptr, &col_idx).is_ok());
        debug_assert_eq!(col_idx.len(), values.len());
        Self {
            num_rows,
            num_cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Assembles a matrix from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(
        num_rows: usize,
        num_cols: usize,
        entries: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut counts = vec![0usize; num_rows + 1];
        for (k, &(i, j, _)) in entries.iter().enumerate() {
            if i >= num_rows || j >= num_cols {
                return Err(Error::structure(format!(
                    "triplet {k} at ({i}, {j}) outside a {num_rows}x{num_cols} matrix"
                )));
            }
            counts[i + 1] += 1;
        }
        for i in 0..num_rows {
            counts[i + 1] += counts[i];
        }
        // bucket by row, then sort and merge each row
        let mut next = counts.clone();
        let mut cols = vec![0usize; entries.len()];
        let mut vals = vec![0.0; entries.len()];
        for &(i, j, v) in entries {
            cols[next[i]] = j;
            vals[next[i]] = v;
            next[i] += 1;
        }

        let mut row_ptr = Vec::with_capacity(num_rows + 1);
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        row_ptr.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for i in 0..num_rows {
            scratch.clear();
            scratch.extend(
                cols[counts[i]..counts[i + 1]]
                    .iter()
                    .copied()
                    .zip(vals[counts[i]..counts[i + 1]].iter().copied()),
            );
            scratch.sort_by_key(|&(j, _)| j);
            for &(j, v) in &scratch {
                if col_idx.len() > row_ptr[i] && *col_idx.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self::from_parts_unchecked(
            num_rows, num_cols, row_ptr, col_idx, values,
        ))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_parts_unchecked(n, n, (0..=n).collect(), (0..n).collect(), vec![1.0; n])
    }

    /// Dense row-major input; exact zeros are not stored.
    pub fn from_dense(num_rows: usize, num_cols: usize, dense: &[f64]) -> Self {
        assert_eq!(dense.len(), num_rows * num_cols);
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for i in 0..num_rows {
            for j in 0..num_cols {
                let v = dense[i * num_cols + j];
                if v != 0.0 {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self::from_parts_unchecked(num_rows, num_cols, row_ptr, col_idx, values)
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn num_cols(&self) -> usize {
        self.num_cols
    }

    pub fn nnz(&self) -> usize {
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

    pub fn is_square(&self) -> bool {
        self.num_rows == self.num_cols
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    /// Storage slot of entry `(i, j)`, if present.
    pub fn find(&self, i: usize, j: usize) -> Option<usize> {
        let start = self.row_ptr[i];
        self.col_idx[start..self.row_ptr[i + 1]]
            .binary_search(&j)
            .ok()
            .map(|k| start + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.find(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Row-major dense copy. Only meant for small matrices.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.num_rows * self.num_cols];
        for i in 0..self.num_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d[i * self.num_cols + j] = v;
            }
        }
        d
    }

    /// Entries strictly below (`lower = true`) or strictly above the diagonal.
    pub fn strict_triangle(&self, lower: bool) -> CsrMatrix {
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.num_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if (lower && j < i) || (!lower && j > i) {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self::from_parts_unchecked(self.num_rows, self.num_cols, row_ptr, col_idx, values)
    }

    /// `y = A x`, each row reduced in stored index order.
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64], exec: Exec) -> Result<()> {
        check_len(self.num_cols, x.len())?;
        check_len(self.num_rows, y.len())?;
        exec::fill(exec, y, |i| {
            let (cols, vals) = self.row(i);
            let mut s = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                s += v * x[j];
            }
            s
        });
        Ok(())
    }

    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.num_rows];
        self.spmv_into(x, &mut y, Exec::Sequential)?;
        Ok(y)
    }
}

pub(crate) fn validate_structure(
    num_rows: usize,
    num_cols: usize,
    row_ptr: &[usize],
    col_idx: &[usize],
) -> Result<()> {
    if row_ptr.len() != num_rows + 1 {
        return Err(Error::structure(format!(
            "row_ptr has length {}, expected {}",
            row_ptr.len(),
            num_rows + 1
        )));
    }
    if row_ptr[0] != 0 {
        return Err(Error::structure("row_ptr[0] must be 0"));
    }
    if row_ptr[num_rows] != col_idx.len() {
        return Err(Error::structure(format!(
            "row_ptr ends at {} but there are {} column indices",
            row_ptr[num_rows],
            col_idx.len()
        )));
    }
    for i in 0..num_rows {
        if row_ptr[i] > row_ptr[i + 1] {
            return Err(Error::structure(format!("row_ptr decreases at row {i}")));
        }
        let cols = &col_idx[row_ptr[i]..row_ptr[i + 1]];
        for (k, &j) in cols.iter().enumerate() {
            if j >= num_cols {
                return Err(Error::structure(format!(
                    "column {j} in row {i} out of range {num_cols}"
                )));
            }
            if k > 0 && cols[k - 1] >= j {
                return Err(Error::structure(format!(
                    "columns in row {i} not strictly increasing"
                )));
            }
        }
    }
    Ok(())
}
