use crate::error::{Error, Result};

use super::CsrMatrix;

/// Values-free square sparsity pattern with per-row sorted column lists.
///
/// Each row is its own growable vector, so inserting into or removing from a
/// row never touches any other row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternMatrix {
    n: usize,
    rows: Vec<Vec<usize>>,
}

impl PatternMatrix {
    /// An `n x n` pattern with no entries.
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            rows: vec![Vec::new(); n],
        }
    }

    pub fn full(n: usize) -> Self {
        Self {
            n,
            rows: (0..n).map(|_| (0..n).collect()).collect(),
        }
    }

    /// Builds a pattern from per-row column lists; each list is sorted and
    /// deduplicated.
    pub fn from_rows(n: usize, mut rows: Vec<Vec<usize>>) -> Result<Self> {
        if rows.len() != n {
            return Err(Error::Dimension {
                expected: n,
                found: rows.len(),
            });
        }
        for (i, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            row.dedup();
            if let Some(&j) = row.last() {
                if j >= n {
                    return Err(Error::structure(format!(
                        "pattern column {j} in row {i} out of range {n}"
                    )));
                }
            }
        }
        Ok(Self { n, rows })
    }

    pub(crate) fn from_sorted_rows_unchecked(n: usize, rows: Vec<Vec<usize>>) -> Self {
        debug_assert!(rows
            .iter()
            .all(|r| r.windows(2).all(|w| w[0] < w[1]) && r.last().map_or(true, |&j| j < n)));
        Self { n, rows }
    }

    /// Sparsity pattern of a square CSR matrix (stored entries, zero or not).
    pub fn from_csr(a: &CsrMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::structure(format!(
                "pattern requires a square matrix, got {}x{}",
                a.num_rows(),
                a.num_cols()
            )));
        }
        let rows = (0..a.num_rows()).map(|i| a.row(i).0.to_vec()).collect();
        Ok(Self::from_sorted_rows_unchecked(a.num_rows(), rows))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.rows[i]
    }

    pub fn row_len(&self, i: usize) -> usize {
        self.rows[i].len()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.rows[i].binary_search(&j).is_ok()
    }

    /// Returns `true` if the entry was newly inserted.
    pub fn insert(&mut self, i: usize, j: usize) -> bool {
        assert!(j < self.n, "column {j} out of range {}", self.n);
        match self.rows[i].binary_search(&j) {
            Ok(_) => false,
            Err(k) => {
                self.rows[i].insert(k, j);
                true
            }
        }
    }

    /// Returns `true` if the entry was present.
    pub fn remove(&mut self, i: usize, j: usize) -> bool {
        match self.rows[i].binary_search(&j) {
            Ok(k) => {
                self.rows[i].remove(k);
                true
            }
            Err(_) => false,
        }
    }

    pub fn has_full_diagonal(&self) -> bool {
        (0..self.n).all(|i| self.contains(i, i))
    }

    pub fn is_subset_of(&self, other: &PatternMatrix) -> bool {
        self.n == other.n
            && self
                .rows
                .iter()
                .zip(&other.rows)
                .all(|(a, b)| a.iter().all(|j| b.binary_search(j).is_ok()))
    }

    /// All `(row, col)` positions in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |&j| (i, j)))
    }
}
