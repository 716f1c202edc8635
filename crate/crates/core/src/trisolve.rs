//! Level-scheduled unit triangular solves and the three-stage preconditioner
//! application `L y = b`, `z = D^-1 y`, `U' x = z`.
//!
//! A row's level is one more than the highest level among the rows it
//! depends on (level 1 when it depends on none). Rows that share a level are
//! independent and are solved concurrently; levels run one after another.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{check_len, Error, Result};
use crate::exec::{Exec, MIN_PAR_LEN};
use crate::factor::BlockIlukFactors;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Triangle {
    /// Entries strictly below the diagonal; solved top to bottom.
    Lower,
    /// Entries strictly above the diagonal; solved bottom to top.
    Upper,
}

/// Strictly triangular matrix `T` standing for the unit-diagonal system `(I + T)`.
#[derive(Debug, Clone)]
pub struct TriangularOperand {
    matrix: CsrMatrix,
    triangle: Triangle,
}

impl TriangularOperand {
    pub fn new(matrix: CsrMatrix, triangle: Triangle) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::structure("triangular operand must be square"));
        }
        for i in 0..matrix.num_rows() {
            for &j in matrix.row(i).0 {
                let ok = match triangle {
                    Triangle::Lower => j < i,
                    Triangle::Upper => j > i,
                };
                if !ok {
                    return Err(Error::structure(format!(
                        "entry ({i}, {j}) not strictly {}",
                        match triangle {
                            Triangle::Lower => "lower",
                            Triangle::Upper => "upper",
                        }
                    )));
                }
            }
        }
        Ok(Self { matrix, triangle })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn triangle(&self) -> Triangle {
        self.triangle
    }

    pub fn n(&self) -> usize {
        self.matrix.num_rows()
    }
}

/// Partition of the rows of a triangular operand into dependency levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSchedule {
    level_of_row: Vec<usize>,
    level_ptr: Vec<usize>,
    rows: Vec<usize>,
    // provenance
    triangle: Triangle,
    nnz: usize,
}

impl LevelSchedule {
    pub fn build(t: &TriangularOperand) -> Self {
        let a = &t.matrix;
        let n = a.num_rows();
        let mut level_of_row = vec![0usize; n];
        let mut num_levels = 0;
        let mut assign = |i: usize, level_of_row: &mut Vec<usize>| {
            let deepest = a.row(i).0.iter().map(|&j| level_of_row[j]).max().unwrap_or(0);
            level_of_row[i] = deepest + 1;
            num_levels = num_levels.max(deepest + 1);
        };
        match t.triangle {
            Triangle::Lower => (0..n).for_each(|i| assign(i, &mut level_of_row)),
            Triangle::Upper => (0..n).rev().for_each(|i| assign(i, &mut level_of_row)),
        }

        let mut level_ptr = vec![0usize; num_levels + 1];
        for &l in &level_of_row {
            level_ptr[l] += 1;
        }
        for l in 0..num_levels {
            level_ptr[l + 1] += level_ptr[l];
        }
        let mut next = level_ptr.clone();
        let mut rows = vec![0usize; n];
        for (i, &l) in level_of_row.iter().enumerate() {
            rows[next[l - 1]] = i;
            next[l - 1] += 1;
        }
        Self {
            level_of_row,
            level_ptr,
            rows,
            triangle: t.triangle,
            nnz: a.nnz(),
        }
    }

    pub fn n(&self) -> usize {
        self.level_of_row.len()
    }

    pub fn num_levels(&self) -> usize {
        self.level_ptr.len() - 1
    }

    /// Level of row `i`, starting at 1.
    pub fn level_of_row(&self, i: usize) -> usize {
        self.level_of_row[i]
    }

    /// Rows of the `l`-th group (0-based group index), ascending.
    pub fn group(&self, l: usize) -> &[usize] {
        &self.rows[self.level_ptr[l]..self.level_ptr[l + 1]]
    }

    pub fn groups(&self) -> impl Iterator<Item = &[usize]> + '_ {
        (0..self.num_levels()).map(move |l| self.group(l))
    }

    fn check(&self, t: &TriangularOperand) -> Result<()> {
        if self.n() != t.n() || self.triangle != t.triangle || self.nnz != t.matrix.nnz() {
            return Err(Error::structure(
                "level schedule was built for a different operand",
            ));
        }
        Ok(())
    }
}

#[inline]
fn row_value(a: &CsrMatrix, i: usize, b: &[f64], x: &[f64]) -> f64 {
    let (cols, vals) = a.row(i);
    let mut s = b[i];
    for (&j, &v) in cols.iter().zip(vals) {
        s -= v * x[j];
    }
    s
}

/// Solves `(I + T) x = b` level by level.
pub fn solve_unit_triangular_into(
    t: &TriangularOperand,
    schedule: &LevelSchedule,
    b: &[f64],
    x: &mut [f64],
    exec: Exec,
) -> Result<()> {
    schedule.check(t)?;
    check_len(t.n(), b.len())?;
    check_len(t.n(), x.len())?;
    let a = &t.matrix;

    #[cfg(feature = "parallel")]
    let mut staged: Vec<f64> = Vec::new();
    for group in schedule.groups() {
        #[cfg(feature = "parallel")]
        if exec.is_parallel() && group.len() >= MIN_PAR_LEN {
            let xr: &[f64] = x;
            group
                .par_iter()
                .with_min_len(MIN_PAR_LEN / 4)
                .map(|&i| row_value(a, i, b, xr))
                .collect_into_vec(&mut staged);
            for (&i, &v) in group.iter().zip(&staged) {
                x[i] = v;
            }
            continue;
        }
        let _ = (exec, MIN_PAR_LEN);
        for &i in group {
            x[i] = row_value(a, i, b, x);
        }
    }
    Ok(())
}

pub fn solve_unit_triangular(
    t: &TriangularOperand,
    schedule: &LevelSchedule,
    b: &[f64],
    exec: Exec,
) -> Result<Vec<f64>> {
    let mut x = vec![0.0; b.len()];
    solve_unit_triangular_into(t, schedule, b, &mut x, exec)?;
    Ok(x)
}

/// Block ILU(k) factors prepared for repeated application.
///
/// `L` and `U'` are expanded to point-wise CSR once (zeros inside blocks
/// dropped) and scheduled; `D^-1` stays block-diagonal.
#[derive(Debug, Clone)]
pub struct IlukPreconditioner {
    factors: BlockIlukFactors,
    lower: TriangularOperand,
    lower_schedule: LevelSchedule,
    upper: TriangularOperand,
    upper_schedule: LevelSchedule,
}

impl IlukPreconditioner {
    pub fn new(factors: BlockIlukFactors) -> Result<Self> {
        let lower = TriangularOperand::new(factors.lower.to_csr(), Triangle::Lower)?;
        let upper = TriangularOperand::new(factors.upper.to_csr(), Triangle::Upper)?;
        let lower_schedule = LevelSchedule::build(&lower);
        let upper_schedule = LevelSchedule::build(&upper);
        Ok(Self {
            factors,
            lower,
            lower_schedule,
            upper,
            upper_schedule,
        })
    }

    pub fn factors(&self) -> &BlockIlukFactors {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.factors.dim()
    }

    pub fn lower(&self) -> (&TriangularOperand, &LevelSchedule) {
        (&self.lower, &self.lower_schedule)
    }

    pub fn upper(&self) -> (&TriangularOperand, &LevelSchedule) {
        (&self.upper, &self.upper_schedule)
    }

    /// `x = (I + U')^-1 D^-1 (I + L)^-1 b`.
    pub fn apply_into(&self, b: &[f64], x: &mut [f64], exec: Exec) -> Result<()> {
        check_len(self.dim(), b.len())?;
        check_len(self.dim(), x.len())?;
        let mut y = vec![0.0; b.len()];
        solve_unit_triangular_into(&self.lower, &self.lower_schedule, b, &mut y, exec)?;
        let mut z = vec![0.0; b.len()];
        self.factors.dinv.spmv_into(&y, &mut z, exec)?;
        solve_unit_triangular_into(&self.upper, &self.upper_schedule, &z, x, exec)
    }
}

pub fn apply_preconditioner(p: &IlukPreconditioner, b: &[f64], exec: Exec) -> Result<Vec<f64>> {
    let mut x = vec![0.0; b.len()];
    p.apply_into(b, &mut x, exec)?;
    Ok(x)
}
