use crate::error::{Error, Result};

use super::CsrMatrix;

/// 7-point finite-difference Laplacian on an `nx x ny x nz` grid.
///
/// Diagonal 6, off-diagonals -1 to each axis neighbor inside the grid
/// (Dirichlet truncation), lexicographic numbering `x + nx * (y + ny * z)`.
pub fn poisson_3d(nx: usize, ny: usize, nz: usize) -> Result<CsrMatrix> {
    if nx == 0 || ny == 0 || nz == 0 {
        return Err(Error::structure(format!(
            "grid dimensions must be positive, got {nx}x{ny}x{nz}"
        )));
    }
    let n = nx * ny * nz;
    let plane = nx * ny;
    let nnz = 7 * n - 2 * (ny * nz + nx * nz + nx * ny);
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::with_capacity(nnz);
    let mut values = Vec::with_capacity(nnz);
    row_ptr.push(0);
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                let i = x + nx * (y + ny * z);
                let mut push = |j: usize, v: f64| {
                    col_idx.push(j);
                    values.push(v);
                };
                if z > 0 {
                    push(i - plane, -1.0);
                }
                if y > 0 {
                    push(i - nx, -1.0);
                }
                if x > 0 {
                    push(i - 1, -1.0);
                }
                push(i, 6.0);
                if x + 1 < nx {
                    push(i + 1, -1.0);
                }
                if y + 1 < ny {
                    push(i + nx, -1.0);
                }
                if z + 1 < nz {
                    push(i + plane, -1.0);
                }
                row_ptr.push(col_idx.len());
            }
        }
    }
    debug_assert_eq!(col_idx.len(), nnz);
    Ok(CsrMatrix::from_parts_unchecked(n, n, row_ptr, col_idx, values))
}
