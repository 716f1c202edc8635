//! Independent reference computations shared by the integration suites.
//! Everything here works on dense arrays or plain loops and does not call
//! into the code paths it is used to check.

#![allow(dead_code)]

use iluk::{BcsrMatrix, CsrMatrix, PatternMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random sparse square matrix with about `per_row - 1` off-diagonal entries
/// per row and a strictly dominant diagonal.
pub fn random_dominant(rng: &mut ChaCha8Rng, n: usize, per_row: usize) -> CsrMatrix {
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, 0.0));
        for _ in 1..per_row.min(n) {
            let j = rng.gen_range(0..n);
            if j != i {
                t.push((i, j, rng.gen_range(-1.0..1.0)));
            }
        }
    }
    let mut a = CsrMatrix::from_triplets(n, n, &t).unwrap();
    for i in 0..n {
        let (cols, vals) = a.row(i);
        let off: f64 = cols
            .iter()
            .zip(vals)
            .filter(|(&j, _)| j != i)
            .map(|(_, v)| v.abs())
            .sum();
        let margin = 1.0 + rng.gen_range(0.0..1.0);
        let k = a.find(i, i).unwrap();
        a.values_mut()[k] = off + margin;
    }
    a
}

/// Random pattern with full diagonal and about `per_row` entries per row.
pub fn random_pattern(rng: &mut ChaCha8Rng, n: usize, per_row: usize) -> PatternMatrix {
    let rows = (0..n)
        .map(|i| {
            let mut r = vec![i];
            for _ in 1..per_row {
                r.push(rng.gen_range(0..n));
            }
            r
        })
        .collect();
    PatternMatrix::from_rows(n, rows).unwrap()
}

/// Row-major dense matrix with uniform entries and `n` added to the diagonal.
pub fn random_dense_well_conditioned(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            d[i * n + j] = rng.gen_range(-1.0..1.0);
        }
        d[i * n + i] += n as f64 + 1.0;
    }
    d
}

/// Boolean Gaussian elimination: the complete fill pattern of LU without pivoting.
pub fn symbolic_elimination(p: &PatternMatrix) -> Vec<Vec<usize>> {
    let n = p.n();
    let mut f = vec![false; n * n];
    for (i, j) in p.entries() {
        f[i * n + j] = true;
    }
    for i in 0..n {
        for piv in 0..i {
            if f[i * n + piv] {
                for j in piv + 1..n {
                    if f[piv * n + j] {
                        f[i * n + j] = true;
                    }
                }
            }
        }
    }
    (0..n)
        .map(|i| (0..n).filter(|&j| f[i * n + j]).collect())
        .collect()
}

/// Unpivoted dense LU, in place, row-major; unit-lower L below the diagonal.
pub fn dense_lu(a: &[f64], n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    for p in 0..n {
        for i in p + 1..n {
            m[i * n + p] /= m[p * n + p];
            let l = m[i * n + p];
            for j in p + 1..n {
                m[i * n + j] -= l * m[p * n + j];
            }
        }
    }
    m
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&r, &s| m[r * n + c].abs().total_cmp(&m[s * n + c].abs()))
            .unwrap();
        for j in 0..n {
            m.swap(c * n + j, piv * n + j);
        }
        x.swap(c, piv);
        for r in c + 1..n {
            let f = m[r * n + c] / m[c * n + c];
            for j in c..n {
                m[r * n + j] -= f * m[c * n + j];
            }
            x[r] -= f * x[c];
        }
    }
    for r in (0..n).rev() {
        let mut s = x[r];
        for j in r + 1..n {
            s -= m[r * n + j] * x[j];
        }
        x[r] = s / m[r * n + r];
    }
    x
}

/// Solves `(I + T) x = b` by plain substitution on a dense strictly triangular `T`.
pub fn dense_unit_substitution(t: &[f64], b: &[f64], n: usize, lower: bool) -> Vec<f64> {
    let mut x = vec![0.0; n];
    let order: Vec<usize> = if lower { (0..n).collect() } else { (0..n).rev().collect() };
    for &i in &order {
        let mut s = b[i];
        for j in 0..n {
            if (lower && j < i) || (!lower && j > i) {
                s -= t[i * n + j] * x[j];
            }
        }
        x[i] = s;
    }
    x
}

/// 1 + number of edges on the longest dependency chain ending at each row.
pub fn longest_chain(deps: &[Vec<usize>], topo: &[usize]) -> Vec<usize> {
    let mut depth = vec![0usize; deps.len()];
    for &i in topo {
        depth[i] = 1 + deps[i].iter().map(|&j| depth[j]).max().unwrap_or(0);
    }
    depth
}

/// Block forward/backward substitution on the factors without level
/// scheduling: `L y = b` and `(I + U') x = D^-1 y` solved block row by block row.
pub fn block_substitution(
    lower: &BcsrMatrix,
    dinv: &BcsrMatrix,
    upper: &BcsrMatrix,
    b: &[f64],
) -> Vec<f64> {
    let bs = lower.block_size();
    let n = lower.num_block_rows();
    let mul = |blk: &[f64], v: &[f64], out: &mut [f64]| {
        for r in 0..bs {
            out[r] = (0..bs).map(|c| blk[r + c * bs] * v[c]).sum();
        }
    };
    let mut y = b.to_vec();
    let mut tmp = vec![0.0; bs];
    for i in 0..n {
        for t in lower.row_ptr()[i]..lower.row_ptr()[i + 1] {
            let j = lower.col_idx()[t];
            let yj = y[j * bs..(j + 1) * bs].to_vec();
            mul(lower.block(t), &yj, &mut tmp);
            for r in 0..bs {
                y[i * bs + r] -= tmp[r];
            }
        }
    }
    let mut x = vec![0.0; n * bs];
    for i in 0..n {
        mul(dinv.block(i), &y[i * bs..(i + 1) * bs], &mut tmp);
        x[i * bs..(i + 1) * bs].copy_from_slice(&tmp);
    }
    for i in (0..n).rev() {
        for t in upper.row_ptr()[i]..upper.row_ptr()[i + 1] {
            let j = upper.col_idx()[t];
            let xj = x[j * bs..(j + 1) * bs].to_vec();
            mul(upper.block(t), &xj, &mut tmp);
            for r in 0..bs {
                x[i * bs + r] -= tmp[r];
            }
        }
    }
    x
}

/// Sparse product `a * b` with a dense row accumulator.
pub fn spgemm(a: &CsrMatrix, b: &CsrMatrix) -> Vec<Vec<(usize, f64)>> {
    let mut acc = vec![0.0; b.num_cols()];
    let mut used = vec![false; b.num_cols()];
    let mut out = Vec::with_capacity(a.num_rows());
    for i in 0..a.num_rows() {
        let mut cols = Vec::new();
        let (ac, av) = a.row(i);
        for (&k, &v) in ac.iter().zip(av) {
            let (bc, bv) = b.row(k);
            for (&j, &w) in bc.iter().zip(bv) {
                if !used[j] {
                    used[j] = true;
                    cols.push(j);
                }
                acc[j] += v * w;
            }
        }
        cols.sort_unstable();
        out.push(cols.iter().map(|&j| (j, acc[j])).collect());
        for &j in &cols {
            acc[j] = 0.0;
            used[j] = false;
        }
    }
    out
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

pub fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}
