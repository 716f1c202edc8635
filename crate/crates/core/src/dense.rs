//! Small dense block kernels. Blocks are `bs x bs`, column-major.

/// Pivots smaller than this fraction of the largest block entry count as zero.
pub const SINGULAR_RTOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseBlock {
    bs: usize,
    data: Vec<f64>,
}

impl DenseBlock {
    pub fn zeros(bs: usize) -> Self {
        Self {
            bs,
            data: vec![0.0; bs * bs],
        }
    }

    pub fn identity(bs: usize) -> Self {
        let mut b = Self::zeros(bs);
        for i in 0..bs {
            b.data[i + i * bs] = 1.0;
        }
        b
    }

    /// Wraps column-major data; panics if `data.len() != bs * bs`.
    pub fn from_col_major(bs: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), bs * bs, "block data length");
        Self { bs, data }
    }

    pub fn from_row_major(bs: usize, rows: &[f64]) -> Self {
        assert_eq!(rows.len(), bs * bs, "block data length");
        let mut b = Self::zeros(bs);
        for r in 0..bs {
            for c in 0..bs {
                b.data[r + c * bs] = rows[r * bs + c];
            }
        }
        b
    }

    pub fn bs(&self) -> usize {
        self.bs
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r + c * self.bs]
    }

    /// Inverse by LU with partial pivoting; `None` if singular to working precision.
    pub fn inverse(&self) -> Option<DenseBlock> {
        let mut out = vec![0.0; self.data.len()];
        invert(&self.data, self.bs, &mut out).then(|| DenseBlock::from_col_major(self.bs, out))
    }

    /// `self - a * b`.
    pub fn gemm_sub(&self, a: &DenseBlock, b: &DenseBlock) -> DenseBlock {
        assert!(self.bs == a.bs && a.bs == b.bs, "block sizes differ");
        let mut c = self.clone();
        gemm_sub(&mut c.data, &a.data, &b.data, self.bs);
        c
    }

    pub fn matmul(&self, other: &DenseBlock) -> DenseBlock {
        assert_eq!(self.bs, other.bs, "block sizes differ");
        let mut out = vec![0.0; self.data.len()];
        matmul(&self.data, &other.data, self.bs, &mut out);
        DenseBlock::from_col_major(self.bs, out)
    }
}

/// Writes `a^-1` into `out`. Returns `false` when a pivot falls below
/// `SINGULAR_RTOL * max|a|`.
pub fn invert(a: &[f64], bs: usize, out: &mut [f64]) -> bool {
    debug_assert_eq!(a.len(), bs * bs);
    debug_assert_eq!(out.len(), bs * bs);
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return false;
    }
    let tol = SINGULAR_RTOL * scale;

    if bs == 1 {
        if a[0].abs() < tol {
            return false;
        }
        out[0] = 1.0 / a[0];
        return true;
    }

    let mut lu = a.to_vec();
    let mut perm: Vec<usize> = (0..bs).collect();
    for c in 0..bs {
        let (mut piv, mut best) = (c, lu[c + c * bs].abs());
        for r in c + 1..bs {
            let v = lu[r + c * bs].abs();
            if v > best {
                piv = r;
                best = v;
            }
        }
        if best < tol {
            return false;
        }
        if piv != c {
            for col in 0..bs {
                lu.swap(c + col * bs, piv + col * bs);
            }
            perm.swap(c, piv);
        }
        let d = lu[c + c * bs];
        for r in c + 1..bs {
            lu[r + c * bs] /= d;
        }
        for col in c + 1..bs {
            let u = lu[c + col * bs];
            if u != 0.0 {
                for r in c + 1..bs {
                    lu[r + col * bs] -= lu[r + c * bs] * u;
                }
            }
        }
    }

    // column j of the inverse solves LU x = P e_j
    for j in 0..bs {
        let x = &mut out[j * bs..(j + 1) * bs];
        for (r, xr) in x.iter_mut().enumerate() {
            *xr = if perm[r] == j { 1.0 } else { 0.0 };
        }
        for r in 0..bs {
            let mut s = x[r];
            for c in 0..r {
                s -= lu[r + c * bs] * x[c];
            }
            x[r] = s;
        }
        for r in (0..bs).rev() {
            let mut s = x[r];
            for c in r + 1..bs {
                s -= lu[r + c * bs] * x[c];
            }
            x[r] = s / lu[r + r * bs];
        }
    }
    true
}

/// `c -= a * b`.
#[inline]
pub fn gemm_sub(c: &mut [f64], a: &[f64], b: &[f64], bs: usize) {
    for j in 0..bs {
        let cj = &mut c[j * bs..(j + 1) * bs];
        for l in 0..bs {
            let blj = b[l + j * bs];
            if blj == 0.0 {
                continue;
            }
            let al = &a[l * bs..(l + 1) * bs];
            for (ci, &ai) in cj.iter_mut().zip(al) {
                *ci -= ai * blj;
            }
        }
    }
}

/// `out = a * b`.
#[inline]
pub fn matmul(a: &[f64], b: &[f64], bs: usize, out: &mut [f64]) {
    out.fill(0.0);
    for j in 0..bs {
        let oj = &mut out[j * bs..(j + 1) * bs];
        for l in 0..bs {
            let blj = b[l + j * bs];
            let al = &a[l * bs..(l + 1) * bs];
            for (oi, &ai) in oj.iter_mut().zip(al) {
                *oi += ai * blj;
            }
        }
    }
}

/// `y = a * x`.
#[inline]
pub fn matvec(a: &[f64], x: &[f64], bs: usize, y: &mut [f64]) {
    y.fill(0.0);
    for (c, &xc) in x.iter().enumerate() {
        let col = &a[c * bs..(c + 1) * bs];
        for (yi, &ai) in y.iter_mut().zip(col) {
            *yi += ai * xc;
        }
    }
}
