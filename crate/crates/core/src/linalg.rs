//! Small dense helpers: stack LU determinants for `2n × 2n` complex
//! matrices (`n ≤ 3`) and numerical rank through `nalgebra`'s SVD.

use nalgebra::DMatrix;

use crate::C64;

pub(crate) const MAX_DIM: usize = 8;

/// Square complex matrix with inline storage, row-major.
#[derive(Clone, Copy, Debug)]
pub(crate) struct SmallMat {
    pub size: usize,
    pub a: [[C64; MAX_DIM]; MAX_DIM],
}

impl SmallMat {
    pub fn zeros(size: usize) -> Self {
        assert!(size <= MAX_DIM);
        Self {
            size,
            a: [[C64::new(0.0, 0.0); MAX_DIM]; MAX_DIM],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size);
        for i in 0..size {
            m.a[i][i] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self) -> C64 {
        let n = self.size;
        let mut a = self.a;
        let mut det = C64::new(1.0, 0.0);
        for k in 0..n {
            let mut piv = k;
            let mut best = a[k][k].norm_sqr();
            for (i, row) in a.iter().enumerate().take(n).skip(k + 1) {
                let v = row[k].norm_sqr();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best == 0.0 {
                return C64::new(0.0, 0.0);
            }
            if piv != k {
                a.swap(piv, k);
                det = -det;
            }
            let d = a[k][k];
            det *= d;
            let inv = d.inv();
            for i in (k + 1)..n {
                let f = a[i][k] * inv;
                if f == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in (k + 1)..n {
                    let v = a[k][j];
                    a[i][j] -= f * v;
                }
            }
        }
        det
    }

    pub fn to_dmatrix(self) -> DMatrix<C64> {
        DMatrix::from_fn(self.size, self.size, |i, j| self.a[i][j])
    }
}

/// Realification of complex columns: each complex row `r` gives the real
/// rows `Re r` and `Im r`.
pub(crate) fn realify(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C64) -> DMatrix<f64> {
    DMatrix::from_fn(2 * rows, cols, |i, j| {
        let z = f(i % rows, j);
        if i < rows {
            z.re
        } else {
            z.im
        }
    })
}

/// Number of singular values above `rel_tol · σ_max`.
pub(crate) fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}
