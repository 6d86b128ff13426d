use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Result};

/// Row-major `f64` array with an explicit shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(mismatch(format!("shape {shape:?} needs {n} values, got {}", data.len())));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Self { shape: shape.to_vec(), data: vec![0.0; shape.iter().product()] }
    }

    pub fn zeros_like(other: &Tensor) -> Self {
        Self::zeros(&other.shape)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// `C = A B + beta C` on strided row/column views, via `matrixmultiply`.
///
/// `a` is `m x k`, `b` is `k x n`, `c` is `m x n`; each given as
/// `(slice, row_stride, col_stride)`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: (&[f64], usize, usize),
    b: (&[f64], usize, usize),
    beta: f64,
    c: (&mut [f64], usize, usize),
) {
    if m == 0 || n == 0 {
        return;
    }
    let extent = |rows: usize, cols: usize, rs: usize, cs: usize| {
        if rows == 0 || cols == 0 {
            0
        } else {
            (rows - 1) * rs + (cols - 1) * cs + 1
        }
    };
    assert!(a.0.len() >= extent(m, k, a.1, a.2), "gemm: A out of bounds");
    assert!(b.0.len() >= extent(k, n, b.1, b.2), "gemm: B out of bounds");
    assert!(c.0.len() >= extent(m, n, c.1, c.2), "gemm: C out of bounds");
    // SAFETY: the asserts above bound every element the kernel can touch.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.0.as_ptr(),
            a.1 as isize,
            a.2 as isize,
            b.0.as_ptr(),
            b.1 as isize,
            b.2 as isize,
            beta,
            c.0.as_mut_ptr(),
            c.1 as isize,
            c.2 as isize,
        );
    }
}

/// `out (m x n) = x (m x k) * w^T` with `w` stored `n x k`; `beta` scales `out`.
pub(crate) fn matmul_nt(x: &[f64], w: &[f64], m: usize, k: usize, n: usize, beta: f64, out: &mut [f64]) {
    gemm(m, k, n, (x, k, 1), (w, 1, k), beta, (out, n, 1));
}

/// `out (n x k) += dz^T (n x m) * x (m x k)`.
pub(crate) fn matmul_tn_acc(dz: &[f64], x: &[f64], m: usize, n: usize, k: usize, out: &mut [f64]) {
    gemm(n, m, k, (dz, 1, n), (x, k, 1), 1.0, (out, k, 1));
}

/// `out (m x k) = dz (m x n) * w (n x k)`; `beta` scales `out`.
pub(crate) fn matmul_nn(dz: &[f64], w: &[f64], m: usize, n: usize, k: usize, beta: f64, out: &mut [f64]) {
    gemm(m, n, k, (dz, n, 1), (w, k, 1), beta, (out, k, 1));
}
