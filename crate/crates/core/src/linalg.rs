//! Dense row-major matrices and the handful of vector kernels the solvers need.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense real matrix stored row by row; row `i` is the measurement vector `a_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDimension(format!(
                "matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidDimension(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("matrix entries must be finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidDimension("ragged rows".into()));
        }
        Self::from_vec(rows.len(), cols, rows.concat())
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self {
            rows: n,
            cols: n,
            data,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `out = A x`
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (o, row) in out.iter_mut().zip(self.row_iter()) {
            *o = dot(row, x);
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.mul_vec_into(x, &mut out);
        out
    }

    /// `out = Aᵀ y`
    pub fn tmul_vec_into(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        out.fill(0.0);
        for (yi, row) in y.iter().zip(self.row_iter()) {
            if *yi != 0.0 {
                axpy(*yi, row, out);
            }
        }
    }

    pub fn tmul_vec(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        self.tmul_vec_into(y, &mut out);
        out
    }

    /// `AᵀA / scale`, a `cols x cols` symmetric matrix.
    pub fn gram(&self, scale: f64) -> Matrix {
        let p = self.cols;
        let mut g = vec![0.0; p * p];
        for row in self.row_iter() {
            for (j, &rj) in row.iter().enumerate() {
                if rj == 0.0 {
                    continue;
                }
                // upper triangle only, mirrored below
                let dst = &mut g[j * p + j..(j + 1) * p];
                axpy(rj, &row[j..], dst);
            }
        }
        for j in 0..p {
            for k in j..p {
                let v = g[j * p + k] / scale;
                g[j * p + k] = v;
                g[k * p + j] = v;
            }
        }
        Matrix {
            rows: p,
            cols: p,
            data: g,
        }
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // four accumulators let the compiler vectorize
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn norm1(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(x: &[f64], c: f64) -> Vec<f64> {
    x.iter().map(|v| c * v).collect()
}

/// `‖Dx‖₁` for the forward-difference operator `D`.
pub fn tv_norm(x: &[f64]) -> f64 {
    x.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// Neumaier-compensated sum of squares.
pub fn sum_squares(x: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in x {
        let t = v * v;
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_matches_explicit_product() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0, 0.0], vec![-1.0, 0.5, 3.0]]).unwrap();
        let g = a.gram(2.0);
        for j in 0..3 {
            for k in 0..3 {
                let expect: f64 = (0..2).map(|i| a.row(i)[j] * a.row(i)[k]).sum::<f64>() / 2.0;
                assert!((g.row(j)[k] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn transpose_product_is_adjoint() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, -4.0], vec![0.5, 0.0]]).unwrap();
        let x = [0.3, -1.1];
        let y = [1.0, 2.0, -3.0];
        assert!((dot(&a.mul_vec(&x), &y) - dot(&x, &a.tmul_vec(&y))).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Matrix::from_vec(0, 3, vec![]).is_err());
        assert!(Matrix::from_vec(2, 2, vec![1.0; 3]).is_err());
        assert!(Matrix::from_vec(1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn tv_norm_of_steps() {
        assert_eq!(tv_norm(&[0.0, 0.0, 1.0, -1.0]), 3.0);
        assert_eq!(tv_norm(&[2.0]), 0.0);
    }
}
