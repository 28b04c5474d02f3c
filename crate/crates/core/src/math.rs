// SPDX-License-Identifier: MIT OR Apache-2.0

use nalgebra::DMatrix;

/// Logistic sigmoid evaluated without overflow for large |z|.
#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn column(m: &DMatrix<f64>, j: usize) -> Vec<f64> {
    m.column(j).iter().copied().collect()
}

pub(crate) fn columns(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.ncols()).map(|j| column(m, j)).collect()
}

pub(crate) fn from_columns(cols: &[Vec<f64>], nrows: usize) -> DMatrix<f64> {
    DMatrix::from_fn(nrows, cols.len(), |i, j| cols[j][i])
}

/// Frobenius norm of `m - m^T`.
pub(crate) fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = m[(i, j)] - m[(j, i)];
            acc += d * d;
        }
    }
    acc.sqrt()
}
