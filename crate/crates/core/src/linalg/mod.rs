// SPDX-License-Identifier: MIT OR Apache-2.0

//! Dense kernels: thin SVD, symmetric eigendecomposition, numerical rank and
//! the whitening map used by the generalized (ratio) eigenproblem.
//!
//! Singular and eigenvectors carry a deterministic sign: the component with
//! the largest magnitude is positive (first such component on exact ties).

mod eig;
mod svd;

use nalgebra::DMatrix;

use crate::data::ActivationMatrix;
use crate::error::{Error, Result};

pub use eig::{sym_eig, SYMMETRY_TOL};
pub use svd::thin_svd;

/// Default relative tolerance for [`numerical_rank`].
pub const DEFAULT_RTOL: f64 = 1e-10;

/// Economy SVD `X = U Σ Vᵀ` with `k = min(rows, cols)` components.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// `rows × k`, orthonormal columns.
    pub u: DMatrix<f64>,
    /// Descending and nonnegative.
    pub s: Vec<f64>,
    /// `k × cols`, orthonormal rows.
    pub vt: DMatrix<f64>,
}

impl SvdResult {
    /// Right singular vectors as columns (`cols × k`).
    pub fn v(&self) -> DMatrix<f64> {
        self.vt.transpose()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (j, s) in self.s.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * &self.vt
    }
}

/// Eigenvalues in descending order with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigResult {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

/// `W = V_r Σ_r⁻¹`, mapping whitened rank-`r` coordinates into the ambient space.
///
/// For the matrix `X` it was built from, `Wᵀ XᵀX W = I_r`.
#[derive(Debug, Clone)]
pub struct Whitener {
    pub basis: DMatrix<f64>,
    pub rank: usize,
    pub tol_used: f64,
    /// `V_r`, the row space of `X`.
    pub row_space: DMatrix<f64>,
    /// `σ_1 … σ_r`.
    pub singular_values: Vec<f64>,
}

impl Whitener {
    /// Ambient vector `W w′` for whitened coordinates `w′`.
    pub fn to_ambient(&self, w: &[f64]) -> Vec<f64> {
        assert_eq!(w.len(), self.rank, "whitened vector has wrong length");
        (&self.basis * nalgebra::DVector::from_column_slice(w))
            .iter()
            .copied()
            .collect()
    }
}

/// Count of singular values strictly above `rtol · s[0]`.
pub fn numerical_rank(s: &[f64], rtol: f64) -> usize {
    match s.first() {
        Some(&s0) if s0 > 0.0 => s.iter().filter(|&&v| v > rtol * s0).count(),
        _ => 0,
    }
}

pub fn make_whitener(x: &ActivationMatrix, rtol: f64) -> Result<Whitener> {
    let svd = thin_svd(x.matrix())?;
    let rank = numerical_rank(&svd.s, rtol);
    if rank == 0 {
        return Err(Error::Degenerate(
            "cannot whiten a matrix of numerical rank 0".into(),
        ));
    }
    let row_space = svd.v().columns(0, rank).clone_owned();
    let mut basis = row_space.clone();
    for (j, s) in svd.s.iter().take(rank).enumerate() {
        basis.column_mut(j).unscale_mut(*s);
    }
    Ok(Whitener {
        basis,
        rank,
        tol_used: rtol,
        row_space,
        singular_values: svd.s[..rank].to_vec(),
    })
}

/// Orthonormal basis of the row space of `x` (the first `r` right singular vectors).
pub fn row_space(x: &DMatrix<f64>, rtol: f64) -> Result<DMatrix<f64>> {
    let svd = thin_svd(x)?;
    let rank = numerical_rank(&svd.s, rtol);
    Ok(svd.v().columns(0, rank).clone_owned())
}

/// `+1` when the largest-magnitude entry is positive (first on ties), else `-1`.
pub(crate) fn canonical_sign(v: &[f64]) -> f64 {
    let mut best = 0.0_f64;
    let mut sign = 1.0;
    for &x in v {
        if x.abs() > best {
            best = x.abs();
            sign = x.signum();
        }
    }
    sign
}
