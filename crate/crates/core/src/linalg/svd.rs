// SPDX-License-Identifier: MIT OR Apache-2.0

//! Thin SVD by one-sided Jacobi rotations (Hestenes).
//!
//! Columns of a working copy are orthogonalized pairwise until every pair is
//! orthogonal to machine precision; the column norms are then the singular
//! values. Wide inputs are handled through the transpose.

use nalgebra::DMatrix;

use super::{canonical_sign, SvdResult};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

pub fn thin_svd(m: &DMatrix<f64>) -> Result<SvdResult> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::Validation(format!(
            "SVD of an empty {rows}x{cols} matrix"
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("matrix has non-finite entries".into()));
    }

    // Jacobi wants at least as many rows as columns.
    let (left, s, right) = if rows >= cols {
        let (u, s, v) = jacobi(m.clone())?;
        (u, s, v)
    } else {
        let (u, s, v) = jacobi(m.transpose())?;
        (v, s, u)
    };

    let k = s.len();
    let mut u = left;
    let mut v = right;
    for j in 0..k {
        if canonical_sign(v.column(j).as_slice()) < 0.0 {
            v.column_mut(j).neg_mut();
            u.column_mut(j).neg_mut();
        }
    }
    Ok(SvdResult {
        u,
        s,
        vt: v.transpose(),
    })
}

/// Decomposes a tall `m × n` matrix (`m ≥ n`) as `U Σ Vᵀ` with `U` `m × n`.
fn jacobi(mut a: DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    let (m, n) = a.shape();
    let mut v = DMatrix::<f64>::identity(n, n);
    let tol = f64::EPSILON * (m as f64).sqrt();

    let mut converged = n == 1;
    let mut worst = 0.0;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        worst = 0.0_f64;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let cp = a.column(p);
                    let cq = a.column(q);
                    (cp.norm_squared(), cq.norm_squared(), cp.dot(&cq))
                };
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let off = gamma.abs() / (alpha * beta).sqrt();
                worst = worst.max(off);
                if off <= tol {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            routine: "one-sided Jacobi SVD",
            iterations: MAX_SWEEPS,
            residual: worst,
        });
    }

    let norms: Vec<f64> = (0..n).map(|j| a.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let s: Vec<f64> = order.iter().map(|&i| norms[i]).collect();

    // Columns whose singular value is at rounding level carry no usable
    // direction; they are replaced by an orthonormal completion.
    let cutoff = s[0] * f64::EPSILON * (m.max(n) as f64);
    let mut u = DMatrix::zeros(m, n);
    let mut vs = DMatrix::zeros(n, n);
    let mut filled = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        vs.set_column(dst, &v.column(src));
        if s[dst] > cutoff && s[dst] > 0.0 {
            u.set_column(dst, &(a.column(src) / s[dst]));
            filled.push(dst);
        }
    }
    complete_orthonormal(&mut u, &filled);
    Ok((u, s, vs))
}

fn rotate(m: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..m.nrows() {
        let xp = m[(i, p)];
        let xq = m[(i, q)];
        m[(i, p)] = c * xp - s * xq;
        m[(i, q)] = s * xp + c * xq;
    }
}

/// Fills the columns of `u` not listed in `filled` so that all columns are orthonormal.
fn complete_orthonormal(u: &mut DMatrix<f64>, filled: &[usize]) {
    let (m, n) = u.shape();
    let mut basis: Vec<usize> = filled.to_vec();
    let mut candidate = 0;
    for j in 0..n {
        if filled.contains(&j) {
            continue;
        }
        loop {
            assert!(candidate < m, "orthonormal completion ran out of axes");
            let mut w = nalgebra::DVector::<f64>::zeros(m);
            w[candidate] = 1.0;
            candidate += 1;
            // two Gram-Schmidt passes for stability
            for _ in 0..2 {
                for &b in &basis {
                    let proj = u.column(b).dot(&w);
                    w -= u.column(b) * proj;
                }
            }
            let norm = w.norm();
            if norm > 1e-8 {
                u.set_column(j, &(w / norm));
                basis.push(j);
                break;
            }
        }
    }
}
