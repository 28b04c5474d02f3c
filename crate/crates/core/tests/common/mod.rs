// SPDX-License-Identifier: MIT OR Apache-2.0

//! Shared fixtures for the integration tests.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use relcon::{ActivationMatrix, ContrastSet};

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha20Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_vec(rng: &mut ChaCha20Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Two correlated, anisotropic variants with a random label track.
pub fn random_set(seed: u64, n: usize, d: usize) -> ContrastSet {
    let mut r = rng(seed);
    let scales = DMatrix::from_diagonal(&DVector::from_fn(d, |i, _| 1.0 + i as f64 * 0.3));
    let pos = gaussian(&mut r, n, d) * &scales;
    let mix = gaussian(&mut r, d, d) * 0.4;
    let neg = &pos * mix + gaussian(&mut r, n, d) * 0.7;
    let labels: Vec<bool> = (0..n).map(|_| r.random_bool(0.5)).collect();
    ContrastSet::pair(
        ActivationMatrix::new(pos).unwrap(),
        ActivationMatrix::new(neg).unwrap(),
        Some(("truth", labels)),
    )
    .unwrap()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn abs_cos(a: &[f64], b: &[f64]) -> f64 {
    (dot(a, b) / (norm(a) * norm(b))).abs()
}

pub fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Largest principal angle (radians) between the column spans of two orthonormal bases.
pub fn max_principal_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let m = a.transpose() * b;
    let s = m.singular_values();
    let smallest = s.iter().copied().fold(f64::INFINITY, f64::min);
    smallest.clamp(-1.0, 1.0).acos()
}
