// SPDX-License-Identifier: MIT OR Apache-2.0

//! Accuracy, seed statistics, principal-component overlap and activation strengths.
//!
//! Pairs are scored with the averaged rule
//! `p̃ = (σ(θᵀx⁺) + 1 − σ(θᵀx⁻)) / 2` and classified as "variant 0 holds"
//! when `p̃ > 0.5`. Unsupervised directions have no intrinsic orientation,
//! so labeled evaluation reports `max(raw, 1 − raw)` by default.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::ccs::Probe;
use crate::data::{ActivationMatrix, ContrastSet};
use crate::error::{Error, Result};
use crate::linalg::{numerical_rank, thin_svd, DEFAULT_RTOL};
use crate::math::{dot, norm, sigmoid};
use crate::spectral::Direction;

/// A linear scorer `x ↦ θᵀ(x − mean)` in ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Classifier {
    pub theta: Vec<f64>,
    /// Centering vector; `None` centers each evaluated set with its own joint mean.
    pub mean: Option<Vec<f64>>,
}

impl Classifier {
    pub fn from_probe(probe: &Probe) -> Self {
        Self {
            theta: probe.ambient_theta(),
            mean: Some(probe.mean.clone()),
        }
    }

    pub fn from_direction(direction: &Direction, mean: Option<Vec<f64>>) -> Self {
        Self {
            theta: direction.vector.clone(),
            mean,
        }
    }

    /// `p̃` for every row of a two-variant set, variant 0 as `x⁺`.
    pub fn score_pairs(&self, set: &ContrastSet) -> Result<Vec<f64>> {
        if set.n_variants() != 2 {
            return Err(Error::Validation(format!(
                "pair scoring needs exactly 2 variants, set has {}",
                set.n_variants()
            )));
        }
        let zp = self.logits(set, 0)?;
        let zm = self.logits(set, 1)?;
        Ok(zp.iter().zip(&zm).map(|(&a, &b)| pair_score(a, b)).collect())
    }

    /// `θᵀ(x − mean)` for every row of variant `v`.
    pub fn logits(&self, set: &ContrastSet, v: usize) -> Result<Vec<f64>> {
        if self.theta.len() != set.dim() {
            return Err(Error::DimensionMismatch {
                context: "classifier against data",
                expected: set.dim(),
                got: self.theta.len(),
            });
        }
        let mean = match &self.mean {
            Some(m) => m.clone(),
            None => crate::data::center(set).mean().to_vec(),
        };
        let m = set.variant_at(v).matrix();
        let theta = DVector::from_column_slice(&self.theta);
        let offset = dot(&self.theta, &mean);
        Ok((m * theta).iter().map(|z| z - offset).collect())
    }
}

fn pair_score(zp: f64, zm: f64) -> f64 {
    // 1 − σ(z) evaluated as σ(−z)
    0.5 * (sigmoid(zp) + sigmoid(-zm))
}

/// `p̃` for one centered pair.
pub fn predict_pair(theta: &[f64], x_plus: &[f64], x_minus: &[f64]) -> Result<f64> {
    if theta.len() != x_plus.len() || theta.len() != x_minus.len() {
        return Err(Error::DimensionMismatch {
            context: "pair prediction",
            expected: theta.len(),
            got: x_plus.len().max(x_minus.len()),
        });
    }
    Ok(pair_score(dot(theta, x_plus), dot(theta, x_minus)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub raw_accuracy: f64,
    pub sign_flipped: bool,
    /// `p̃` per pair, reported as `1 − p̃` when the sign was flipped.
    pub per_pair_scores: Vec<f64>,
    pub label_track: String,
}

pub fn accuracy(
    classifier: &Classifier,
    set: &ContrastSet,
    label_track: &str,
    resolve_sign: bool,
) -> Result<EvalReport> {
    let labels = set.label(label_track)?;
    let scores = classifier.score_pairs(set)?;
    let hits = scores
        .iter()
        .zip(labels)
        .filter(|(&p, &l)| (p > 0.5) == l)
        .count();
    let raw = hits as f64 / labels.len() as f64;
    let flipped = resolve_sign && raw < 0.5;
    Ok(EvalReport {
        accuracy: if flipped { 1.0 - raw } else { raw },
        raw_accuracy: raw,
        sign_flipped: flipped,
        per_pair_scores: if flipped {
            scores.iter().map(|p| 1.0 - p).collect()
        } else {
            scores
        },
        label_track: label_track.to_string(),
    })
}

/// Fraction of samples whose projection sign matches the label, maximized over orientation.
pub fn sign_accuracy(projections: &[f64], labels: &[bool]) -> Result<f64> {
    if projections.len() != labels.len() || labels.is_empty() {
        return Err(Error::DimensionMismatch {
            context: "sign accuracy",
            expected: labels.len(),
            got: projections.len(),
        });
    }
    let hits = projections
        .iter()
        .zip(labels)
        .filter(|(&p, &l)| (p > 0.0) == l)
        .count();
    let raw = hits as f64 / labels.len() as f64;
    Ok(raw.max(1.0 - raw))
}

/// `λ^K = ‖V_{:K}ᵀ θ̂‖` for `K = 1..=k_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapCurve {
    pub k: Vec<usize>,
    pub lambda: Vec<f64>,
}

pub fn pc_overlap(theta: &[f64], x_stacked: &ActivationMatrix, k_max: usize) -> Result<OverlapCurve> {
    if theta.len() != x_stacked.ncols() {
        return Err(Error::DimensionMismatch {
            context: "overlap direction against data",
            expected: x_stacked.ncols(),
            got: theta.len(),
        });
    }
    if k_max == 0 {
        return Err(Error::InvalidConfig("k_max must be at least 1".into()));
    }
    let nt = norm(theta);
    if nt == 0.0 {
        return Err(Error::Degenerate("overlap of a zero vector".into()));
    }
    let svd = thin_svd(x_stacked.matrix())?;
    let rank = numerical_rank(&svd.s, DEFAULT_RTOL);
    if k_max > rank {
        return Err(Error::RankExceeded {
            requested: k_max,
            rank,
        });
    }
    let unit = DVector::from_iterator(theta.len(), theta.iter().map(|x| x / nt));
    let mut acc = 0.0;
    let mut lambda = Vec::with_capacity(k_max);
    for j in 0..k_max {
        let c = svd.vt.row(j).transpose().dot(&unit);
        acc += c * c;
        lambda.push(acc.sqrt().min(1.0));
    }
    Ok(OverlapCurve {
        k: (1..=k_max).collect(),
        lambda,
    })
}

/// Per-row projections `θᵀx` of an (already centered) matrix.
pub fn activation_strengths(theta: &[f64], m: &ActivationMatrix) -> Result<Vec<f64>> {
    if theta.len() != m.ncols() {
        return Err(Error::DimensionMismatch {
            context: "activation strengths",
            expected: m.ncols(),
            got: theta.len(),
        });
    }
    Ok((m.matrix() * DVector::from_column_slice(theta))
        .iter()
        .copied()
        .collect())
}

/// Row indices sorted by `|value|` descending (stable on ties).
pub fn by_magnitude(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].abs().total_cmp(&values[a].abs()));
    idx
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedStats {
    pub min: f64,
    pub median: f64,
    pub max: f64,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

pub fn seed_stats(accs: &[f64]) -> Result<SeedStats> {
    if accs.is_empty() {
        return Err(Error::InvalidConfig("seed statistics of an empty list".into()));
    }
    let mut s = accs.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let median = if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    };
    let mean = s.iter().sum::<f64>() / n as f64;
    let var = s.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    Ok(SeedStats {
        min: s[0],
        median,
        max: s[n - 1],
        mean,
        std: var.sqrt(),
    })
}
