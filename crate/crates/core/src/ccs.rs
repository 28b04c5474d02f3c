// SPDX-License-Identifier: MIT OR Apache-2.0

//! Contrast-consistent search: a linear probe `p(x) = σ(θᵀx)` trained by
//! full-batch gradient descent on
//!
//! ```text
//! L_cons = mean_i [σ(θᵀx⁺_i) + σ(θᵀx⁻_i) − 1]²
//! L_conf = mean_i min{σ(θᵀx⁺_i), σ(θᵀx⁻_i), 1 − σ(θᵀx⁺_i), 1 − σ(θᵀx⁻_i)}²
//! ```
//!
//! There is no bias term; inputs are mean-centered. Two optional
//! alterations: renormalizing θ to unit length after every update, and
//! projecting the data onto the row space `V_r` of the stacked training
//! data before training, in which case the probe reads `σ(θᵀV_rᵀx)`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{stacked, CenteredContrastSet};
use crate::error::{Error, Result};
use crate::linalg::{row_space, DEFAULT_RTOL};
use crate::math::{columns, from_columns, sigmoid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    PlainGd,
    /// Adam with β₁ = 0.9, β₂ = 0.999, ε = 1e-8.
    AdaptiveMoment,
}

impl std::str::FromStr for Optimizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain_gd" | "gd" => Ok(Self::PlainGd),
            "adaptive_moment" | "adam" => Ok(Self::AdaptiveMoment),
            other => Err(Error::InvalidConfig(format!("unknown optimizer `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CcsConfig {
    pub use_consistency: bool,
    pub use_confidence: bool,
    /// Renormalize θ after every update.
    pub unit_norm: bool,
    /// Train in the row space of the stacked training data.
    pub svd_project: bool,
    pub rank_rtol: f64,
    pub learning_rate: f64,
    pub steps: usize,
    pub seeds: Vec<u64>,
    pub optimizer: Optimizer,
    /// Number of evenly spaced loss-curve samples (the final step is always included).
    pub curve_points: usize,
}

impl Default for CcsConfig {
    fn default() -> Self {
        Self {
            use_consistency: true,
            use_confidence: true,
            unit_norm: false,
            svd_project: false,
            rank_rtol: DEFAULT_RTOL,
            learning_rate: 1e-3,
            steps: 1000,
            seeds: vec![0],
            optimizer: Optimizer::AdaptiveMoment,
            curve_points: 50,
        }
    }
}

impl CcsConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !self.use_consistency && !self.use_confidence {
            return bad("at least one loss term must be enabled");
        }
        if self.steps == 0 {
            return bad("steps must be at least 1");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be positive and finite");
        }
        if !(self.rank_rtol.is_finite() && self.rank_rtol >= 0.0) {
            return bad("rank_rtol must be nonnegative and finite");
        }
        Ok(())
    }
}

/// Mean per-pair loss terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Losses {
    pub consistency: f64,
    pub confidence: f64,
}

impl Losses {
    /// Sum of the enabled terms.
    pub fn total(&self, config: &CcsConfig) -> f64 {
        let mut t = 0.0;
        if config.use_consistency {
            t += self.consistency;
        }
        if config.use_confidence {
            t += self.confidence;
        }
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub step: usize,
    pub total: f64,
    pub theta_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    /// Parameters in training coordinates (length `r` when projected, else `D`).
    pub theta: Vec<f64>,
    /// Columns of `V_r` (each of length `D`), present iff trained with the projection.
    pub projection: Option<Vec<Vec<f64>>>,
    pub mean: Vec<f64>,
    pub losses: Losses,
    pub final_loss: f64,
    pub seed: u64,
    pub loss_curve: Vec<CurvePoint>,
}

impl Probe {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// `V_r θ` when projected, otherwise θ: the probe acts as `σ(directionᵀx)`.
    pub fn ambient_theta(&self) -> Vec<f64> {
        match &self.projection {
            None => self.theta.clone(),
            Some(cols) => {
                let v = from_columns(cols, self.dim());
                (v * DVector::from_column_slice(&self.theta))
                    .iter()
                    .copied()
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub consistency: f64,
    pub confidence: f64,
    pub total: f64,
    /// Step at which training produced a non-finite value.
    pub diverged_at: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub per_seed: Vec<SeedResult>,
    pub selected_seed: u64,
    /// Loss curve of the selected seed.
    pub loss_curve: Vec<CurvePoint>,
    /// Probes of all converged seeds, in seed order.
    #[serde(skip)]
    pub probes: Vec<Probe>,
}

/// Both loss terms for θ against pair matrices `(X⁺, X⁻)`.
pub fn losses(theta: &[f64], xp: &DMatrix<f64>, xm: &DMatrix<f64>) -> Result<Losses> {
    let (zp, zm) = logits(theta, xp, xm)?;
    let n = zp.len() as f64;
    let mut cons = 0.0;
    let mut conf = 0.0;
    for (&a, &b) in zp.iter().zip(zm.iter()) {
        let (sp, sm) = (sigmoid(a), sigmoid(b));
        let c = sp + sm - 1.0;
        cons += c * c;
        let (_, v) = confidence_branch(a, b);
        conf += v * v;
    }
    Ok(Losses {
        consistency: cons / n,
        confidence: conf / n,
    })
}

/// Exact gradient of the enabled terms' mean with respect to θ.
///
/// On ties inside the `min`, the first argument in the order
/// `σ(z⁺), σ(z⁻), 1−σ(z⁺), 1−σ(z⁻)` is differentiated.
pub fn gradient(
    theta: &[f64],
    xp: &DMatrix<f64>,
    xm: &DMatrix<f64>,
    use_consistency: bool,
    use_confidence: bool,
) -> Result<Vec<f64>> {
    let (zp, zm) = logits(theta, xp, xm)?;
    let n = zp.len();
    let mut cp = DVector::zeros(n);
    let mut cm = DVector::zeros(n);
    for i in 0..n {
        let (a, b) = (zp[i], zm[i]);
        // σ'(z) = σ(z)σ(−z)
        let da = sigmoid(a) * sigmoid(-a);
        let db = sigmoid(b) * sigmoid(-b);
        if use_consistency {
            let r = 2.0 * (sigmoid(a) + sigmoid(b) - 1.0);
            cp[i] += r * da;
            cm[i] += r * db;
        }
        if use_confidence {
            let (branch, v) = confidence_branch(a, b);
            match branch {
                0 => cp[i] += 2.0 * v * da,
                1 => cm[i] += 2.0 * v * db,
                2 => cp[i] -= 2.0 * v * da,
                _ => cm[i] -= 2.0 * v * db,
            }
        }
    }
    let g = (xp.tr_mul(&cp) + xm.tr_mul(&cm)) / n as f64;
    Ok(g.iter().copied().collect())
}

/// Index and value of the smallest of `σ(a), σ(b), σ(−a), σ(−b)`, first on ties.
fn confidence_branch(a: f64, b: f64) -> (usize, f64) {
    let q = [sigmoid(a), sigmoid(b), sigmoid(-a), sigmoid(-b)];
    let mut best = 0;
    for k in 1..4 {
        if q[k] < q[best] {
            best = k;
        }
    }
    (best, q[best])
}

fn logits(
    theta: &[f64],
    xp: &DMatrix<f64>,
    xm: &DMatrix<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    if theta.len() != xp.ncols() || xp.shape() != xm.shape() {
        return Err(Error::DimensionMismatch {
            context: "probe parameters against pair data",
            expected: xp.ncols(),
            got: theta.len(),
        });
    }
    let t = DVector::from_column_slice(theta);
    Ok((xp * &t, xm * &t))
}

/// Pair matrices in training coordinates plus the projection, if any.
struct Prepared {
    xp: DMatrix<f64>,
    xm: DMatrix<f64>,
    projection: Option<DMatrix<f64>>,
}

impl Prepared {
    fn new(set: &CenteredContrastSet, config: &CcsConfig) -> Result<Self> {
        let (xp, xm) = set.pair()?;
        if !config.svd_project {
            return Ok(Self {
                xp: xp.clone(),
                xm: xm.clone(),
                projection: None,
            });
        }
        let v = row_space(stacked(set).matrix(), config.rank_rtol)?;
        if v.ncols() == 0 {
            return Err(Error::Degenerate(
                "training data has numerical rank 0; nothing to project onto".into(),
            ));
        }
        Ok(Self {
            xp: xp * &v,
            xm: xm * &v,
            projection: Some(v),
        })
    }
}

/// Unit-length Gaussian initialization for `seed`.
pub fn init_theta(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = crate::math::norm(&v);
        if n > 0.0 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

pub fn train_one(set: &CenteredContrastSet, config: &CcsConfig, seed: u64) -> Result<Probe> {
    config.validate()?;
    let data = Prepared::new(set, config)?;
    run(&data, set.mean(), config, seed)
}

fn curve_steps(steps: usize, points: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..points.max(1))
        .map(|k| k * steps / points.max(1))
        .collect();
    out.push(steps);
    out.dedup();
    out
}

fn run(data: &Prepared, mean: &[f64], config: &CcsConfig, seed: u64) -> Result<Probe> {
    let r = data.xp.ncols();
    let mut theta = DVector::from_vec(init_theta(r, seed));
    let mut m = DVector::zeros(r);
    let mut v = DVector::<f64>::zeros(r);
    let (b1, b2, eps) = (0.9_f64, 0.999_f64, 1e-8);
    let checkpoints = curve_steps(config.steps, config.curve_points);
    let mut next_checkpoint = 0;
    let mut curve = Vec::with_capacity(checkpoints.len());

    let record = |step: usize, theta: &DVector<f64>, curve: &mut Vec<CurvePoint>| -> Result<()> {
        let l = losses(theta.as_slice(), &data.xp, &data.xm)?;
        let total = l.total(config);
        if !total.is_finite() {
            return Err(Error::Diverged { seed, step });
        }
        curve.push(CurvePoint {
            step,
            total,
            theta_norm: theta.norm(),
        });
        Ok(())
    };

    for step in 0..=config.steps {
        if checkpoints.get(next_checkpoint) == Some(&step) {
            record(step, &theta, &mut curve)?;
            next_checkpoint += 1;
        }
        if step == config.steps {
            break;
        }
        let g = DVector::from_vec(gradient(
            theta.as_slice(),
            &data.xp,
            &data.xm,
            config.use_consistency,
            config.use_confidence,
        )?);
        match config.optimizer {
            Optimizer::PlainGd => theta.axpy(-config.learning_rate, &g, 1.0),
            Optimizer::AdaptiveMoment => {
                let t = (step + 1) as i32;
                m = m * b1 + &g * (1.0 - b1);
                v = v * b2 + g.component_mul(&g) * (1.0 - b2);
                let mhat = &m / (1.0 - b1.powi(t));
                let vhat = &v / (1.0 - b2.powi(t));
                let upd = mhat.zip_map(&vhat, |a, b| a / (b.sqrt() + eps));
                theta.axpy(-config.learning_rate, &upd, 1.0);
            }
        }
        if config.unit_norm {
            let n = theta.norm();
            if !(n.is_finite() && n > 0.0) {
                return Err(Error::Diverged { seed, step: step + 1 });
            }
            theta /= n;
        }
        if theta.iter().any(|x| !x.is_finite()) {
            return Err(Error::Diverged { seed, step: step + 1 });
        }
    }

    let l = losses(theta.as_slice(), &data.xp, &data.xm)?;
    Ok(Probe {
        theta: theta.iter().copied().collect(),
        projection: data.projection.as_ref().map(columns),
        mean: mean.to_vec(),
        final_loss: l.total(config),
        losses: l,
        seed,
        loss_curve: curve,
    })
}

/// Trains one probe per seed in parallel and keeps the lowest total loss
/// (earliest seed on ties). Diverged seeds are reported, not fatal, unless
/// every seed diverges.
pub fn train_multi(set: &CenteredContrastSet, config: &CcsConfig) -> Result<(Probe, TrainReport)> {
    config.validate()?;
    if config.seeds.is_empty() {
        return Err(Error::InvalidConfig("at least one seed is required".into()));
    }
    let data = Prepared::new(set, config)?;
    let results: Vec<Result<Probe>> = config
        .seeds
        .par_iter()
        .map(|&seed| run(&data, set.mean(), config, seed))
        .collect();

    let mut per_seed = Vec::with_capacity(results.len());
    let mut probes = Vec::with_capacity(results.len());
    for (seed, res) in config.seeds.iter().zip(results) {
        match res {
            Ok(p) => {
                per_seed.push(SeedResult {
                    seed: *seed,
                    consistency: p.losses.consistency,
                    confidence: p.losses.confidence,
                    total: p.final_loss,
                    diverged_at: None,
                });
                probes.push(p);
            }
            Err(Error::Diverged { step, .. }) => {
                log::warn!("seed {seed} diverged at step {step}");
                per_seed.push(SeedResult {
                    seed: *seed,
                    consistency: f64::NAN,
                    confidence: f64::NAN,
                    total: f64::NAN,
                    diverged_at: Some(step),
                });
            }
            Err(e) => return Err(e),
        }
    }
    let best = probes
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.final_loss.total_cmp(&b.final_loss).then(i.cmp(j)))
        .map(|(_, p)| p.clone())
        .ok_or(Error::AllSeedsDiverged(config.seeds.len()))?;
    let report = TrainReport {
        per_seed,
        selected_seed: best.seed,
        loss_curve: best.loss_curve.clone(),
        probes,
    };
    Ok((best, report))
}
