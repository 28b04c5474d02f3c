// SPDX-License-Identifier: MIT OR Apache-2.0

//! Contrast sets with planted geometry.
//!
//! Every generator is a pure function of its [`GeometrySpec`]. Randomness
//! comes from ChaCha20 seeded with `spec.seed`, split into fixed streams so
//! that adding a feature never perturbs the draws of another:
//!
//! | stream | content |
//! |-------:|---------|
//! | 0 | planted directions (Gaussian draws, Gram-Schmidt, in slot order) |
//! | 1 | per-row base vectors, `D` draws per row |
//! | 2 | truth labels, one fair coin per row |
//! | 3 | truth magnitudes `|α_i|` |
//! | 4 | distractor labels for all rows, then distractor magnitudes |
//! | 5 | salient coefficients |
//! | 6 | noise, row by row, variant by variant, `D` draws each |
//!
//! Direction slots: 0 is the truth direction `t`, 1 the second feature
//! (sheared feature, distractor or `base_truth`), 2 `polarity`, 3 the
//! salient direction. Slots are drawn in order up to the highest one needed.
//!
//! Two-variant kinds place pairs symmetrically about a shared base,
//! `x± = b ± (α/2)·t + s·u + ε±`, so `x⁺ − x⁻ = α·t` and `tᵀ(x⁺ + x⁻) = 0`
//! when noise is off. The sign of `α` is `+` exactly when the `truth` label is 1.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{ActivationMatrix, ContrastSet};
use crate::error::{Error, Result};
use crate::math::{dot, norm};

const STREAM_DIRECTIONS: u64 = 0;
const STREAM_BASE: u64 = 1;
const STREAM_LABELS: u64 = 2;
const STREAM_MAGNITUDES: u64 = 3;
const STREAM_DISTRACTOR: u64 = 4;
const STREAM_SALIENT: u64 = 5;
const STREAM_NOISE: u64 = 6;

const SLOT_SECOND: usize = 1;
const SLOT_POLARITY: usize = 2;
const SLOT_SALIENT: usize = 3;

/// Smallest `cos(shear)` accepted before the shear map is treated as singular.
const MIN_SHEAR_COS: f64 = 1e-3;

/// Variant names of the multivariate kind, in stored order:
/// (polarity, correctness) ∈ {p, n} × {c, i}.
pub const MULTIVARIATE_VARIANTS: [&str; 4] = ["pc", "pi", "nc", "ni"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryKind {
    Ideal,
    Sheared,
    Distractor,
    Multivariate,
}

impl std::str::FromStr for GeometryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(Self::Ideal),
            "sheared" => Ok(Self::Sheared),
            "distractor" => Ok(Self::Distractor),
            "multivariate" => Ok(Self::Multivariate),
            other => Err(Error::InvalidSpec(format!("unknown geometry kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySpec {
    pub n_pairs: usize,
    pub dim: usize,
    pub kind: GeometryKind,
    pub noise_std: f64,
    /// Shear angle in radians (sheared kind).
    pub shear: f64,
    /// Distractor displacement variance relative to the truth feature's.
    pub distractor_scale: f64,
    pub alpha_mean: f64,
    pub alpha_std: f64,
    /// Standard deviation of the shared base vectors.
    pub base_std: f64,
    /// Standard deviation of a shared, non-contrastive high-variance
    /// direction added to both members of every pair. Zero disables it.
    pub salient_std: f64,
    pub seed: u64,
}

impl Default for GeometrySpec {
    fn default() -> Self {
        Self {
            n_pairs: 500,
            dim: 32,
            kind: GeometryKind::Ideal,
            noise_std: 0.0,
            shear: 0.0,
            distractor_scale: 1.0,
            alpha_mean: 2.0,
            alpha_std: 0.5,
            base_std: 1.0,
            salient_std: 0.0,
            seed: 0,
        }
    }
}

impl GeometrySpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.n_pairs == 0 {
            return bad("n_pairs must be at least 1".into());
        }
        if self.dim == 0 {
            return bad("dim must be at least 1".into());
        }
        for (name, v) in [
            ("noise_std", self.noise_std),
            ("alpha_std", self.alpha_std),
            ("base_std", self.base_std),
            ("salient_std", self.salient_std),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and nonnegative, got {v}"));
            }
        }
        if !self.alpha_mean.is_finite() {
            return bad("alpha_mean must be finite".into());
        }
        if self.alpha_mean == 0.0 && self.alpha_std == 0.0 {
            return bad("alpha_mean and alpha_std are both zero, so no pair is displaced".into());
        }
        if self.kind == GeometryKind::Distractor
            && !(self.distractor_scale.is_finite() && self.distractor_scale > 0.0)
        {
            return bad(format!(
                "distractor_scale must be positive, got {}",
                self.distractor_scale
            ));
        }
        if self.kind == GeometryKind::Sheared
            && !(self.shear.is_finite() && self.shear.cos() >= MIN_SHEAR_COS)
        {
            return bad(format!(
                "shear {} rad is too close to ±π/2; the shear map is near-singular",
                self.shear
            ));
        }
        if self.kind == GeometryKind::Multivariate && self.dim < 4 {
            return bad(format!("multivariate geometry needs dim ≥ 4, got {}", self.dim));
        }
        let slots = self.slots_needed();
        if slots > self.dim {
            return bad(format!(
                "{:?} geometry with these options plants {slots} directions but dim is {}",
                self.kind, self.dim
            ));
        }
        Ok(())
    }

    fn slots_needed(&self) -> usize {
        if self.salient_std > 0.0 {
            return SLOT_SALIENT + 1;
        }
        match self.kind {
            GeometryKind::Ideal => 1,
            GeometryKind::Sheared | GeometryKind::Distractor => 2,
            GeometryKind::Multivariate => 3,
        }
    }
}

/// Ground-truth directions behind a generated set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedTruth {
    /// Translation direction: `x⁺ − x⁻ ∥ t`.
    pub t: Vec<f64>,
    /// Normal of the separating hyperplane through the pair midpoints.
    pub n: Vec<f64>,
    pub extra_dirs: BTreeMap<String, Vec<f64>>,
}

impl PlantedTruth {
    /// Looks up `t`, `n` or an extra direction by name (`truth` aliases `t`).
    pub fn direction(&self, name: &str) -> Option<&[f64]> {
        match name {
            "t" | "truth" => Some(&self.t),
            "n" => Some(&self.n),
            other => self.extra_dirs.get(other).map(Vec::as_slice),
        }
    }
}

pub fn generate(spec: &GeometrySpec) -> Result<(ContrastSet, PlantedTruth)> {
    spec.validate()?;
    let dirs = draw_directions(spec.seed, spec.dim, spec.slots_needed());
    let (set, truth) = match spec.kind {
        GeometryKind::Ideal | GeometryKind::Sheared => gen_pairwise(spec, &dirs, None)?,
        GeometryKind::Distractor => gen_pairwise(spec, &dirs, Some(&dirs[SLOT_SECOND]))?,
        GeometryKind::Multivariate => gen_multivariate(spec, &dirs)?,
    };
    let set = set
        .with_meta("generator.kind", kind_name(spec.kind))
        .with_meta("generator.seed", spec.seed.to_string());
    Ok((set, truth))
}

fn kind_name(kind: GeometryKind) -> &'static str {
    match kind {
        GeometryKind::Ideal => "ideal",
        GeometryKind::Sheared => "sheared",
        GeometryKind::Distractor => "distractor",
        GeometryKind::Multivariate => "multivariate",
    }
}

fn stream(seed: u64, id: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn gaussian(rng: &mut ChaCha20Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn draw_directions(seed: u64, dim: usize, count: usize) -> Vec<Vec<f64>> {
    let mut rng = stream(seed, STREAM_DIRECTIONS);
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(count);
    while out.len() < count {
        let mut v: Vec<f64> = (0..dim).map(|_| gaussian(&mut rng)).collect();
        for _ in 0..2 {
            for u in &out {
                let p = dot(&v, u);
                v.iter_mut().zip(u).for_each(|(a, b)| *a -= p * b);
            }
        }
        let nv = norm(&v);
        // a draw that is numerically inside the span so far is discarded
        if nv > 1e-6 {
            out.push(v.into_iter().map(|x| x / nv).collect());
        }
    }
    out
}

/// `max(|N(mean, std)|, 0.1·std)`, one draw per row.
fn magnitudes(rng: &mut ChaCha20Rng, spec: &GeometrySpec, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let a = spec.alpha_mean + spec.alpha_std * gaussian(rng);
            a.abs().max(0.1 * spec.alpha_std)
        })
        .collect()
}

/// Isotropic Gaussian rows scaled by `base_std`, with `exclude` projected out.
fn base_rows(spec: &GeometrySpec, exclude: &[&[f64]]) -> Vec<Vec<f64>> {
    let mut rng = stream(spec.seed, STREAM_BASE);
    (0..spec.n_pairs)
        .map(|_| {
            let mut b: Vec<f64> = (0..spec.dim)
                .map(|_| spec.base_std * gaussian(&mut rng))
                .collect();
            for u in exclude {
                let p = dot(&b, u);
                b.iter_mut().zip(u.iter()).for_each(|(a, c)| *a -= p * c);
            }
            b
        })
        .collect()
}

fn salient_coefficients(spec: &GeometrySpec) -> Vec<f64> {
    if spec.salient_std == 0.0 {
        return vec![0.0; spec.n_pairs];
    }
    let mut rng = stream(spec.seed, STREAM_SALIENT);
    (0..spec.n_pairs)
        .map(|_| spec.salient_std * gaussian(&mut rng))
        .collect()
}

fn add_noise(rng: &mut Option<ChaCha20Rng>, std: f64, row: &mut [f64]) {
    if let Some(rng) = rng {
        for x in row {
            *x += std * gaussian(rng);
        }
    }
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

fn matrix(rows: Vec<Vec<f64>>) -> Result<ActivationMatrix> {
    ActivationMatrix::from_rows(&rows)
}

/// Ideal, sheared and distractor kinds: two variants per row.
fn gen_pairwise(
    spec: &GeometrySpec,
    dirs: &[Vec<f64>],
    distractor: Option<&Vec<f64>>,
) -> Result<(ContrastSet, PlantedTruth)> {
    let (n, d) = (spec.n_pairs, spec.dim);
    let t = &dirs[0];
    let salient = (spec.salient_std > 0.0).then(|| &dirs[SLOT_SALIENT]);

    // The distractor direction keeps base variance, so only t and the
    // salient direction are removed from the base.
    let mut exclude: Vec<&[f64]> = vec![t];
    if let Some(u) = salient {
        exclude.push(u);
    }
    let base = base_rows(spec, &exclude);

    let mut label_rng = stream(spec.seed, STREAM_LABELS);
    let truth: Vec<bool> = (0..n).map(|_| label_rng.random_bool(0.5)).collect();
    let alpha = magnitudes(&mut stream(spec.seed, STREAM_MAGNITUDES), spec, n);
    let sal = salient_coefficients(spec);

    let (dist_labels, beta) = match distractor {
        Some(_) => {
            let mut rng = stream(spec.seed, STREAM_DISTRACTOR);
            let labels: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
            let scale = spec.distractor_scale.sqrt();
            let mags: Vec<f64> = magnitudes(&mut rng, spec, n)
                .into_iter()
                .map(|m| scale * m)
                .collect();
            (labels, mags)
        }
        None => (Vec::new(), Vec::new()),
    };

    // Shear A = I + tanφ·t·uᵀ tilts the second feature u toward t and fixes t.
    let shear = (spec.kind == GeometryKind::Sheared).then(|| (spec.shear.tan(), &dirs[SLOT_SECOND]));

    let mut noise_rng = (spec.noise_std > 0.0).then(|| stream(spec.seed, STREAM_NOISE));
    let mut pos = Vec::with_capacity(n);
    let mut neg = Vec::with_capacity(n);
    for i in 0..n {
        let a = if truth[i] { alpha[i] } else { -alpha[i] };
        let mut half = vec![0.0; d];
        axpy(0.5 * a, t, &mut half);
        if let Some(dd) = distractor {
            let b = if dist_labels[i] { beta[i] } else { -beta[i] };
            axpy(0.5 * b, dd, &mut half);
        }
        let mut mid = base[i].clone();
        if let Some(u) = salient {
            axpy(sal[i], u, &mut mid);
        }
        let mut xp: Vec<f64> = mid.iter().zip(&half).map(|(m, h)| m + h).collect();
        let mut xm: Vec<f64> = mid.iter().zip(&half).map(|(m, h)| m - h).collect();
        if let Some((tan, u)) = shear {
            for x in [&mut xp, &mut xm] {
                let c = tan * dot(u, x);
                axpy(c, t, x);
            }
        }
        add_noise(&mut noise_rng, spec.noise_std, &mut xp);
        add_noise(&mut noise_rng, spec.noise_std, &mut xm);
        pos.push(xp);
        neg.push(xm);
    }

    let mut labels = vec![("truth".to_string(), truth)];
    let mut extra = BTreeMap::new();
    let mut normal = t.clone();
    if let Some(dd) = distractor {
        labels.push(("distractor".to_string(), dist_labels));
        extra.insert("distractor".to_string(), dd.clone());
    }
    if let Some((tan, u)) = shear {
        // n ∝ A⁻ᵀt = t − tanφ·u
        let mut nv = t.clone();
        axpy(-tan, u, &mut nv);
        let nn = norm(&nv);
        normal = nv.into_iter().map(|x| x / nn).collect();
        let mut feat = u.clone();
        axpy(tan, t, &mut feat);
        let nf = norm(&feat);
        extra.insert(
            "sheared_feature".to_string(),
            feat.into_iter().map(|x| x / nf).collect(),
        );
    }
    if let Some(u) = salient {
        extra.insert("salient".to_string(), u.clone());
    }

    let set = ContrastSet::new(
        vec![("pos".into(), matrix(pos)?), ("neg".into(), matrix(neg)?)],
        labels,
        BTreeMap::new(),
    )?;
    Ok((
        set,
        PlantedTruth {
            t: t.clone(),
            n: normal,
            extra_dirs: extra,
        },
    ))
}

/// Four variants per row with ±1 codes on `base_truth` and `polarity` and
/// `±|α_i|` on `truth`, where truth is the product of the other two signs.
fn gen_multivariate(spec: &GeometrySpec, dirs: &[Vec<f64>]) -> Result<(ContrastSet, PlantedTruth)> {
    let (n, d) = (spec.n_pairs, spec.dim);
    let truth_dir = &dirs[0];
    let base_truth = &dirs[SLOT_SECOND];
    let polarity = &dirs[SLOT_POLARITY];
    let salient = (spec.salient_std > 0.0).then(|| &dirs[SLOT_SALIENT]);

    let mut exclude: Vec<&[f64]> = vec![truth_dir, base_truth, polarity];
    if let Some(u) = salient {
        exclude.push(u);
    }
    let base = base_rows(spec, &exclude);
    let alpha = magnitudes(&mut stream(spec.seed, STREAM_MAGNITUDES), spec, n);
    let sal = salient_coefficients(spec);
    let mut noise_rng = (spec.noise_std > 0.0).then(|| stream(spec.seed, STREAM_NOISE));

    // (polarity sign, base_truth sign) per variant, in MULTIVARIATE_VARIANTS order
    let codes = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
    let mut blocks: Vec<Vec<Vec<f64>>> = (0..4).map(|_| Vec::with_capacity(n)).collect();
    for i in 0..n {
        let mut mid = base[i].clone();
        if let Some(u) = salient {
            axpy(sal[i], u, &mut mid);
        }
        for (v, &(p, c)) in codes.iter().enumerate() {
            let mut x = mid.clone();
            axpy(p * c * alpha[i], truth_dir, &mut x);
            axpy(c, base_truth, &mut x);
            axpy(p, polarity, &mut x);
            debug_assert_eq!(x.len(), d);
            add_noise(&mut noise_rng, spec.noise_std, &mut x);
            blocks[v].push(x);
        }
    }

    let mut meta = BTreeMap::new();
    for (name, &(p, c)) in MULTIVARIATE_VARIANTS.iter().zip(&codes) {
        let flag = |b: bool| if b { "1" } else { "0" }.to_string();
        meta.insert(format!("label.{name}.truth"), flag(p * c > 0.0));
        meta.insert(format!("label.{name}.base_truth"), flag(c > 0.0));
        meta.insert(format!("label.{name}.polarity"), flag(p > 0.0));
    }
    let variants = MULTIVARIATE_VARIANTS
        .iter()
        .zip(blocks)
        .map(|(name, rows)| Ok((name.to_string(), matrix(rows)?)))
        .collect::<Result<Vec<_>>>()?;
    let set = ContrastSet::new(variants, Vec::new(), meta)?;

    let mut extra = BTreeMap::new();
    extra.insert("truth".to_string(), truth_dir.clone());
    extra.insert("base_truth".to_string(), base_truth.clone());
    extra.insert("polarity".to_string(), polarity.clone());
    if let Some(u) = salient {
        extra.insert("salient".to_string(), u.clone());
    }
    Ok((
        set,
        PlantedTruth {
            t: truth_dir.clone(),
            n: truth_dir.clone(),
            extra_dirs: extra,
        },
    ))
}

/// Planted directions as the columns of a `D × k` matrix, in the given order.
pub fn planted_basis(truth: &PlantedTruth, names: &[&str]) -> Result<DMatrix<f64>> {
    let cols = names
        .iter()
        .map(|name| {
            truth
                .direction(name)
                .map(<[f64]>::to_vec)
                .ok_or_else(|| Error::InvalidSpec(format!("no planted direction `{name}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(crate::math::from_columns(&cols, truth.t.len()))
}
