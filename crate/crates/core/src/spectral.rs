// SPDX-License-Identifier: MIT OR Apache-2.0

//! Closed-form contrastive directions.
//!
//! With `X^±` the stacked data, `C = X⁺ + X⁻`, `D = X⁻ − X⁺` and the cross
//! term `S = X⁺ᵀX⁻ + X⁻ᵀX⁺`, the two DRC views are
//!
//! ```text
//! CᵀC − X^±ᵀX^± =  S        DᵀD − X^±ᵀX^± = −S
//! ```
//!
//! so one eigendecomposition of `−S` yields both: eigenvalues `mu` in the
//! displacement convention and `lambda_c = −mu` in the commonality one. RRC
//! solves the ratio problem `DᵀD w = μ X^±ᵀX^± w` through the whitener of
//! `X^±`, where `CᵀC + DᵀD = 2·X^±ᵀX^±` forces `μ + λ_c = 2`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize, Serializer};

use crate::data::{commonality, displacement, stacked, CenteredContrastSet, PairSpec};
use crate::error::{Error, Result};
use crate::linalg::{make_whitener, numerical_rank, sym_eig, thin_svd, DEFAULT_RTOL};
use crate::math::{column, columns, norm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Drc,
    Rrc,
    CrcTpc,
    Ccr,
    MultivariateDrc,
    Ccs,
    Planted,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "drc" => Ok(Self::Drc),
            "rrc" => Ok(Self::Rrc),
            "crc_tpc" | "crc-tpc" => Ok(Self::CrcTpc),
            "ccr" => Ok(Self::Ccr),
            "multivariate_drc" => Ok(Self::MultivariateDrc),
            "ccs" => Ok(Self::Ccs),
            "planted" => Ok(Self::Planted),
            other => Err(Error::InvalidConfig(format!("unknown method `{other}`"))),
        }
    }
}

/// A unit direction in activation space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub vector: Vec<f64>,
    pub method: Method,
    /// `-1` when the vector was negated by sign resolution, else `+1`.
    pub orientation: i8,
}

impl Direction {
    /// Normalizes `vector` to unit length.
    pub fn new(vector: Vec<f64>, method: Method) -> Result<Self> {
        let nv = norm(&vector);
        if !(nv.is_finite() && nv > 0.0) {
            return Err(Error::Degenerate("a direction needs a nonzero finite vector".into()));
        }
        Ok(Self {
            vector: vector.into_iter().map(|x| x / nv).collect(),
            method,
            orientation: 1,
        })
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn flipped(mut self) -> Self {
        self.vector.iter_mut().for_each(|x| *x = -*x);
        self.orientation = -self.orientation;
        self
    }
}

/// Eigen-spectrum of a contrastive problem, descending in `mu`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub method: Method,
    /// Displacement convention: larger means more contrastive.
    pub mu: Vec<f64>,
    /// Commonality convention: `−mu` for DRC, `2 − mu` (computed independently) for RRC.
    pub lambda_c: Vec<f64>,
    /// Unit ambient vectors aligned with `mu`.
    pub vectors: Vec<Vec<f64>>,
    /// RRC only: orthonormal eigenvectors in whitened coordinates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub whitened_vectors: Option<Vec<Vec<f64>>>,
    pub rank_used: usize,
    /// Set when the contrast matrix is identically zero; vectors are then arbitrary.
    pub degenerate: bool,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    /// The `k`-th eigenvector (0-based) as a [`Direction`].
    pub fn direction(&self, k: usize) -> Result<Direction> {
        let v = self.vectors.get(k).ok_or(Error::RankExceeded {
            requested: k + 1,
            rank: self.vectors.len(),
        })?;
        Direction::new(v.clone(), self.method)
    }

    pub fn top(&self) -> Result<Direction> {
        self.direction(0)
    }

    pub fn vectors_matrix(&self) -> DMatrix<f64> {
        let d = self.vectors.first().map_or(0, Vec::len);
        crate::math::from_columns(&self.vectors, d)
    }
}

/// `S = X⁺ᵀX⁻ + X⁻ᵀX⁺`, exactly symmetric.
pub fn cross_term_matrix(set: &CenteredContrastSet) -> Result<DMatrix<f64>> {
    let (xp, xm) = set.pair()?;
    let m = xp.transpose() * xm;
    Ok(&m + m.transpose())
}

/// `X^±ᵀX^±` over all variants.
pub fn gram(set: &CenteredContrastSet) -> DMatrix<f64> {
    let x = stacked(set);
    x.matrix().transpose() * x.matrix()
}

pub fn drc(set: &CenteredContrastSet) -> Result<Spectrum> {
    let s = cross_term_matrix(set)?;
    let degenerate = s.amax() == 0.0;
    if degenerate {
        log::warn!("cross-term matrix is zero; DRC directions are arbitrary");
    }
    let eig = sym_eig(&(-s))?;
    let lambda_c = eig.values.iter().map(|m| -m).collect();
    Ok(Spectrum {
        method: Method::Drc,
        mu: eig.values,
        lambda_c,
        vectors: columns(&eig.vectors),
        whitened_vectors: None,
        rank_used: set.dim(),
        degenerate,
    })
}

pub fn rrc(set: &CenteredContrastSet, rtol: f64) -> Result<Spectrum> {
    let (xp, xm) = set.pair()?;
    let w = make_whitener(&stacked(set), rtol)?;
    let dw = (xm - xp) * &w.basis;
    let cw = commonality(set).matrix() * &w.basis;
    let eig = sym_eig(&(dw.transpose() * &dw))?;

    let mut lambda_c = Vec::with_capacity(w.rank);
    let mut vectors = Vec::with_capacity(w.rank);
    for k in 0..w.rank {
        let v = eig.vectors.column(k);
        lambda_c.push((&cw * v).norm_squared());
        let ambient = &w.basis * v;
        vectors.push((ambient.clone() / ambient.norm()).iter().copied().collect());
    }
    let degenerate = eig.values.iter().all(|&m| m == 0.0);
    Ok(Spectrum {
        method: Method::Rrc,
        mu: eig.values,
        lambda_c,
        vectors,
        whitened_vectors: Some(columns(&eig.vectors)),
        rank_used: w.rank,
        degenerate,
    })
}

/// Top-`k` principal directions of the displacement matrix `D = X⁻ − X⁺`.
pub fn crc_tpc(set: &CenteredContrastSet, k: usize) -> Result<Vec<Direction>> {
    if k == 0 {
        return Err(Error::InvalidConfig("crc_tpc needs k ≥ 1".into()));
    }
    set.pair()?;
    let d = displacement(set, &PairSpec::default_for(set.set()))?;
    let svd = thin_svd(d.matrix())?;
    let rank = numerical_rank(&svd.s, DEFAULT_RTOL);
    if k > rank {
        return Err(Error::RankExceeded { requested: k, rank });
    }
    (0..k)
        .map(|j| Direction::new(svd.vt.row(j).iter().copied().collect(), Method::CrcTpc))
        .collect()
}

/// `argmin_{‖r‖=1} rᵀ S r`: the eigenvector of `S` with the most negative eigenvalue.
pub fn ccr_closed_form(set: &CenteredContrastSet) -> Result<Direction> {
    let eig = sym_eig(&cross_term_matrix(set)?)?;
    Direction::new(column(&eig.vectors, eig.values.len() - 1), Method::Ccr)
}

/// Default variance-matching constant `c = |pairs|·2/k` for [`multivariate_drc`].
pub fn default_scale(n_pairs: usize, n_variants: usize) -> f64 {
    n_pairs as f64 * 2.0 / n_variants as f64
}

/// Eigendecomposition of `D_specᵀD_spec − c·X^±ᵀX^±` with the default `c`.
pub fn multivariate_drc(set: &CenteredContrastSet, spec: &PairSpec) -> Result<Spectrum> {
    multivariate_drc_scaled(set, spec, default_scale(spec.len(), set.n_variants()))
}

pub fn multivariate_drc_scaled(
    set: &CenteredContrastSet,
    spec: &PairSpec,
    c: f64,
) -> Result<Spectrum> {
    if !c.is_finite() {
        return Err(Error::InvalidConfig(format!("scale constant must be finite, got {c}")));
    }
    let d = displacement(set, spec)?;
    let m = d.matrix().transpose() * d.matrix() - gram(set) * c;
    let degenerate = m.amax() == 0.0;
    let eig = sym_eig(&m)?;
    Ok(Spectrum {
        method: Method::MultivariateDrc,
        lambda_c: eig.values.iter().map(|v| -v).collect(),
        mu: eig.values,
        vectors: columns(&eig.vectors),
        whitened_vectors: None,
        rank_used: set.dim(),
        degenerate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// One eigenvalue stands out.
    Isolated,
    /// Two or more comparable leading eigenvalues, then a drop.
    Multiple,
    Diffuse,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Isolated => "isolated",
            Verdict::Multiple => "multiple",
            Verdict::Diffuse => "diffuse",
        })
    }
}

pub const DEFAULT_GAP_THRESHOLD: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumDiagnostics {
    pub top_k: Vec<f64>,
    /// `mu_1 / mu_2`; infinite when only `mu_1` is positive.
    #[serde(serialize_with = "ser_ratio")]
    pub gap_ratio: f64,
    /// `mu_2 / mu_3`, same conventions.
    #[serde(serialize_with = "ser_ratio")]
    pub second_gap_ratio: f64,
    /// Normalized flatness of the positive parts of `top_k`: `1/k` for a
    /// single spike, `1` for a flat spectrum.
    pub participation: f64,
    pub verdict: Verdict,
    pub gap_threshold: f64,
}

fn ser_ratio<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str("inf")
    }
}

/// `a/b` with the conventions `+∞` for `b ≤ 0 < a` and `1` when neither is positive.
fn ratio(a: f64, b: f64) -> f64 {
    if b > 0.0 {
        a / b
    } else if a > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

pub fn diagnose(
    spectrum: &Spectrum,
    top_k: usize,
    gap_threshold: f64,
) -> Result<SpectrumDiagnostics> {
    if top_k < 2 {
        return Err(Error::InvalidConfig(format!("top_k must be at least 2, got {top_k}")));
    }
    if !(gap_threshold.is_finite() && gap_threshold > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "gap threshold must be positive, got {gap_threshold}"
        )));
    }
    if spectrum.len() < top_k {
        return Err(Error::RankExceeded {
            requested: top_k,
            rank: spectrum.len(),
        });
    }
    let mu = &spectrum.mu;
    let gap_ratio = ratio(mu[0], mu[1]);
    let second_gap_ratio = mu.get(2).map_or(1.0, |&m3| ratio(mu[1], m3));
    let top: Vec<f64> = mu[..top_k].to_vec();

    let p: Vec<f64> = top.iter().map(|m| m.max(0.0)).collect();
    let sum: f64 = p.iter().sum();
    let sum_sq: f64 = p.iter().map(|x| x * x).sum();
    let participation = if sum_sq > 0.0 {
        sum * sum / (top_k as f64 * sum_sq)
    } else {
        0.0
    };

    let verdict = if gap_ratio >= gap_threshold {
        Verdict::Isolated
    } else if second_gap_ratio >= gap_threshold {
        Verdict::Multiple
    } else {
        Verdict::Diffuse
    };
    Ok(SpectrumDiagnostics {
        top_k: top,
        gap_ratio,
        second_gap_ratio,
        participation,
        verdict,
        gap_threshold,
    })
}
