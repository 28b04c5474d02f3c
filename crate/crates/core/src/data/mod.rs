// SPDX-License-Identifier: MIT OR Apache-2.0

//! Dataset model for contrast pairs.
//!
//! A [`ContrastSet`] holds `k ≥ 2` named variant matrices with a shared
//! row count `N` (one row per contrast pair) and dimension `D`, plus binary
//! label tracks of length `N`. Row `i` of every variant comes from the same
//! underlying example.
//!
//! Variant `0` plays the role of `X⁺` and variant `1` of `X⁻` in the
//! two-variant case; the displacement matrix follows `D = X⁻ − X⁺`. A label
//! value of `1` means the variant-0 member of the pair is the one that holds.

mod csv_import;
mod pack;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use csv_import::import_csv;
pub use pack::{load_pack, read_pack, save_pack, write_pack, PACK_MAGIC, PACK_VERSION};

/// Dense `N × D` matrix of activations, one sample per row. All entries are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationMatrix(DMatrix<f64>);

impl ActivationMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::Validation(format!(
                "activation matrix must be non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if let Some(pos) = m.iter().position(|v| !v.is_finite()) {
            // column-major position back to (row, col)
            let (r, c) = (pos % m.nrows(), pos / m.nrows());
            return Err(Error::Validation(format!(
                "non-finite activation at row {r}, column {c}"
            )));
        }
        Ok(Self(m))
    }

    pub fn from_row_major(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "row-major activation buffer",
                expected: rows * cols,
                got: values.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(rows, cols, values))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                context: "activation rows",
                expected: cols,
                got: bad.len(),
            });
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_row_major(rows.len(), cols, &flat)
    }

    /// Wraps a matrix produced by arithmetic on already-validated matrices.
    pub(crate) fn from_trusted(m: DMatrix<f64>) -> Self {
        debug_assert!(m.iter().all(|v| v.is_finite()));
        Self(m)
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.0.row(i).iter().copied().collect()
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.0.len());
        for i in 0..self.nrows() {
            out.extend(self.0.row(i).iter());
        }
        out
    }
}

/// Named variant matrices with aligned rows, label tracks and free-form metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastSet {
    variants: Vec<(String, ActivationMatrix)>,
    labels: Vec<(String, Vec<bool>)>,
    meta: BTreeMap<String, String>,
}

impl ContrastSet {
    pub fn new(
        variants: Vec<(String, ActivationMatrix)>,
        labels: Vec<(String, Vec<bool>)>,
        meta: BTreeMap<String, String>,
    ) -> Result<Self> {
        if variants.len() < 2 {
            return Err(Error::Validation(format!(
                "a contrast set needs at least 2 variants, got {}",
                variants.len()
            )));
        }
        let n = variants[0].1.nrows();
        let d = variants[0].1.ncols();
        for (i, (name, m)) in variants.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::Validation(format!("variant {i} has an empty name")));
            }
            if variants[..i].iter().any(|(other, _)| other == name) {
                return Err(Error::Validation(format!("duplicate variant name `{name}`")));
            }
            if m.nrows() != n || m.ncols() != d {
                return Err(Error::Validation(format!(
                    "variant `{name}` is {}x{}, expected {n}x{d}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        for (i, (name, track)) in labels.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::Validation(format!("label track {i} has an empty name")));
            }
            if labels[..i].iter().any(|(other, _)| other == name) {
                return Err(Error::Validation(format!("duplicate label track `{name}`")));
            }
            if track.len() != n {
                return Err(Error::Validation(format!(
                    "label track `{name}` has {} entries, expected {n}",
                    track.len()
                )));
            }
        }
        Ok(Self {
            variants,
            labels,
            meta,
        })
    }

    /// Shorthand for the common two-variant case with one label track.
    pub fn pair(
        positive: ActivationMatrix,
        negative: ActivationMatrix,
        labels: Option<(&str, Vec<bool>)>,
    ) -> Result<Self> {
        Self::new(
            vec![("pos".into(), positive), ("neg".into(), negative)],
            labels.map(|(n, l)| vec![(n.to_string(), l)]).unwrap_or_default(),
            BTreeMap::new(),
        )
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.meta.insert(key.into(), value.into());
        self
    }

    /// Number of rows (contrast pairs).
    pub fn n_rows(&self) -> usize {
        self.variants[0].1.nrows()
    }

    pub fn dim(&self) -> usize {
        self.variants[0].1.ncols()
    }

    pub fn n_variants(&self) -> usize {
        self.variants.len()
    }

    pub fn variants(&self) -> &[(String, ActivationMatrix)] {
        &self.variants
    }

    pub fn variant_names(&self) -> impl Iterator<Item = &str> {
        self.variants.iter().map(|(n, _)| n.as_str())
    }

    pub fn variant(&self, name: &str) -> Result<&ActivationMatrix> {
        self.variant_index(name).map(|i| &self.variants[i].1)
    }

    pub fn variant_index(&self, name: &str) -> Result<usize> {
        self.variants
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| Error::UnknownVariant(name.to_string()))
    }

    pub fn variant_at(&self, i: usize) -> &ActivationMatrix {
        &self.variants[i].1
    }

    pub fn labels(&self) -> &[(String, Vec<bool>)] {
        &self.labels
    }

    pub fn label(&self, name: &str) -> Result<&[bool]> {
        self.labels
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, l)| l.as_slice())
            .ok_or_else(|| Error::MissingLabel(name.to_string()))
    }

    pub fn meta(&self) -> &BTreeMap<String, String> {
        &self.meta
    }

    /// Per-variant label stored in metadata under `label.<variant>.<track>`.
    ///
    /// Multivariate sets carry their variant semantics (which variant is a
    /// true statement, which is negated) this way, since row-level tracks
    /// cannot express them.
    pub fn variant_label(&self, variant: &str, track: &str) -> Option<bool> {
        match self.meta.get(&format!("label.{variant}.{track}"))?.as_str() {
            "1" => Some(true),
            "0" => Some(false),
            _ => None,
        }
    }

    fn map_variants(&self, f: impl Fn(&DMatrix<f64>) -> DMatrix<f64>) -> Self {
        Self {
            variants: self
                .variants
                .iter()
                .map(|(n, m)| (n.clone(), ActivationMatrix::from_trusted(f(m.matrix()))))
                .collect(),
            labels: self.labels.clone(),
            meta: self.meta.clone(),
        }
    }
}

/// A contrast set with the joint mean over all variants removed.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredContrastSet {
    inner: ContrastSet,
    mean: Vec<f64>,
}

impl CenteredContrastSet {
    pub fn set(&self) -> &ContrastSet {
        &self.inner
    }

    /// The subtracted mean; apply it to held-out data with [`apply_centering`].
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn n_rows(&self) -> usize {
        self.inner.n_rows()
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn n_variants(&self) -> usize {
        self.inner.n_variants()
    }

    pub fn variant_at(&self, i: usize) -> &ActivationMatrix {
        self.inner.variant_at(i)
    }

    /// `(X⁺, X⁻)` for a two-variant set.
    pub fn pair(&self) -> Result<(&DMatrix<f64>, &DMatrix<f64>)> {
        if self.n_variants() != 2 {
            return Err(Error::Validation(format!(
                "operation needs exactly 2 variants, set has {}",
                self.n_variants()
            )));
        }
        Ok((self.variant_at(0).matrix(), self.variant_at(1).matrix()))
    }

    /// Centers `set` with an externally supplied mean (typically from a training split).
    pub fn with_mean(set: &ContrastSet, mean: &[f64]) -> Result<Self> {
        check_len("centering mean", set.dim(), mean.len())?;
        let mu = DVector::from_column_slice(mean).transpose();
        let inner = set.map_variants(|m| {
            let mut out = m.clone();
            for mut row in out.row_iter_mut() {
                row -= &mu;
            }
            out
        });
        Ok(Self {
            inner,
            mean: mean.to_vec(),
        })
    }
}

/// Subtracts the joint mean of all variants' rows from every row.
pub fn center(set: &ContrastSet) -> CenteredContrastSet {
    let d = set.dim();
    let total = (set.n_rows() * set.n_variants()) as f64;
    let mut mean = vec![0.0; d];
    for (_, m) in set.variants() {
        for (j, col) in m.matrix().column_iter().enumerate() {
            mean[j] += col.sum();
        }
    }
    for v in &mut mean {
        *v /= total;
    }
    CenteredContrastSet::with_mean(set, &mean).expect("mean has the set's dimension")
}

pub fn apply_centering(mean: &[f64], m: &ActivationMatrix) -> Result<ActivationMatrix> {
    check_len("centering mean", m.ncols(), mean.len())?;
    let mu = DVector::from_column_slice(mean).transpose();
    let mut out = m.matrix().clone();
    for mut row in out.row_iter_mut() {
        row -= &mu;
    }
    Ok(ActivationMatrix::from_trusted(out))
}

/// All variants concatenated row-wise in declared order: `(kN) × D`.
pub fn stacked(set: &CenteredContrastSet) -> ActivationMatrix {
    stack_matrices(set.set().variants().iter().map(|(_, m)| m.matrix()))
}

/// Elementwise sum of all variant matrices (`C = X⁻ + X⁺` for two variants).
pub fn commonality(set: &CenteredContrastSet) -> ActivationMatrix {
    let mut it = set.set().variants().iter();
    let mut acc = it.next().expect("at least two variants").1.matrix().clone();
    for (_, m) in it {
        acc += m.matrix();
    }
    ActivationMatrix::from_trusted(acc)
}

/// Row blocks `variants[a_j] − variants[b_j]` stacked in pair order.
pub fn displacement(set: &CenteredContrastSet, spec: &PairSpec) -> Result<ActivationMatrix> {
    let idx = spec.resolve(set.set())?;
    Ok(stack_matrices(idx.iter().map(|&(a, b)| {
        set.variant_at(a).matrix() - set.variant_at(b).matrix()
    })))
}

fn stack_matrices<M: std::borrow::Borrow<DMatrix<f64>>>(
    blocks: impl Iterator<Item = M>,
) -> ActivationMatrix {
    let blocks: Vec<M> = blocks.collect();
    let d = blocks[0].borrow().ncols();
    let rows: usize = blocks.iter().map(|b| b.borrow().nrows()).sum();
    let mut out = DMatrix::zeros(rows, d);
    let mut r0 = 0;
    for b in &blocks {
        let b = b.borrow();
        out.rows_mut(r0, b.nrows()).copy_from(b);
        r0 += b.nrows();
    }
    ActivationMatrix::from_trusted(out)
}

fn check_len(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            got,
        });
    }
    Ok(())
}

/// One displacement block: rows of `a` minus rows of `b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pair {
    pub a: String,
    pub b: String,
    #[serde(default)]
    pub tag: String,
}

/// Ordered list of variant pairs defining displacement row blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSpec {
    pub pairs: Vec<Pair>,
}

impl PairSpec {
    pub fn new(pairs: Vec<Pair>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Validation("a pair spec needs at least one pair".into()));
        }
        if let Some(p) = pairs.iter().find(|p| p.a == p.b) {
            return Err(Error::Validation(format!(
                "pair ({}, {}) contrasts a variant with itself",
                p.a, p.b
            )));
        }
        Ok(Self { pairs })
    }

    pub fn from_names<S: AsRef<str>>(pairs: &[(S, S, S)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|(a, b, t)| Pair {
                    a: a.as_ref().into(),
                    b: b.as_ref().into(),
                    tag: t.as_ref().into(),
                })
                .collect(),
        )
    }

    /// Default layout for a set:
    ///
    /// - 2 variants: the single pair `(variant 1, variant 0)`, i.e. `D = X⁻ − X⁺`;
    /// - 4 variants ordered `(p,c), (p,i), (n,c), (n,i)`: the six-pair layout
    ///   `pc−nc, pi−ni, pc−pi, nc−ni, pc−ni, nc−pi`;
    /// - otherwise every unordered pair `(i, j)`, `i < j`.
    pub fn default_for(set: &ContrastSet) -> Self {
        let names: Vec<&str> = set.variant_names().collect();
        let pairs = match names.len() {
            2 => vec![(1, 0, "contrast")],
            4 => vec![
                (0, 2, "polarity,truth"),
                (1, 3, "polarity,truth"),
                (0, 1, "truth"),
                (2, 3, "truth"),
                (0, 3, "polarity"),
                (2, 1, "polarity"),
            ],
            k => (0..k)
                .flat_map(|i| (i + 1..k).map(move |j| (i, j, "")))
                .collect(),
        };
        Self {
            pairs: pairs
                .into_iter()
                .map(|(a, b, tag)| Pair {
                    a: names[a].into(),
                    b: names[b].into(),
                    tag: tag.into(),
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Variant indices for each pair, validated against `set`.
    pub fn resolve(&self, set: &ContrastSet) -> Result<Vec<(usize, usize)>> {
        if self.pairs.is_empty() {
            return Err(Error::Validation("pair spec is empty".into()));
        }
        self.pairs
            .iter()
            .map(|p| {
                if p.a == p.b {
                    return Err(Error::Validation(format!(
                        "pair ({}, {}) contrasts a variant with itself",
                        p.a, p.b
                    )));
                }
                Ok((set.variant_index(&p.a)?, set.variant_index(&p.b)?))
            })
            .collect()
    }
}
