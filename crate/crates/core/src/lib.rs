// SPDX-License-Identifier: MIT OR Apache-2.0

//! Contrastive probing of hidden-state activations.
//!
//! The crate covers two families of unsupervised linear probes over
//! contrast pairs `(x⁺, x⁻)`:
//!
//! - gradient-trained CCS probes ([`ccs`]) with the consistency and
//!   confidence loss terms, their ablations, the unit-norm constraint and
//!   the rank projection onto the row space of the training data;
//! - closed-form contrastive eigenproblems ([`spectral`]): DRC (variance
//!   differences), RRC (variance ratios via whitening), CRC-TPC, the
//!   closed-form CCR direction and the multivariate DRC extension, plus
//!   eigenvalue diagnostics.
//!
//! [`data`] owns the dataset model and the CPAK pack format, [`synthetic`]
//! generates contrast sets with planted geometry, [`linalg`] holds the dense
//! kernels, and [`eval`] turns directions into accuracies and overlap curves.
//!
//! All computation is done in `f64`.

#![forbid(unsafe_code)]

pub mod ccs;
pub mod data;
pub mod error;
pub mod eval;
pub mod linalg;
pub(crate) mod math;
pub mod spectral;
pub mod synthetic;

pub use ccs::{train_multi, train_one, CcsConfig, Optimizer, Probe, TrainReport};
pub use data::{
    apply_centering, center, commonality, displacement, load_pack, save_pack, stacked,
    ActivationMatrix, CenteredContrastSet, ContrastSet, PairSpec,
};
pub use error::{Error, ErrorClass, Result};
pub use eval::{
    accuracy, pc_overlap, predict_pair, seed_stats, sign_accuracy, Classifier, EvalReport,
    OverlapCurve, SeedStats,
};
pub use spectral::{
    ccr_closed_form, crc_tpc, diagnose, drc, multivariate_drc, rrc, Direction, Method, Spectrum,
    SpectrumDiagnostics, Verdict,
};
pub use synthetic::{generate, GeometryKind, GeometrySpec, PlantedTruth};
