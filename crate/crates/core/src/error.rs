// SPDX-License-Identifier: MIT OR Apache-2.0

//! Error type shared by every module of the crate.

use std::path::PathBuf;

use thiserror::Error;

/// Broad failure class, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad input data, malformed files, unknown names.
    Data,
    /// Invalid parameters or configuration.
    Usage,
    /// A numerical routine failed (non-convergence, divergence, degenerate data).
    Numerical,
    /// Filesystem failure.
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Bad magic, unsupported version, malformed names or metadata.
    #[error("pack format error: {0}")]
    Format(String),

    /// Payload length disagrees with the header.
    #[error("pack is corrupted: {0}")]
    Corrupt(String),

    /// Values violate a data invariant (non-finite entries, bad labels, shape mismatch).
    #[error("validation failed: {0}")]
    Validation(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("unknown variant `{0}`")]
    UnknownVariant(String),

    #[error("missing label track `{0}`")]
    MissingLabel(String),

    #[error("invalid geometry: {0}")]
    InvalidSpec(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{routine} did not converge after {iterations} iterations (off-diagonal residual {residual:.3e})")]
    NoConvergence {
        routine: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("requested {requested} components but the numerical rank is {rank}")]
    RankExceeded { requested: usize, rank: usize },

    #[error("training diverged (non-finite loss) at step {step} for seed {seed}")]
    Diverged { seed: u64, step: usize },

    #[error("all {0} seeds diverged")]
    AllSeedsDiverged(usize),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Io { .. } => ErrorClass::Io,
            Error::Format(_)
            | Error::Corrupt(_)
            | Error::Validation(_)
            | Error::DimensionMismatch { .. }
            | Error::UnknownVariant(_)
            | Error::MissingLabel(_) => ErrorClass::Data,
            Error::InvalidSpec(_) | Error::InvalidConfig(_) | Error::RankExceeded { .. } => {
                ErrorClass::Usage
            }
            Error::NoConvergence { .. }
            | Error::Degenerate(_)
            | Error::Diverged { .. }
            | Error::AllSeedsDiverged(_) => ErrorClass::Numerical,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
