// SPDX-License-Identifier: MIT OR Apache-2.0

//! Front-end errors and their exit codes.

use std::path::PathBuf;

use relcon::ErrorClass;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] relcon::Error),

    #[error("{0}")]
    Usage(String),

    #[error("input not found: {}", .0.display())]
    MissingInput(PathBuf),

    #[error("cannot parse {}: {source}", path.display())]
    BadJson {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::MissingInput(_) | CliError::BadJson { .. } | CliError::Write { .. } => 3,
            CliError::Core(e) => match e.class() {
                ErrorClass::Usage => 2,
                ErrorClass::Data | ErrorClass::Io => 3,
                ErrorClass::Numerical => 4,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
