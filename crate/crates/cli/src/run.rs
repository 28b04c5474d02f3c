// SPDX-License-Identifier: MIT OR Apache-2.0

//! Parameter resolution, manifests and the output directory.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

pub const TOOL: &str = "relcon";

/// Provenance record written next to every run's outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub params: Value,
}

/// Destination directory for one run.
pub struct Workspace {
    dir: PathBuf,
}

impl Workspace {
    pub fn create(dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
        })
    }

    pub fn path(&self, name: impl AsRef<Path>) -> PathBuf {
        self.dir.join(name)
    }

    /// Output path for `name`, with its parent directories created.
    pub fn prepare(&self, name: impl AsRef<Path>) -> CliResult<PathBuf> {
        let path = self.path(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|source| CliError::Write {
                path: parent.to_path_buf(),
                source,
            })?;
        }
        Ok(path)
    }

    pub fn write_text(&self, name: impl AsRef<Path>, text: &str) -> CliResult<PathBuf> {
        let path = self.prepare(name)?;
        std::fs::write(&path, text).map_err(|source| CliError::Write {
            path: path.clone(),
            source,
        })?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    pub fn write_json<T: Serialize + ?Sized>(
        &self,
        name: impl AsRef<Path>,
        value: &T,
    ) -> CliResult<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Usage(format!("cannot serialize output: {e}")))?;
        text.push('\n');
        self.write_text(name, &text)
    }
}

/// Fails with a data error when an input file is absent.
pub fn require_file(path: &Path) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::MissingInput(path.to_path_buf()))
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    require_file(path)?;
    let text = std::fs::read_to_string(path).map_err(|e| relcon::Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::BadJson {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a `--config` document. A manifest contributes its `params` object,
/// provided it was written by the same subcommand.
pub fn load_config(path: &Path, command: &str) -> CliResult<Map<String, Value>> {
    let value: Value = read_json(path)?;
    let Value::Object(obj) = value else {
        return Err(CliError::Usage(format!(
            "{}: configuration must be a JSON object",
            path.display()
        )));
    };
    if obj.get("tool").and_then(Value::as_str) == Some(TOOL) {
        let manifest: Manifest = serde_json::from_value(Value::Object(obj)).map_err(|source| {
            CliError::BadJson {
                path: path.to_path_buf(),
                source,
            }
        })?;
        if manifest.command != command {
            return Err(CliError::Usage(format!(
                "{} is a `{}` manifest, not `{command}`",
                path.display(),
                manifest.command
            )));
        }
        return match manifest.params {
            Value::Object(p) => Ok(p),
            _ => Err(CliError::Usage("manifest params must be an object".into())),
        };
    }
    Ok(obj)
}

/// Command-line values layered over a configuration object.
#[derive(Default)]
pub struct Overlay(Map<String, Value>);

impl Overlay {
    pub fn set<T: Serialize>(&mut self, key: &str, value: Option<T>) -> &mut Self {
        if let Some(v) = value {
            let v = serde_json::to_value(v).expect("CLI values are plain JSON");
            self.0.insert(key.to_string(), v);
        }
        self
    }

    /// Sets `key` to `value` only when the flag was given.
    pub fn flag(&mut self, key: &str, given: bool, value: bool) -> &mut Self {
        if given {
            self.0.insert(key.to_string(), Value::Bool(value));
        }
        self
    }
}

/// `config` (if any) overlaid with `overlay`, deserialized into `P`.
pub fn resolve<P: DeserializeOwned>(
    command: &str,
    config: Option<&Path>,
    overlay: Overlay,
) -> CliResult<P> {
    let mut merged = match config {
        Some(path) => load_config(path, command)?,
        None => Map::new(),
    };
    merged.extend(overlay.0);
    params_from_value(command, Value::Object(merged))
}

pub fn params_from_value<P: DeserializeOwned>(command: &str, value: Value) -> CliResult<P> {
    serde_json::from_value(value)
        .map_err(|e| CliError::Usage(format!("invalid `{command}` parameters: {e}")))
}

/// Stem of a file name, for naming sidecars.
pub fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into())
}
