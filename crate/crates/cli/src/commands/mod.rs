// SPDX-License-Identifier: MIT OR Apache-2.0

//! Subcommand parameter sets and their runners.

pub mod eval;
pub mod multivar;
pub mod spectrum;
pub mod synth;
pub mod train;

use std::path::Path;

use serde_json::Value;

use crate::error::{CliError, CliResult};
use crate::run::{params_from_value, stem, Manifest, Workspace, TOOL};

/// A fully resolved run: everything needed to reproduce its outputs.
#[derive(Debug, Clone)]
pub enum Job {
    Synth(synth::SynthParams),
    Train(train::TrainParams),
    Spectrum(spectrum::SpectrumParams),
    Multivar(multivar::MultivarParams),
    Eval(eval::EvalParams),
}

impl Job {
    pub fn command(&self) -> &'static str {
        match self {
            Job::Synth(_) => "synth",
            Job::Train(_) => "train",
            Job::Spectrum(_) => "spectrum",
            Job::Multivar(_) => "multivar",
            Job::Eval(_) => "eval",
        }
    }

    pub fn from_manifest(m: Manifest) -> CliResult<Self> {
        if m.tool != TOOL {
            return Err(CliError::Usage(format!("not a {TOOL} manifest (tool `{}`)", m.tool)));
        }
        let c = m.command.as_str();
        let p = m.params;
        Ok(match c {
            "synth" => Job::Synth(params_from_value(c, p)?),
            "train" => Job::Train(params_from_value(c, p)?),
            "spectrum" => Job::Spectrum(params_from_value(c, p)?),
            "multivar" => Job::Multivar(params_from_value(c, p)?),
            "eval" => Job::Eval(params_from_value(c, p)?),
            other => return Err(CliError::Usage(format!("unknown command `{other}` in manifest"))),
        })
    }

    pub fn manifest(&self) -> Manifest {
        let params = match self {
            Job::Synth(p) => serde_json::to_value(p),
            Job::Train(p) => serde_json::to_value(p),
            Job::Spectrum(p) => serde_json::to_value(p),
            Job::Multivar(p) => serde_json::to_value(p),
            Job::Eval(p) => serde_json::to_value(p),
        }
        .unwrap_or(Value::Null);
        Manifest {
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: self.command().into(),
            params,
        }
    }

    /// Synth runs are keyed by their output stem so several packs can share a directory.
    pub fn manifest_name(&self) -> String {
        match self {
            Job::Synth(p) => format!("synth.{}.manifest.json", stem(Path::new(&p.out))),
            other => format!("{}.manifest.json", other.command()),
        }
    }

    /// Runs the job and records its manifest.
    pub fn execute(&self, ws: &Workspace) -> CliResult<()> {
        match self {
            Job::Synth(p) => synth::run(p, ws)?,
            Job::Train(p) => train::run(p, ws)?,
            Job::Spectrum(p) => spectrum::run(p, ws)?,
            Job::Multivar(p) => multivar::run(p, ws)?,
            Job::Eval(p) => eval::run(p, ws)?,
        }
        ws.write_json(self.manifest_name(), &self.manifest())?;
        Ok(())
    }
}

/// Input path that must be present in the parameters.
pub(crate) fn required<'a>(p: &'a Option<std::path::PathBuf>, flag: &str) -> CliResult<&'a Path> {
    p.as_deref()
        .ok_or_else(|| CliError::Usage(format!("--{flag} is required")))
}

pub(crate) fn parse_with<T: std::str::FromStr<Err = relcon::Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: relcon::Error| e.to_string())
}
