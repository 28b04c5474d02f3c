// SPDX-License-Identifier: MIT OR Apache-2.0

//! `eval`: accuracy of a probe or planted direction against a label track.

use std::path::{Path, PathBuf};

use clap::Args;
use relcon::{
    accuracy, center, load_pack, pc_overlap, stacked, Classifier, Direction, EvalReport, Method,
    OverlapCurve, PlantedTruth, Probe,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::required;
use crate::error::{CliError, CliResult};
use crate::run::{read_json, require_file, stem, Overlay, Workspace};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalParams {
    pub pack: Option<PathBuf>,
    /// Trained probe or direction JSON; the planted direction is used when absent.
    pub probe: Option<PathBuf>,
    /// Truth sidecar; defaults to `<pack stem>.truth.json` beside the pack.
    pub truth: Option<PathBuf>,
    /// Planted direction name used when no probe is given.
    pub direction: String,
    pub label: String,
    pub resolve_sign: bool,
    pub pc_overlap: Option<usize>,
    pub seed: u64,
}

impl Default for EvalParams {
    fn default() -> Self {
        Self {
            pack: None,
            probe: None,
            truth: None,
            direction: "t".into(),
            label: "truth".into(),
            resolve_sign: true,
            pc_overlap: None,
            seed: 0,
        }
    }
}

/// Evaluate a probe on a labeled pack.
#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pack: Option<PathBuf>,
    /// Probe (from `train`) or direction JSON.
    #[arg(long)]
    probe: Option<PathBuf>,
    /// Truth sidecar written by `synth`.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Planted direction to evaluate when no probe is given.
    #[arg(long)]
    direction: Option<String>,
    #[arg(long)]
    label: Option<String>,
    /// Report raw accuracy without choosing the better orientation.
    #[arg(long)]
    no_sign_resolution: bool,
    /// Also report the overlap with the top K principal components.
    #[arg(long, value_name = "K")]
    pc_overlap: Option<usize>,
}

impl EvalArgs {
    pub fn overlay(&self) -> Overlay {
        let mut o = Overlay::default();
        o.set("pack", self.pack.clone())
            .set("probe", self.probe.clone())
            .set("truth", self.truth.clone())
            .set("direction", self.direction.clone())
            .set("label", self.label.clone())
            .flag("resolve_sign", self.no_sign_resolution, false)
            .set("pc_overlap", self.pc_overlap);
        o
    }
}

/// The published shape of `eval.json`.
#[derive(Debug, Serialize, Deserialize)]
pub struct EvalOutput {
    pub source: String,
    pub n_pairs: usize,
    #[serde(flatten)]
    pub report: EvalReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pc_overlap: Option<OverlapCurve>,
}

fn truth_sidecar(pack: &Path) -> PathBuf {
    pack.with_file_name(format!("{}.truth.json", stem(pack)))
}

fn load_classifier(p: &EvalParams, pack: &Path) -> CliResult<(Classifier, String)> {
    if let Some(path) = &p.probe {
        let value: Value = read_json(path)?;
        let bad = |source| CliError::BadJson {
            path: path.clone(),
            source,
        };
        return if value.get("theta").is_some() {
            let probe: Probe = serde_json::from_value(value).map_err(bad)?;
            Ok((Classifier::from_probe(&probe), "probe".into()))
        } else {
            let dir: Direction = serde_json::from_value(value).map_err(bad)?;
            let source = serde_json::to_value(dir.method)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_else(|| "direction".into());
            Ok((Classifier::from_direction(&dir, None), source))
        };
    }
    let sidecar = p.truth.clone().unwrap_or_else(|| truth_sidecar(pack));
    let truth: PlantedTruth = read_json(&sidecar)?;
    let v = truth.direction(&p.direction).ok_or_else(|| {
        CliError::Usage(format!("no planted direction `{}` in {}", p.direction, sidecar.display()))
    })?;
    let dir = Direction::new(v.to_vec(), Method::Planted)?;
    Ok((Classifier::from_direction(&dir, None), format!("planted:{}", p.direction)))
}

pub fn run(p: &EvalParams, ws: &Workspace) -> CliResult<()> {
    let pack = required(&p.pack, "pack")?;
    require_file(pack)?;
    if let Some(path) = &p.probe {
        require_file(path)?;
    }
    if p.pc_overlap == Some(0) {
        return Err(CliError::Usage("--pc-overlap must be at least 1".into()));
    }
    let set = load_pack(pack)?;
    let (classifier, source) = load_classifier(p, pack)?;
    let report = accuracy(&classifier, &set, &p.label, p.resolve_sign)?;
    let overlap = match p.pc_overlap {
        Some(k) => Some(pc_overlap(&classifier.theta, &stacked(&center(&set)), k)?),
        None => None,
    };
    let out = EvalOutput {
        source,
        n_pairs: set.n_rows(),
        report,
        pc_overlap: overlap,
    };
    ws.write_json("eval.json", &out)?;
    print!(
        "{}: accuracy {:.4} on `{}`",
        out.source, out.report.accuracy, out.report.label_track
    );
    if out.report.sign_flipped {
        print!(" (orientation flipped)");
    }
    println!();
    Ok(())
}
