// SPDX-License-Identifier: MIT OR Apache-2.0

//! `train`: fit CCS probes over a range of seeds.

use std::path::PathBuf;

use clap::Args;
use relcon::ccs::{CurvePoint, SeedResult};
use relcon::{
    accuracy, center, load_pack, seed_stats, train_multi, CcsConfig, Classifier, Optimizer,
    SeedStats,
};
use serde::{Deserialize, Serialize};

use super::{parse_with, required};
use crate::error::CliResult;
use crate::run::{require_file, Overlay, Workspace};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainParams {
    pub pack: Option<PathBuf>,
    /// Label track used for per-seed accuracy, when the pack carries it.
    pub label: String,
    /// First seed; `seeds` consecutive seeds are trained.
    pub seed: u64,
    pub seeds: usize,
    pub use_consistency: bool,
    pub use_confidence: bool,
    pub unit_norm: bool,
    pub svd_project: bool,
    pub rank_rtol: f64,
    pub learning_rate: f64,
    pub steps: usize,
    pub optimizer: Optimizer,
    pub curve_points: usize,
}

impl Default for TrainParams {
    fn default() -> Self {
        let c = CcsConfig::default();
        Self {
            pack: None,
            label: "truth".into(),
            seed: 0,
            seeds: 1,
            use_consistency: c.use_consistency,
            use_confidence: c.use_confidence,
            unit_norm: c.unit_norm,
            svd_project: c.svd_project,
            rank_rtol: c.rank_rtol,
            learning_rate: c.learning_rate,
            steps: c.steps,
            optimizer: c.optimizer,
            curve_points: c.curve_points,
        }
    }
}

impl TrainParams {
    pub fn config(&self) -> CcsConfig {
        CcsConfig {
            use_consistency: self.use_consistency,
            use_confidence: self.use_confidence,
            unit_norm: self.unit_norm,
            svd_project: self.svd_project,
            rank_rtol: self.rank_rtol,
            learning_rate: self.learning_rate,
            steps: self.steps,
            seeds: (0..self.seeds as u64).map(|i| self.seed.wrapping_add(i)).collect(),
            optimizer: self.optimizer,
            curve_points: self.curve_points,
        }
    }
}

/// Train CCS probes on a two-variant pack.
#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pack: Option<PathBuf>,
    /// Label track for accuracy reporting.
    #[arg(long)]
    label: Option<String>,
    /// Number of consecutive seeds, starting at --seed.
    #[arg(long)]
    seeds: Option<usize>,
    /// Drop the consistency term.
    #[arg(long)]
    no_cons: bool,
    /// Drop the confidence term.
    #[arg(long)]
    no_conf: bool,
    /// Keep θ at unit norm.
    #[arg(long)]
    a1: bool,
    /// Restrict θ to the row space of the training data.
    #[arg(long)]
    a2: bool,
    #[arg(long)]
    rank_rtol: Option<f64>,
    /// Learning rate.
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// gd or adam.
    #[arg(long, value_parser = parse_with::<Optimizer>)]
    optimizer: Option<Optimizer>,
    /// Loss-curve samples kept in the report.
    #[arg(long)]
    curve_points: Option<usize>,
}

impl TrainArgs {
    pub fn overlay(&self) -> Overlay {
        let mut o = Overlay::default();
        o.set("pack", self.pack.clone())
            .set("label", self.label.clone())
            .set("seeds", self.seeds)
            .flag("use_consistency", self.no_cons, false)
            .flag("use_confidence", self.no_conf, false)
            .flag("unit_norm", self.a1, true)
            .flag("svd_project", self.a2, true)
            .set("rank_rtol", self.rank_rtol)
            .set("learning_rate", self.lr)
            .set("steps", self.steps)
            .set("optimizer", self.optimizer)
            .set("curve_points", self.curve_points);
        o
    }
}

#[derive(Serialize)]
struct SeedRow<'a> {
    #[serde(flatten)]
    result: &'a SeedResult,
    accuracy: Option<f64>,
}

#[derive(Serialize)]
struct TrainOutput<'a> {
    config: &'a CcsConfig,
    selected_seed: u64,
    selected_loss: f64,
    selected_accuracy: Option<f64>,
    label_track: Option<&'a str>,
    accuracy_stats: Option<SeedStats>,
    per_seed: Vec<SeedRow<'a>>,
    loss_curve: &'a [CurvePoint],
}

pub fn run(p: &TrainParams, ws: &Workspace) -> CliResult<()> {
    let pack = required(&p.pack, "pack")?;
    require_file(pack)?;
    let config = p.config();
    config.validate()?;
    let set = load_pack(pack)?;
    let centered = center(&set);
    centered.pair()?;
    let (probe, report) = train_multi(&centered, &config)?;

    let labeled = set.label(&p.label).is_ok();
    let accuracy_of = |seed: u64| -> CliResult<Option<f64>> {
        if !labeled {
            return Ok(None);
        }
        match report.probes.iter().find(|q| q.seed == seed) {
            Some(q) => Ok(Some(
                accuracy(&Classifier::from_probe(q), &set, &p.label, true)?.accuracy,
            )),
            None => Ok(None),
        }
    };
    let mut rows = Vec::with_capacity(report.per_seed.len());
    for r in &report.per_seed {
        rows.push(SeedRow {
            result: r,
            accuracy: accuracy_of(r.seed)?,
        });
    }
    let accs: Vec<f64> = rows.iter().filter_map(|r| r.accuracy).collect();
    let out = TrainOutput {
        config: &config,
        selected_seed: report.selected_seed,
        selected_loss: probe.final_loss,
        selected_accuracy: accuracy_of(probe.seed)?,
        label_track: labeled.then_some(p.label.as_str()),
        accuracy_stats: if accs.is_empty() { None } else { Some(seed_stats(&accs)?) },
        per_seed: rows,
        loss_curve: &report.loss_curve,
    };
    ws.write_json("probe.json", &probe)?;
    ws.write_json("train_report.json", &out)?;

    let diverged = report.per_seed.iter().filter(|r| r.diverged_at.is_some()).count();
    print!(
        "selected seed {} of {} (loss {:.4e})",
        report.selected_seed,
        config.seeds.len(),
        probe.final_loss
    );
    if let Some(a) = out.selected_accuracy {
        print!(", accuracy {a:.4}");
    }
    if diverged > 0 {
        print!(", {diverged} diverged");
    }
    println!();
    Ok(())
}
