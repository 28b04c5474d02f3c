// SPDX-License-Identifier: MIT OR Apache-2.0

//! `synth`: write a planted-geometry pack and its truth sidecar.

use std::path::Path;

use clap::Args;
use relcon::{generate, save_pack, GeometryKind, GeometrySpec};
use serde::{Deserialize, Serialize};

use super::parse_with;
use crate::error::CliResult;
use crate::run::{stem, Overlay, Workspace};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthParams {
    pub kind: GeometryKind,
    pub n: usize,
    pub d: usize,
    pub noise: f64,
    pub shear: f64,
    pub distractor_scale: f64,
    pub alpha_mean: f64,
    pub alpha_std: f64,
    pub base_std: f64,
    pub salient_std: f64,
    pub seed: u64,
    /// Pack path, relative to the output directory.
    pub out: String,
}

impl Default for SynthParams {
    fn default() -> Self {
        let g = GeometrySpec::default();
        Self {
            kind: g.kind,
            n: g.n_pairs,
            d: g.dim,
            noise: g.noise_std,
            shear: g.shear,
            distractor_scale: g.distractor_scale,
            alpha_mean: g.alpha_mean,
            alpha_std: g.alpha_std,
            base_std: g.base_std,
            salient_std: g.salient_std,
            seed: g.seed,
            out: "synth.cpak".into(),
        }
    }
}

impl SynthParams {
    pub fn geometry(&self) -> GeometrySpec {
        GeometrySpec {
            n_pairs: self.n,
            dim: self.d,
            kind: self.kind,
            noise_std: self.noise,
            shear: self.shear,
            distractor_scale: self.distractor_scale,
            alpha_mean: self.alpha_mean,
            alpha_std: self.alpha_std,
            base_std: self.base_std,
            salient_std: self.salient_std,
            seed: self.seed,
        }
    }
}

/// Generate a synthetic contrast pack with known directions.
#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Geometry: ideal, sheared, distractor or multivariate.
    #[arg(long, value_parser = parse_with::<GeometryKind>)]
    kind: Option<GeometryKind>,
    /// Number of pairs (rows per variant).
    #[arg(long)]
    n: Option<usize>,
    /// Activation dimension.
    #[arg(long)]
    d: Option<usize>,
    /// Isotropic noise standard deviation.
    #[arg(long)]
    noise: Option<f64>,
    /// Shear angle in radians.
    #[arg(long)]
    shear: Option<f64>,
    #[arg(long)]
    distractor_scale: Option<f64>,
    #[arg(long)]
    alpha_mean: Option<f64>,
    #[arg(long)]
    alpha_std: Option<f64>,
    #[arg(long)]
    base_std: Option<f64>,
    /// Shared high-variance direction strength; 0 disables it.
    #[arg(long)]
    salient_std: Option<f64>,
    /// Output pack name.
    #[arg(long)]
    out: Option<String>,
}

impl SynthArgs {
    pub fn overlay(&self) -> Overlay {
        let mut o = Overlay::default();
        o.set("kind", self.kind)
            .set("n", self.n)
            .set("d", self.d)
            .set("noise", self.noise)
            .set("shear", self.shear)
            .set("distractor_scale", self.distractor_scale)
            .set("alpha_mean", self.alpha_mean)
            .set("alpha_std", self.alpha_std)
            .set("base_std", self.base_std)
            .set("salient_std", self.salient_std)
            .set("out", self.out.clone());
        o
    }
}

pub fn run(p: &SynthParams, ws: &Workspace) -> CliResult<()> {
    let (set, truth) = generate(&p.geometry())?;
    let pack = ws.prepare(&p.out)?;
    save_pack(&set, &pack)?;
    let sidecar = Path::new(&p.out).with_file_name(format!("{}.truth.json", stem(Path::new(&p.out))));
    ws.write_json(sidecar, &truth)?;
    println!(
        "{}: {} pairs x {} dims, {} variants",
        pack.display(),
        set.n_rows(),
        set.dim(),
        set.n_variants()
    );
    Ok(())
}
