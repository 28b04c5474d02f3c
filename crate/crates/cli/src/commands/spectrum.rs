// SPDX-License-Identifier: MIT OR Apache-2.0

//! `spectrum`: DRC or RRC eigenvalues, diagnostics and a bar chart.

use std::fmt::Write;
use std::path::PathBuf;

use clap::Args;
use relcon::linalg::DEFAULT_RTOL;
use relcon::spectral::DEFAULT_GAP_THRESHOLD;
use relcon::{center, diagnose, drc, load_pack, rrc, Method, Spectrum, SpectrumDiagnostics};
use serde::{Deserialize, Serialize};

use super::{parse_with, required};
use crate::error::{CliError, CliResult};
use crate::run::{require_file, Overlay, Workspace};
use crate::svg;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumParams {
    pub pack: Option<PathBuf>,
    pub method: Method,
    pub top: usize,
    pub gap_threshold: f64,
    pub rank_rtol: f64,
    pub width: u32,
    pub height: u32,
    pub seed: u64,
}

impl Default for SpectrumParams {
    fn default() -> Self {
        Self {
            pack: None,
            method: Method::Drc,
            top: 10,
            gap_threshold: DEFAULT_GAP_THRESHOLD,
            rank_rtol: DEFAULT_RTOL,
            width: 640,
            height: 360,
            seed: 0,
        }
    }
}

/// Compute a contrastive spectrum and diagnose its leading eigenvalues.
#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pack: Option<PathBuf>,
    /// drc or rrc.
    #[arg(long, value_parser = parse_with::<Method>)]
    method: Option<Method>,
    /// Number of leading eigenvalues to report and plot.
    #[arg(long)]
    top: Option<usize>,
    /// Ratio above which a leading eigenvalue counts as isolated.
    #[arg(long)]
    gap_threshold: Option<f64>,
    #[arg(long)]
    rank_rtol: Option<f64>,
    #[arg(long)]
    width: Option<u32>,
    #[arg(long)]
    height: Option<u32>,
}

impl SpectrumArgs {
    pub fn overlay(&self) -> Overlay {
        let mut o = Overlay::default();
        o.set("pack", self.pack.clone())
            .set("method", self.method)
            .set("top", self.top)
            .set("gap_threshold", self.gap_threshold)
            .set("rank_rtol", self.rank_rtol)
            .set("width", self.width)
            .set("height", self.height);
        o
    }
}

#[derive(Serialize)]
struct SpectrumOutput<'a> {
    spectrum: &'a Spectrum,
    diagnostics: &'a SpectrumDiagnostics,
}

pub fn run(p: &SpectrumParams, ws: &Workspace) -> CliResult<()> {
    if !matches!(p.method, Method::Drc | Method::Rrc) {
        return Err(CliError::Usage(
            "spectrum supports the drc and rrc methods only".into(),
        ));
    }
    if p.top < 2 {
        return Err(CliError::Usage(format!("--top must be at least 2, got {}", p.top)));
    }
    let pack = required(&p.pack, "pack")?;
    require_file(pack)?;
    let set = load_pack(pack)?;
    let centered = center(&set);
    let sp = match p.method {
        Method::Rrc => rrc(&centered, p.rank_rtol)?,
        _ => drc(&centered)?,
    };
    let diag = diagnose(&sp, p.top, p.gap_threshold)?;

    ws.write_json(
        "spectrum.json",
        &SpectrumOutput {
            spectrum: &sp,
            diagnostics: &diag,
        },
    )?;
    let mut csv = String::from("index,mu,lambda_c\n");
    for i in 0..p.top {
        let _ = writeln!(csv, "{},{},{}", i + 1, sp.mu[i], sp.lambda_c[i]);
    }
    ws.write_text("spectrum.csv", &csv)?;
    let name = match p.method {
        Method::Rrc => "RRC",
        _ => "DRC",
    };
    let title = format!("Top {} {name} eigenvalues ({})", p.top, diag.verdict);
    ws.write_text(
        "spectrum.svg",
        &svg::bar_chart(&title, "mu", &sp.mu[..p.top], p.width, p.height),
    )?;
    println!(
        "{name}: verdict {}, gap ratio {:.3}, rank {}",
        diag.verdict, diag.gap_ratio, sp.rank_used
    );
    Ok(())
}
