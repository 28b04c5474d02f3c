// SPDX-License-Identifier: MIT OR Apache-2.0

//! `multivar`: multivariate DRC over several variants, with projection plots.

use std::path::PathBuf;

use clap::Args;
use relcon::data::PairSpec;
use relcon::spectral::{default_scale, multivariate_drc_scaled, DEFAULT_GAP_THRESHOLD};
use relcon::{center, diagnose, load_pack, Spectrum, SpectrumDiagnostics};
use serde::{Deserialize, Serialize};

use super::required;
use crate::error::CliResult;
use crate::run::{read_json, require_file, Overlay, Workspace};
use crate::svg::{self, Series};

/// Eigenvectors needed for the two projection planes.
const PLOT_COMPONENTS: usize = 4;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultivarParams {
    pub pack: Option<PathBuf>,
    /// JSON pair layout; the set's default layout when absent.
    pub pairs: Option<PathBuf>,
    /// Gram weight `c` in `DᵀD − c·G`; `|pairs|·2/k` when absent.
    pub scale: Option<f64>,
    pub top: usize,
    pub width: u32,
    pub height: u32,
    pub seed: u64,
}

impl Default for MultivarParams {
    fn default() -> Self {
        Self {
            pack: None,
            pairs: None,
            scale: None,
            top: 10,
            width: 520,
            height: 440,
            seed: 0,
        }
    }
}

/// Multivariate DRC with projections onto eigenvectors (1,2) and (3,4).
#[derive(Debug, Args)]
pub struct MultivarArgs {
    #[arg(long)]
    pack: Option<PathBuf>,
    /// JSON file with {"pairs": [{"a": .., "b": .., "tag": ..}, ...]}.
    #[arg(long)]
    pairs: Option<PathBuf>,
    #[arg(long)]
    scale: Option<f64>,
    /// Eigenvalues included in the diagnostics.
    #[arg(long)]
    top: Option<usize>,
    #[arg(long)]
    width: Option<u32>,
    #[arg(long)]
    height: Option<u32>,
}

impl MultivarArgs {
    pub fn overlay(&self) -> Overlay {
        let mut o = Overlay::default();
        o.set("pack", self.pack.clone())
            .set("pairs", self.pairs.clone())
            .set("scale", self.scale)
            .set("top", self.top)
            .set("width", self.width)
            .set("height", self.height);
        o
    }
}

#[derive(Serialize)]
struct MultivarOutput<'a> {
    pairs: &'a PairSpec,
    scale: f64,
    spectrum: &'a Spectrum,
    diagnostics: &'a SpectrumDiagnostics,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ProjectedPoint {
    pub variant: String,
    pub row: usize,
    /// Coordinates on eigenvectors 1..=4.
    pub coords: [f64; PLOT_COMPONENTS],
}

/// A grey segment joining the two members of one contrast pair.
#[derive(Debug, Serialize, Deserialize)]
pub struct PairLine {
    pub pair: usize,
    pub row: usize,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Projections {
    pub variants: Vec<String>,
    pub points: Vec<ProjectedPoint>,
    pub pair_lines: Vec<PairLine>,
}

pub fn run(p: &MultivarParams, ws: &Workspace) -> CliResult<()> {
    let pack = required(&p.pack, "pack")?;
    require_file(pack)?;
    let spec: Option<PairSpec> = match &p.pairs {
        Some(path) => Some(read_json(path)?),
        None => None,
    };
    let set = load_pack(pack)?;
    let spec = spec.unwrap_or_else(|| PairSpec::default_for(&set));
    let index = spec.resolve(&set)?;
    let centered = center(&set);
    let scale = p
        .scale
        .unwrap_or_else(|| default_scale(spec.len(), set.n_variants()));
    let sp = multivariate_drc_scaled(&centered, &spec, scale)?;
    if sp.len() < PLOT_COMPONENTS {
        return Err(relcon::Error::RankExceeded {
            requested: PLOT_COMPONENTS,
            rank: sp.len(),
        }
        .into());
    }
    let diag = diagnose(&sp, p.top.min(sp.len()), DEFAULT_GAP_THRESHOLD)?;
    ws.write_json(
        "multivar_spectrum.json",
        &MultivarOutput {
            pairs: &spec,
            scale,
            spectrum: &sp,
            diagnostics: &diag,
        },
    )?;

    let names: Vec<String> = set.variant_names().map(str::to_string).collect();
    // coords[v][row] on the leading eigenvectors
    let coords: Vec<Vec<[f64; PLOT_COMPONENTS]>> = (0..set.n_variants())
        .map(|v| {
            let m = centered.variant_at(v);
            (0..m.nrows())
                .map(|r| {
                    let x = m.row(r);
                    std::array::from_fn(|k| sp.vectors[k].iter().zip(&x).map(|(a, b)| a * b).sum())
                })
                .collect()
        })
        .collect();
    let projections = Projections {
        variants: names.clone(),
        points: coords
            .iter()
            .enumerate()
            .flat_map(|(v, rows)| {
                let name = &names[v];
                rows.iter().enumerate().map(move |(row, c)| ProjectedPoint {
                    variant: name.clone(),
                    row,
                    coords: *c,
                })
            })
            .collect(),
        pair_lines: index
            .iter()
            .enumerate()
            .flat_map(|(i, &(a, b))| {
                let (from, to) = (&names[a], &names[b]);
                (0..set.n_rows()).map(move |row| PairLine {
                    pair: i,
                    row,
                    from: from.clone(),
                    to: to.clone(),
                })
            })
            .collect(),
    };
    ws.write_json("projections.json", &projections)?;

    for (file, (i, j)) in [("proj_12.svg", (0, 1)), ("proj_34.svg", (2, 3))] {
        let series: Vec<Series> = names
            .iter()
            .zip(&coords)
            .map(|(name, rows)| Series {
                name: name.clone(),
                points: rows.iter().map(|c| (c[i], c[j])).collect(),
            })
            .collect();
        let segments: Vec<_> = index
            .iter()
            .flat_map(|&(a, b)| {
                let (ca, cb) = (&coords[a], &coords[b]);
                ca.iter().zip(cb).map(move |(x, y)| ((x[i], x[j]), (y[i], y[j])))
            })
            .collect();
        let title = format!("Multivariate DRC: eigenvectors {} and {}", i + 1, j + 1);
        let svg = svg::scatter(
            &title,
            &format!("eigenvector {}", i + 1),
            &format!("eigenvector {}", j + 1),
            &series,
            &segments,
            p.width,
            p.height,
        );
        ws.write_text(file, &svg)?;
    }
    println!(
        "{} pairs over {} variants, leading eigenvalues {:.4}, {:.4}",
        spec.len(),
        set.n_variants(),
        sp.mu[0],
        sp.mu[1]
    );
    Ok(())
}
