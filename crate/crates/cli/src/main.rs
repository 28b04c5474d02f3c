// SPDX-License-Identifier: MIT OR Apache-2.0

//! `relcon`: synthetic contrast packs, CCS training, contrastive spectra and
//! evaluation from the command line. Every run writes a manifest that
//! `relcon replay` turns back into the same outputs.

#![forbid(unsafe_code)]

mod commands;
mod error;
mod run;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::eval::EvalArgs;
use commands::multivar::MultivarArgs;
use commands::spectrum::SpectrumArgs;
use commands::synth::SynthArgs;
use commands::train::TrainArgs;
use commands::Job;
use error::CliResult;
use run::{read_json, resolve, Manifest, Overlay, Workspace};

#[derive(Debug, Parser)]
#[command(name = "relcon", version, about = "Unsupervised contrastive probing toolkit")]
struct Cli {
    /// JSON parameters for the subcommand (a manifest from an earlier run also works).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory receiving every output file.
    #[arg(long, global = true, default_value = "relcon-out")]
    out_dir: PathBuf,
    /// Base random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    Synth(SynthArgs),
    Train(TrainArgs),
    Spectrum(SpectrumArgs),
    Multivar(MultivarArgs),
    Eval(EvalArgs),
    /// Re-run a manifest written by an earlier run.
    Replay {
        manifest: PathBuf,
    },
}

fn job(cli: &Cli) -> CliResult<Job> {
    let with_seed = |mut o: Overlay| {
        o.set("seed", cli.seed);
        o
    };
    let config = cli.config.as_deref();
    Ok(match &cli.command {
        Command::Synth(a) => Job::Synth(resolve("synth", config, with_seed(a.overlay()))?),
        Command::Train(a) => Job::Train(resolve("train", config, with_seed(a.overlay()))?),
        Command::Spectrum(a) => {
            Job::Spectrum(resolve("spectrum", config, with_seed(a.overlay()))?)
        }
        Command::Multivar(a) => {
            Job::Multivar(resolve("multivar", config, with_seed(a.overlay()))?)
        }
        Command::Eval(a) => Job::Eval(resolve("eval", config, with_seed(a.overlay()))?),
        Command::Replay { manifest } => {
            let m: Manifest = read_json(manifest)?;
            Job::from_manifest(m)?
        }
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = job(&cli).and_then(|job| {
        log::debug!("resolved {} parameters: {:?}", job.command(), job);
        job.execute(&Workspace::create(&cli.out_dir)?)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
