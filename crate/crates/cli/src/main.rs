use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use squeeze_cli::config::{Experiment, ExperimentConfig};
use squeeze_cli::output::write_outputs;

#[derive(Parser)]
#[command(name = "squeeze", version, about = "Squeezing-transfer experiments on the atom-cavity-mechanics model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quadrature variances against the pump strength q
    SweepQ(Common),
    /// Quadrature variances against the reservoir squeezing r
    SweepR(Common),
    /// Cavity-mechanics fidelity over q x g_cm or g_ac x g_cm
    FidelityMap(Common),
    /// Variances along a trajectory from the vacuum
    Timeevo(Common),
    /// Semiclassical eigenvalue test against q
    Stability(Common),
    /// Wigner functions of both reduced steady states
    Wigner(Common),
    /// Cutoff convergence trail
    Converge(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment configuration file
    #[arg(long)]
    config: PathBuf,
    /// CSV output path; the metadata goes next to it with a .json extension
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Accepted for interface compatibility; nothing is random
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let (requested, common) = match cli.command {
        Command::SweepQ(c) => (Some(Experiment::SweepQ), c),
        Command::SweepR(c) => (Some(Experiment::SweepR), c),
        Command::FidelityMap(c) => (Some(Experiment::FidelityMapQGcm), c),
        Command::Timeevo(c) => (Some(Experiment::TimeEvolution), c),
        Command::Stability(c) => (Some(Experiment::Stability), c),
        Command::Wigner(c) => (Some(Experiment::Wigner), c),
        Command::Converge(c) => (None, c),
    };
    let cfg = ExperimentConfig::load(&common.config)?;
    let experiment = match (requested, cfg.experiment) {
        (Some(Experiment::FidelityMapQGcm), Some(e @ Experiment::FidelityMapGacGcm)) => Some(e),
        (Some(Experiment::FidelityMapQGcm), None) if cfg.sweeps.g_ac.is_some() => Some(Experiment::FidelityMapGacGcm),
        (Some(r), Some(e)) if r != e => {
            bail!("config declares experiment '{}' but the subcommand runs '{}'", e.name(), r.name())
        }
        (r, _) => r,
    };
    let out = common
        .out
        .or_else(|| cfg.output.clone())
        .context("no output path: pass --out or set output.path")?;

    let threads = common
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("building the thread pool")?;

    let (result, meta) = squeeze_cli::run_with_metadata(experiment, &cfg, threads)?;
    let sidecar = write_outputs(&out, &result.table, &meta)
        .with_context(|| format!("writing {}", out.display()))?;
    eprintln!(
        "{}: {} rows ({} flagged) in {:.2} s -> {}, {}",
        meta.experiment,
        meta.rows,
        meta.flagged_rows,
        meta.wall_time_s,
        out.display(),
        sidecar.display()
    );
    Ok(())
}
