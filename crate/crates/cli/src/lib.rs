//! Config-driven experiment runner for the atom–cavity–mechanics squeezing
//! model: sweeps, fidelity maps, trajectories, stability scans and Wigner
//! grids, written as CSV with a JSON metadata sidecar.

pub mod config;
pub mod experiments;
pub mod output;

use std::time::Instant;

use config::{Experiment, ExperimentConfig};
use experiments::{ExperimentOutput, FidelityAxes, Result};
use output::{Flag, Metadata, SCHEMA_VERSION};

/// Runs `experiment` (the `converge` subcommand maps to `None`).
pub fn run(experiment: Option<Experiment>, cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    match experiment {
        None => experiments::run_converge(cfg),
        Some(Experiment::SweepQ) => experiments::run_sweep_q(cfg),
        Some(Experiment::SweepR) => experiments::run_sweep_r(cfg),
        Some(Experiment::FidelityMapQGcm) => experiments::run_fidelity_maps(cfg, FidelityAxes::QGcm),
        Some(Experiment::FidelityMapGacGcm) => experiments::run_fidelity_maps(cfg, FidelityAxes::GacGcm),
        Some(Experiment::TimeEvolution) => experiments::run_time_evolution(cfg),
        Some(Experiment::Stability) => experiments::run_stability(cfg),
        Some(Experiment::Wigner) => experiments::run_wigner(cfg),
    }
}

/// Runs and times an experiment, returning the output and its sidecar record.
pub fn run_with_metadata(
    experiment: Option<Experiment>,
    cfg: &ExperimentConfig,
    threads: usize,
) -> Result<(ExperimentOutput, Metadata)> {
    let start = Instant::now();
    let out = run(experiment, cfg)?;
    let wall_time_s = start.elapsed().as_secs_f64();

    let residuals = out.table.column("residual").unwrap_or_default();
    let max_residual = residuals.iter().copied().filter(|r| r.is_finite()).reduce(f64::max);
    let mut cutoffs: Vec<[usize; 2]> = match (out.table.column("cutoff_used"), out.table.column("mech_cutoff_used")) {
        (Some(c), Some(m)) => c
            .iter()
            .zip(&m)
            .filter(|(c, m)| c.is_finite() && m.is_finite())
            .map(|(c, m)| [*c as usize, *m as usize])
            .collect(),
        _ if experiment.is_none() => out
            .table
            .column("cutoff")
            .unwrap_or_default()
            .iter()
            .map(|c| [*c as usize; 2])
            .collect(),
        _ => vec![[cfg.spec.cavity_dim(), cfg.spec.mech_dim()]],
    };
    cutoffs.sort_unstable();
    cutoffs.dedup();

    let meta = Metadata {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION"),
        experiment: experiment.map_or("converge", Experiment::name).to_owned(),
        config: cfg.entries.clone(),
        columns: out.table.columns.clone(),
        rows: out.table.rows.len(),
        flagged_rows: out.table.rows.iter().filter(|r| r.flag != Flag::Ok).count(),
        max_residual,
        cutoffs,
        threads,
        wall_time_s,
        details: out.details.clone(),
    };
    Ok((out, meta))
}
