//! Experiment drivers. Each returns a [`Table`] plus free-form details for
//! the metadata sidecar. Grid points are solved independently on the rayon
//! pool and collected in input order.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use squeeze_core::dynamics::{evolve, steady_state_report, trace_distance, EvolveOptions, SteadyStateOptions};
use squeeze_core::observables::{fidelity, partial_trace, quadrature_variance, wigner, Quadrature};
use squeeze_core::semiclassical::{
    analytic_variance_bath, analytic_variance_coherent, closed_form_threshold, stability, stability_threshold,
    SemiclassicalParams, N_REAL,
};
use squeeze_core::{DensityMatrix, HilbertSpec, Liouvillian, Scheme, SqueezedBathParams, Subsystem, SystemParams, C64};
use thiserror::Error;

use crate::config::{ExperimentConfig, WignerSettings};
use crate::output::{Flag, Table};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration lacks the sweep '{0}'")]
    MissingSweep(&'static str),
    #[error("cutoff did not converge below {tol} up to {cap}")]
    Unconverged { tol: f64, cap: usize, trail: Vec<TrailEntry> },
    #[error(transparent)]
    Core(#[from] squeeze_core::Error),
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

#[derive(Debug)]
pub struct ExperimentOutput {
    pub table: Table,
    pub details: Value,
}

/// A solved steady state together with the truncation it was solved at.
#[derive(Clone, Debug)]
pub struct SolvedPoint {
    pub state: DensityMatrix,
    pub residual: f64,
    pub spec: HilbertSpec,
}

/// Observables tracked by the cutoff loop and reported per grid point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Targets {
    /// Cavity variance in the squeezed quadrature of the scheme.
    pub var_a: f64,
    /// Mechanical variance in the same quadrature.
    pub var_b: f64,
    pub fidelity: f64,
}

impl Targets {
    fn as_array(&self) -> [f64; 3] {
        [self.var_a, self.var_b, self.fidelity]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrailEntry {
    pub cutoff: usize,
    pub targets: Targets,
    /// Largest change of any target relative to the previous cutoff.
    pub delta: Option<f64>,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct Convergence {
    pub spec: HilbertSpec,
    pub point: SolvedPoint,
    pub trail: Vec<TrailEntry>,
}

/// Quadrature squeezed by each scheme: `Y` under the pump, `X` under the bath.
pub fn squeezed_quadrature(scheme: &Scheme) -> Quadrature {
    match scheme {
        Scheme::CoherentPump => Quadrature::Y,
        Scheme::SqueezedBath(_) => Quadrature::X,
    }
}

pub fn mode_variance(rho: &DensityMatrix, sub: Subsystem, quad: Quadrature) -> squeeze_core::Result<f64> {
    quadrature_variance(&partial_trace(rho, sub)?, quad)
}

pub fn mode_fidelity(rho: &DensityMatrix) -> squeeze_core::Result<f64> {
    fidelity(&partial_trace(rho, Subsystem::Cavity)?, &partial_trace(rho, Subsystem::Mech)?)
}

pub fn targets(rho: &DensityMatrix, scheme: &Scheme) -> squeeze_core::Result<Targets> {
    let quad = squeezed_quadrature(scheme);
    Ok(Targets {
        var_a: mode_variance(rho, Subsystem::Cavity, quad)?,
        var_b: mode_variance(rho, Subsystem::Mech, quad)?,
        fidelity: mode_fidelity(rho)?,
    })
}

pub fn solve_at(
    params: &SystemParams,
    scheme: &Scheme,
    spec: HilbertSpec,
    solver: &SteadyStateOptions,
) -> squeeze_core::Result<SolvedPoint> {
    let l = Liouvillian::from_model(params, scheme, &spec)?;
    let rep = steady_state_report(&l, solver)?;
    Ok(SolvedPoint {
        state: rep.state,
        residual: rep.residual,
        spec,
    })
}

/// Raises both cutoffs by two from `cfg.converge.start` until no target moves
/// by `cfg.converge.tol` or more, and returns the smaller of the last pair.
pub fn converge_point(params: &SystemParams, scheme: &Scheme, cfg: &ExperimentConfig) -> Result<Convergence> {
    let settings = cfg.converge;
    let mut trail = Vec::new();
    let mut prev: Option<(SolvedPoint, Targets)> = None;
    let mut n = settings.start;
    while n <= settings.max {
        let point = solve_at(params, scheme, HilbertSpec::new(n, n)?, &cfg.solver)?;
        let t = targets(&point.state, scheme)?;
        let delta = prev.as_ref().map(|(_, pt)| {
            pt.as_array()
                .iter()
                .zip(t.as_array())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        });
        trail.push(TrailEntry {
            cutoff: n,
            targets: t,
            delta,
            residual: point.residual,
        });
        if let (Some(d), Some((p, _))) = (delta, prev.take()) {
            if d < settings.tol {
                return Ok(Convergence {
                    spec: p.spec,
                    point: p,
                    trail,
                });
            }
        }
        prev = Some((point, t));
        n += 2;
    }
    Err(ExperimentError::Unconverged {
        tol: settings.tol,
        cap: settings.max,
        trail,
    })
}

/// Convergence for the configuration's own parameters and scheme.
pub fn converge_cutoff(cfg: &ExperimentConfig) -> Result<Convergence> {
    converge_point(&cfg.params, &cfg.scheme(), cfg)
}

pub fn is_stable(params: &SystemParams) -> bool {
    SemiclassicalParams::from_system(params)
        .and_then(|p| stability(&p))
        .map(|s| s.is_stable)
        .unwrap_or(false)
}

/// Solves one grid point. Stable points go through the cutoff loop when
/// `spec.auto` is set; unstable ones are solved at the configured cutoffs and
/// flagged.
pub fn solve_grid_point(params: &SystemParams, scheme: &Scheme, cfg: &ExperimentConfig) -> (Option<SolvedPoint>, Flag) {
    let stable = is_stable(params);
    if cfg.auto_cutoff && stable {
        return match converge_point(params, scheme, cfg) {
            Ok(c) => (Some(c.point), Flag::Ok),
            Err(ExperimentError::Unconverged { trail, .. }) => {
                let last = trail
                    .last()
                    .and_then(|e| HilbertSpec::new(e.cutoff, e.cutoff).ok())
                    .and_then(|spec| solve_at(params, scheme, spec, &cfg.solver).ok());
                (last, Flag::Unconverged)
            }
            Err(_) => (None, Flag::Failed),
        };
    }
    match solve_at(params, scheme, cfg.spec, &cfg.solver) {
        Ok(p) => (Some(p), if stable { Flag::Ok } else { Flag::Unstable }),
        Err(_) => (None, Flag::Failed),
    }
}

fn point_columns(point: &Option<SolvedPoint>) -> [f64; 3] {
    match point {
        Some(p) => [p.residual, p.spec.cavity_dim() as f64, p.spec.mech_dim() as f64],
        None => [f64::NAN; 3],
    }
}

fn grid(outer: &[f64], inner: &[f64]) -> Vec<(f64, f64)> {
    outer.iter().flat_map(|&o| inner.iter().map(move |&i| (o, i))).collect()
}

fn sweep_or_single(values: &Option<Vec<f64>>, fallback: f64) -> Vec<f64> {
    values.clone().unwrap_or_else(|| vec![fallback])
}

/// Numeric and closed-form `Var(Y_a)`, `Var(Y_b)` against the pump strength.
pub fn run_sweep_q(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let qs = cfg.sweeps.q.clone().ok_or(ExperimentError::MissingSweep("sweep.q"))?;
    let g_cms = sweep_or_single(&cfg.sweeps.g_cm, cfg.params.g_cm);
    let scheme = Scheme::CoherentPump;
    let rows: Vec<(Vec<f64>, Flag)> = grid(&g_cms, &qs)
        .into_par_iter()
        .map(|(g_cm, q)| {
            let params = SystemParams { q, g_cm, ..cfg.params };
            let (point, flag) = solve_grid_point(&params, &scheme, cfg);
            let num = numeric_pair(&point, Quadrature::Y);
            let ana = SemiclassicalParams::from_system(&params)
                .and_then(|p| analytic_variance_coherent(&p))
                .map(|v| [v.var_ya, v.var_yb])
                .unwrap_or([f64::NAN; 2]);
            let mut values = vec![q, g_cm, num[0], num[1], ana[0], ana[1]];
            values.extend(point_columns(&point));
            (values, flag)
        })
        .collect();
    Ok(ExperimentOutput {
        table: collect_table(
            [
                "q", "g_cm", "var_ya_num", "var_yb_num", "var_ya_ana", "var_yb_ana", "residual", "cutoff_used",
                "mech_cutoff_used",
            ],
            rows,
        ),
        details: json!({ "quadrature": "Y", "scheme": "coherent-pump" }),
    })
}

/// Numeric and closed-form `Var(X_a)`, `Var(X_b)` against the reservoir
/// squeezing `r`.
pub fn run_sweep_r(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let rs = cfg.sweeps.r.clone().ok_or(ExperimentError::MissingSweep("sweep.r"))?;
    let g_cms = sweep_or_single(&cfg.sweeps.g_cm, cfg.params.g_cm);
    let theta = cfg.bath.map_or(PI, |b| b.theta);
    let rows: Vec<(Vec<f64>, Flag)> = grid(&g_cms, &rs)
        .into_par_iter()
        .map(|(g_cm, r)| {
            let params = SystemParams { g_cm, ..cfg.params };
            let bath = match SqueezedBathParams::new(r, theta) {
                Ok(b) => b,
                Err(_) => {
                    let mut values = vec![r, g_cm];
                    values.extend([f64::NAN; 7]);
                    return (values, Flag::Failed);
                }
            };
            let scheme = Scheme::SqueezedBath(bath);
            let (point, flag) = solve_grid_point(&params, &scheme, cfg);
            let num = numeric_pair(&point, Quadrature::X);
            let ana = SemiclassicalParams::from_system(&params)
                .map(|p| {
                    let v = analytic_variance_bath(&p, &bath);
                    [v.var_xa, v.var_xb]
                })
                .unwrap_or([f64::NAN; 2]);
            let mut values = vec![r, g_cm, num[0], num[1], ana[0], ana[1]];
            values.extend(point_columns(&point));
            (values, flag)
        })
        .collect();
    Ok(ExperimentOutput {
        table: collect_table(
            [
                "r", "g_cm", "var_xa_num", "var_xb_num", "var_xa_ana", "var_xb_ana", "residual", "cutoff_used",
                "mech_cutoff_used",
            ],
            rows,
        ),
        details: json!({ "quadrature": "X", "scheme": "squeezed-bath", "theta": theta }),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FidelityAxes {
    /// Pump strength against optomechanical coupling.
    QGcm,
    /// Atom–cavity coupling against optomechanical coupling.
    GacGcm,
}

/// Cavity–mechanics fidelity over a two-coupling grid.
pub fn run_fidelity_maps(cfg: &ExperimentConfig, axes: FidelityAxes) -> Result<ExperimentOutput> {
    let g_cms = cfg.sweeps.g_cm.clone().ok_or(ExperimentError::MissingSweep("sweep.g_cm"))?;
    let (first_name, firsts) = match axes {
        FidelityAxes::QGcm => ("q", cfg.sweeps.q.clone().ok_or(ExperimentError::MissingSweep("sweep.q"))?),
        FidelityAxes::GacGcm => ("g_ac", cfg.sweeps.g_ac.clone().ok_or(ExperimentError::MissingSweep("sweep.g_ac"))?),
    };
    let scheme = cfg.scheme();
    let rows: Vec<(Vec<f64>, Flag)> = grid(&firsts, &g_cms)
        .into_par_iter()
        .map(|(x, g_cm)| {
            let params = match axes {
                FidelityAxes::QGcm => SystemParams { q: x, g_cm, ..cfg.params },
                FidelityAxes::GacGcm => SystemParams { g_ac: x, g_cm, ..cfg.params },
            };
            let (point, mut flag) = solve_grid_point(&params, &scheme, cfg);
            let f = match point.as_ref().map(|p| mode_fidelity(&p.state)) {
                Some(Ok(f)) => f,
                _ => {
                    flag = Flag::Failed;
                    f64::NAN
                }
            };
            let mut values = vec![x, g_cm, f];
            values.extend(point_columns(&point));
            (values, flag)
        })
        .collect();
    Ok(ExperimentOutput {
        table: collect_table([first_name, "g_cm", "fidelity", "residual", "cutoff_used", "mech_cutoff_used"], rows),
        details: json!({ "scheme": scheme_name(&scheme) }),
    })
}

/// Both quadrature variances of both modes along a trajectory from the
/// vacuum, plus the steady state it should settle to.
pub fn run_time_evolution(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let scheme = cfg.scheme();
    let spec = if cfg.auto_cutoff { converge_cutoff(cfg)?.spec } else { cfg.spec };
    let l = Liouvillian::from_model(&cfg.params, &scheme, &spec)?;
    let opts = EvolveOptions {
        rtol: cfg.evolve.rtol,
        atol: cfg.evolve.atol,
        ..EvolveOptions::from_ground(&spec, cfg.evolve.t_final, cfg.evolve.n_samples)
    };
    let trajectory = evolve(&l, &opts)?;
    let steady = steady_state_report(&l, &cfg.solver)?;

    let observe = |rho: &DensityMatrix| -> squeeze_core::Result<Vec<f64>> {
        let cav = partial_trace(rho, Subsystem::Cavity)?;
        let mech = partial_trace(rho, Subsystem::Mech)?;
        Ok(vec![
            quadrature_variance(&cav, Quadrature::X)?,
            quadrature_variance(&cav, Quadrature::Y)?,
            quadrature_variance(&mech, Quadrature::X)?,
            quadrature_variance(&mech, Quadrature::Y)?,
            fidelity(&cav, &mech)?,
        ])
    };
    let rows = trajectory
        .par_iter()
        .map(|(t, rho)| {
            let mut values = vec![*t];
            values.extend(observe(rho)?);
            Ok((values, Flag::Ok))
        })
        .collect::<squeeze_core::Result<Vec<_>>>()?;
    let table = collect_table(["t", "var_xa", "var_ya", "var_xb", "var_yb", "fidelity"], rows);

    let (_, last) = trajectory.last().expect("evolve returns at least two samples");
    let ss_values = observe(&steady.state)?;
    let last_row = &table.rows.last().expect("non-empty").values[1..];
    let max_gap = ss_values.iter().zip(last_row).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(ExperimentOutput {
        details: json!({
            "scheme": scheme_name(&scheme),
            "cutoff": [spec.cavity_dim(), spec.mech_dim()],
            "steady_state": {
                "var_xa": ss_values[0], "var_ya": ss_values[1],
                "var_xb": ss_values[2], "var_yb": ss_values[3], "fidelity": ss_values[4],
                "residual": steady.residual,
            },
            "final_trace_distance": trace_distance(last, &steady.state)?,
            "final_max_observable_gap": max_gap,
        }),
        table,
    })
}

/// Semiclassical eigenvalue test and the closed criterion against `q`.
pub fn run_stability(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let qs = cfg.sweeps.q.clone().ok_or(ExperimentError::MissingSweep("sweep.q"))?;
    let base = SemiclassicalParams::from_system(&cfg.params)?;
    let closed = closed_form_threshold(&base);
    let bisected = stability_threshold(&base, 0.0, 1.0, 1e-12).unwrap_or(f64::NAN);
    let mut columns: Vec<String> =
        ["q", "is_stable", "closed_stable", "max_re_eigenvalue", "threshold_bisected", "threshold_closed"]
            .into_iter()
            .map(String::from)
            .collect();
    for k in 0..N_REAL {
        columns.push(format!("eig{k}_re"));
        columns.push(format!("eig{k}_im"));
    }
    let rows = qs
        .par_iter()
        .map(|&q| {
            let s = stability(&base.with_q(q))?;
            let closed_stable = 4.0 * q < base.kappa_a + base.kappa_b;
            let mut eig = s.eigenvalues.clone();
            eig.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
            let mut values = vec![
                q,
                f64::from(u8::from(s.is_stable)),
                f64::from(u8::from(closed_stable)),
                s.max_real_part(),
                bisected,
                closed,
            ];
            values.extend(eig.iter().flat_map(|z| [z.re, z.im]));
            let flag = if s.is_stable == closed_stable { Flag::Ok } else { Flag::Disagree };
            Ok((values, flag))
        })
        .collect::<squeeze_core::Result<Vec<_>>>()?;
    Ok(ExperimentOutput {
        table: collect_table(columns, rows),
        details: json!({
            "j": base.j,
            "threshold_bisected": bisected,
            "threshold_closed": closed,
        }),
    })
}

/// Wigner functions of both reduced steady states on a square grid.
pub fn run_wigner(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let scheme = cfg.scheme();
    let point = if cfg.auto_cutoff {
        converge_cutoff(cfg)?.point
    } else {
        solve_at(&cfg.params, &scheme, cfg.spec, &cfg.solver)?
    };
    let cav = partial_trace(&point.state, Subsystem::Cavity)?;
    let mech = partial_trace(&point.state, Subsystem::Mech)?;
    let axis = grid_axis(cfg.wigner);
    let rows = axis
        .par_iter()
        .map(|&y| {
            let line: Vec<C64> = axis.iter().map(|&x| C64::new(x, y)).collect();
            let wc = wigner(&cav, &line)?;
            let wm = wigner(&mech, &line)?;
            Ok(line
                .iter()
                .zip(wc.iter().zip(&wm))
                .map(|(z, (c, m))| (vec![z.re, z.im, *c, *m], Flag::Ok))
                .collect::<Vec<_>>())
        })
        .collect::<squeeze_core::Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(ExperimentOutput {
        table: collect_table(["x", "y", "w_cavity", "w_mech"], rows),
        details: json!({
            "scheme": scheme_name(&scheme),
            "cutoff": [point.spec.cavity_dim(), point.spec.mech_dim()],
            "residual": point.residual,
        }),
    })
}

/// Convergence trail as a table; an unconverged run still yields its trail.
pub fn run_converge(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let (trail, converged) = match converge_cutoff(cfg) {
        Ok(c) => (c.trail, Some(c.spec)),
        Err(ExperimentError::Unconverged { trail, .. }) => (trail, None),
        Err(e) => return Err(e),
    };
    let mut table = Table::new(["cutoff", "var_a", "var_b", "fidelity", "delta", "residual"]);
    for e in &trail {
        let t = e.targets;
        table.push(
            vec![e.cutoff as f64, t.var_a, t.var_b, t.fidelity, e.delta.unwrap_or(f64::NAN), e.residual],
            Flag::Ok,
        );
    }
    if converged.is_none() {
        if let Some(last) = table.rows.last_mut() {
            last.flag = Flag::Unconverged;
        }
    }
    Ok(ExperimentOutput {
        table,
        details: json!({
            "scheme": scheme_name(&cfg.scheme()),
            "quadrature": format!("{:?}", squeezed_quadrature(&cfg.scheme())),
            "tol": cfg.converge.tol,
            "converged_cutoff": converged.map(|s| [s.cavity_dim(), s.mech_dim()]),
        }),
    })
}

fn grid_axis(w: WignerSettings) -> Vec<f64> {
    (0..w.points)
        .map(|i| -w.extent + 2.0 * w.extent * i as f64 / (w.points - 1) as f64)
        .collect()
}

fn numeric_pair(point: &Option<SolvedPoint>, quad: Quadrature) -> [f64; 2] {
    let Some(p) = point else { return [f64::NAN; 2] };
    let a = mode_variance(&p.state, Subsystem::Cavity, quad).unwrap_or(f64::NAN);
    let b = mode_variance(&p.state, Subsystem::Mech, quad).unwrap_or(f64::NAN);
    [a, b]
}

fn collect_table<S: Into<String>>(columns: impl IntoIterator<Item = S>, rows: Vec<(Vec<f64>, Flag)>) -> Table {
    let mut table = Table::new(columns);
    for (values, flag) in rows {
        table.push(values, flag);
    }
    table
}

fn scheme_name(scheme: &Scheme) -> Value {
    match scheme {
        Scheme::CoherentPump => json!("coherent-pump"),
        Scheme::SqueezedBath(b) => json!({ "squeezed-bath": { "r": b.r, "theta": b.theta } }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ExperimentConfig {
        text.parse().unwrap()
    }

    #[test]
    fn vacuum_converges_at_minimal_cutoff() {
        let c = converge_cutoff(&cfg("params.q = 0")).unwrap();
        assert_eq!(c.spec, HilbertSpec::new(2, 2).unwrap());
        assert_eq!(c.trail.len(), 2);
        assert!(c.trail[1].delta.unwrap() < 1e-12);
        for sub in [Subsystem::Cavity, Subsystem::Mech] {
            let reduced = partial_trace(&c.point.state, sub).unwrap();
            assert!((reduced.matrix()[(0, 0)].re - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn pump_trail_shrinks() {
        let c = converge_cutoff(&cfg("params.q = 0.01")).unwrap();
        let deltas: Vec<f64> = c.trail.iter().filter_map(|e| e.delta).collect();
        assert!(deltas.windows(2).all(|w| w[1] < w[0]), "{deltas:?}");
        assert!(*deltas.last().unwrap() < 1e-4);
        assert_eq!(c.spec.cavity_dim() + 2, c.trail.last().unwrap().cutoff);
    }

    #[test]
    fn cap_reports_trail() {
        match converge_cutoff(&cfg("params.q = 0.01\nconverge.max = 4")) {
            Err(ExperimentError::Unconverged { trail, cap, .. }) => {
                assert_eq!(cap, 4);
                assert_eq!(trail.iter().map(|e| e.cutoff).collect::<Vec<_>>(), [2, 4]);
            }
            other => panic!("expected an unconverged error, got {other:?}"),
        }
    }

    #[test]
    fn stability_table_threshold() {
        let out = run_stability(&cfg("sweep.q = 0, 0.01, 0.06")).unwrap();
        let t = &out.table;
        assert_eq!(t.column("is_stable").unwrap(), [1.0, 1.0, 0.0]);
        assert_eq!(t.column("closed_stable").unwrap(), [1.0, 1.0, 0.0]);
        assert!((t.column("threshold_closed").unwrap()[0] - 0.0505).abs() < 1e-15);
        assert!((t.column("threshold_bisected").unwrap()[0] - 0.0505).abs() < 1e-10);
        assert_eq!(t.flagged(), 0);
        assert_eq!(t.columns.len(), 6 + 2 * N_REAL);
    }

    #[test]
    fn sweep_q_endpoint_and_flags() {
        let out = run_sweep_q(&cfg("sweep.q = 0, 0.01, 0.06\nspec.cavity_dim = 4\nspec.mech_dim = 4")).unwrap();
        let t = &out.table;
        for col in ["var_ya_num", "var_yb_num", "var_ya_ana", "var_yb_ana"] {
            assert!((t.column(col).unwrap()[0] - 0.25).abs() < 1e-10, "{col}");
        }
        assert!((t.column("var_ya_ana").unwrap()[1] - 0.21024).abs() < 1e-5);
        assert!((t.column("var_yb_ana").unwrap()[1] - 0.20126).abs() < 1e-5);
        assert_eq!(t.rows[0].flag, Flag::Ok);
        assert_eq!(t.rows[2].flag, Flag::Unstable);
        assert_eq!(t.column("cutoff_used").unwrap(), [4.0; 3]);
    }

    #[test]
    fn sweep_r_at_zero_is_vacuum() {
        let out = run_sweep_r(&cfg("sweep.r = 0, 0.3\nspec.cavity_dim = 4\nspec.mech_dim = 4")).unwrap();
        let t = &out.table;
        for col in ["var_xa_num", "var_xb_num", "var_xa_ana", "var_xb_ana"] {
            assert!((t.column(col).unwrap()[0] - 0.25).abs() < 1e-10, "{col}");
        }
        assert!((t.column("var_xa_ana").unwrap()[1] - 0.202471).abs() < 1e-6);
        assert!((t.column("var_xb_ana").unwrap()[1] - 0.184731).abs() < 1e-6);
    }

    #[test]
    fn wigner_grid_layout() {
        let out = run_wigner(&cfg("params.q = 0\nspec.cavity_dim = 3\nspec.mech_dim = 3\nwigner.points = 5")).unwrap();
        let t = &out.table;
        assert_eq!(t.rows.len(), 25);
        // centre of the grid is the origin; vacuum peaks there at 2/π
        let centre = &t.rows[12].values;
        assert_eq!((centre[0], centre[1]), (0.0, 0.0));
        assert!((centre[2] - 2.0 / PI).abs() < 1e-10 && (centre[3] - 2.0 / PI).abs() < 1e-10);
    }

    #[test]
    fn missing_sweep_is_an_error() {
        assert!(matches!(run_sweep_q(&cfg("")), Err(ExperimentError::MissingSweep("sweep.q"))));
    }
}
