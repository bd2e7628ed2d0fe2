//! Experiment configuration files.
//!
//! One `key = value` pair per line; `#` starts a comment; blank lines are
//! ignored. Keys are dotted paths; unknown keys are rejected. See
//! `CONFIG.md` at the repository root for the full key list.
//!
//! Ranges (`sweep.*`) take one of
//! - `start:stop:count`: `count ≥ 2` evenly spaced values, ends included
//! - `start:stop:count:log`: geometric spacing, `start, stop > 0`
//! - `v1, v2, ...`: an explicit list of at least two values

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use squeeze_core::dynamics::{SteadyStateMethod, SteadyStateOptions};
use squeeze_core::{HilbertSpec, Scheme, SqueezedBathParams, SystemParams};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{key}: {message}")]
    Value { key: String, message: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

fn value_error(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Value {
        key: key.to_owned(),
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Experiment {
    SweepQ,
    SweepR,
    FidelityMapQGcm,
    FidelityMapGacGcm,
    TimeEvolution,
    Stability,
    Wigner,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::SweepQ => "sweep-q",
            Experiment::SweepR => "sweep-r",
            Experiment::FidelityMapQGcm => "fidelity-map-q-gcm",
            Experiment::FidelityMapGacGcm => "fidelity-map-gac-gcm",
            Experiment::TimeEvolution => "timeevo",
            Experiment::Stability => "stability",
            Experiment::Wigner => "wigner",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            Experiment::SweepQ,
            Experiment::SweepR,
            Experiment::FidelityMapQGcm,
            Experiment::FidelityMapGacGcm,
            Experiment::TimeEvolution,
            Experiment::Stability,
            Experiment::Wigner,
        ]
        .into_iter()
        .find(|e| e.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergeSettings {
    /// Absolute change allowed in every target observable.
    pub tol: f64,
    pub start: usize,
    pub max: usize,
}

impl Default for ConvergeSettings {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            start: 2,
            max: 30,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveSettings {
    pub t_final: f64,
    pub n_samples: usize,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for EvolveSettings {
    fn default() -> Self {
        Self {
            t_final: 200.0,
            n_samples: 101,
            rtol: 1e-6,
            atol: 1e-9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WignerSettings {
    /// Grid covers `[−extent, extent]²` in the complex plane.
    pub extent: f64,
    pub points: usize,
}

impl Default for WignerSettings {
    fn default() -> Self {
        Self {
            extent: 3.0,
            points: 61,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Sweeps {
    pub q: Option<Vec<f64>>,
    pub r: Option<Vec<f64>>,
    pub g_cm: Option<Vec<f64>>,
    pub g_ac: Option<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub experiment: Option<Experiment>,
    pub params: SystemParams,
    pub bath: Option<SqueezedBathParams>,
    pub spec: HilbertSpec,
    /// Run the cutoff convergence loop for every grid point.
    pub auto_cutoff: bool,
    pub sweeps: Sweeps,
    pub solver: SteadyStateOptions,
    pub converge: ConvergeSettings,
    pub evolve: EvolveSettings,
    pub wigner: WignerSettings,
    pub output: Option<PathBuf>,
    /// Every key exactly as written, for the metadata echo.
    pub entries: BTreeMap<String, String>,
}

impl ExperimentConfig {
    pub fn scheme(&self) -> Scheme {
        match self.bath {
            Some(b) => Scheme::SqueezedBath(b),
            None => Scheme::CoherentPump,
        }
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        text.parse()
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, ConfigError> {
    let x = match v {
        "pi" => PI,
        "-pi" => -PI,
        _ => v
            .parse::<f64>()
            .map_err(|_| value_error(key, format!("expected a number, got '{v}'")))?,
    };
    if !x.is_finite() {
        return Err(value_error(key, "must be finite"));
    }
    Ok(x)
}

fn parse_usize(key: &str, v: &str) -> Result<usize, ConfigError> {
    v.parse()
        .map_err(|_| value_error(key, format!("expected a non-negative integer, got '{v}'")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(value_error(key, format!("expected true or false, got '{v}'"))),
    }
}

pub fn parse_range(key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    let values = if v.contains(':') {
        let parts: Vec<&str> = v.split(':').map(str::trim).collect();
        let (log, parts) = match parts.as_slice() {
            [a, b, n] => (false, [*a, *b, *n]),
            [a, b, n, "log"] => (true, [*a, *b, *n]),
            _ => return Err(value_error(key, "expected start:stop:count or start:stop:count:log")),
        };
        let (start, stop) = (parse_f64(key, parts[0])?, parse_f64(key, parts[1])?);
        let count = parse_usize(key, parts[2])?;
        if count < 2 {
            return Err(value_error(key, "sweep count must be at least 2"));
        }
        let frac = |i: usize| i as f64 / (count - 1) as f64;
        if log {
            if start <= 0.0 || stop <= 0.0 {
                return Err(value_error(key, "log ranges need positive ends"));
            }
            (0..count).map(|i| start * (stop / start).powf(frac(i))).collect()
        } else {
            (0..count).map(|i| start + (stop - start) * frac(i)).collect()
        }
    } else {
        let list = v
            .split(',')
            .map(|s| parse_f64(key, s.trim()))
            .collect::<Result<Vec<_>, _>>()?;
        if list.len() < 2 {
            return Err(value_error(key, "a value list needs at least two entries"));
        }
        list
    };
    Ok(values)
}

impl std::str::FromStr for ExperimentConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: idx + 1,
                    message: format!("expected 'key = value', got '{line}'"),
                });
            };
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                return Err(ConfigError::Syntax {
                    line: idx + 1,
                    message: "empty key or value".into(),
                });
            }
            if entries.insert(k.to_owned(), v.to_owned()).is_some() {
                return Err(ConfigError::Syntax {
                    line: idx + 1,
                    message: format!("duplicate key '{k}'"),
                });
            }
        }
        Self::from_entries(entries)
    }
}

impl ExperimentConfig {
    fn from_entries(entries: BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let get = |k: &str| entries.get(k).map(String::as_str);

        let experiment = get("experiment")
            .map(|v| Experiment::parse(v).ok_or_else(|| value_error("experiment", format!("unknown experiment '{v}'"))))
            .transpose()?;

        let bath = match (get("bath.r"), get("bath.theta")) {
            (None, None) => None,
            (r, theta) => {
                let r = r.map(|v| parse_f64("bath.r", v)).transpose()?.unwrap_or(0.0);
                let theta = theta.map(|v| parse_f64("bath.theta", v)).transpose()?.unwrap_or(PI);
                Some(SqueezedBathParams::new(r, theta).map_err(|e| value_error("bath", e.to_string()))?)
            }
        };
        let uses_bath = bath.is_some()
            || entries.contains_key("sweep.r")
            || entries.contains_key("sweep.g_ac")
            || matches!(experiment, Some(Experiment::SweepR | Experiment::FidelityMapGacGcm));
        let bath = if uses_bath && bath.is_none() {
            Some(SqueezedBathParams::new(0.0, PI).expect("valid default"))
        } else {
            bath
        };

        let preset = get("params.preset").unwrap_or(if uses_bath { "bath" } else { "coherent" });
        let mut params = match preset {
            "coherent" => SystemParams::coherent_pump(0.01, 0.01),
            "bath" => SystemParams::squeezed_bath(0.01),
            other => return Err(value_error("params.preset", format!("unknown preset '{other}'"))),
        };

        let mut spec_dims = (12, 12);
        let mut auto_cutoff = false;
        let mut sweeps = Sweeps::default();
        let mut solver = SteadyStateOptions::default();
        let mut converge = ConvergeSettings::default();
        let mut evolve = EvolveSettings::default();
        let mut wigner = WignerSettings::default();
        let mut output = None;

        for (k, v) in &entries {
            let (k, v) = (k.as_str(), v.as_str());
            match k {
                "experiment" | "params.preset" | "bath.r" | "bath.theta" => {}
                "params.g_ac" => params.g_ac = parse_f64(k, v)?,
                "params.g_cm" => params.g_cm = parse_f64(k, v)?,
                "params.q" => params.q = parse_f64(k, v)?,
                "params.e1" => params.e1 = parse_f64(k, v)?,
                "params.e2" => params.e2 = parse_f64(k, v)?,
                "params.gamma10" => params.gamma10 = parse_f64(k, v)?,
                "params.gamma21" => params.gamma21 = parse_f64(k, v)?,
                "params.kappa_a" => params.kappa_a = parse_f64(k, v)?,
                "params.kappa_b" => params.kappa_b = parse_f64(k, v)?,
                "params.include_k" => params.include_k = parse_bool(k, v)?,
                "spec.cavity_dim" => spec_dims.0 = parse_usize(k, v)?,
                "spec.mech_dim" => spec_dims.1 = parse_usize(k, v)?,
                "spec.auto" => auto_cutoff = parse_bool(k, v)?,
                "sweep.q" => sweeps.q = Some(parse_range(k, v)?),
                "sweep.r" => sweeps.r = Some(parse_range(k, v)?),
                "sweep.g_cm" => sweeps.g_cm = Some(parse_range(k, v)?),
                "sweep.g_ac" => sweeps.g_ac = Some(parse_range(k, v)?),
                "solver.method" => {
                    solver.method = match v {
                        "direct" => SteadyStateMethod::DirectLu,
                        "krylov" => SteadyStateMethod::IterativeKrylov,
                        _ => return Err(value_error(k, "expected 'direct' or 'krylov'")),
                    }
                }
                "solver.residual_tol" => solver.residual_tol = parse_f64(k, v)?,
                "solver.max_iterations" => solver.max_iterations = parse_usize(k, v)?,
                "converge.tol" => converge.tol = parse_f64(k, v)?,
                "converge.start" => converge.start = parse_usize(k, v)?,
                "converge.max" => converge.max = parse_usize(k, v)?,
                "evolve.t_final" => evolve.t_final = parse_f64(k, v)?,
                "evolve.n_samples" => evolve.n_samples = parse_usize(k, v)?,
                "evolve.rtol" => evolve.rtol = parse_f64(k, v)?,
                "evolve.atol" => evolve.atol = parse_f64(k, v)?,
                "wigner.extent" => wigner.extent = parse_f64(k, v)?,
                "wigner.points" => wigner.points = parse_usize(k, v)?,
                "output.path" => output = Some(PathBuf::from(v)),
                _ => return Err(value_error(k, "unknown key")),
            }
        }

        params.validate().map_err(|e| value_error("params", e.to_string()))?;
        let spec = HilbertSpec::new(spec_dims.0, spec_dims.1).map_err(|e| value_error("spec", e.to_string()))?;
        if solver.residual_tol <= 0.0 {
            return Err(value_error("solver.residual_tol", "must be positive"));
        }
        if converge.start < 2 || converge.max < converge.start || converge.tol <= 0.0 {
            return Err(value_error("converge", "need 2 <= start <= max and tol > 0"));
        }
        if wigner.points < 2 || wigner.extent <= 0.0 {
            return Err(value_error("wigner", "need points >= 2 and extent > 0"));
        }
        for (name, values) in [("sweep.q", &sweeps.q), ("sweep.r", &sweeps.r), ("sweep.g_cm", &sweeps.g_cm), ("sweep.g_ac", &sweeps.g_ac)] {
            if values.as_ref().is_some_and(|v| v.iter().any(|x| *x < 0.0)) {
                return Err(value_error(name, "values must be non-negative"));
            }
        }

        Ok(Self {
            experiment,
            params,
            bath,
            spec,
            auto_cutoff,
            sweeps,
            solver,
            converge,
            evolve,
            wigner,
            output,
            entries,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_file() {
        let cfg: ExperimentConfig = "
            # pump sweep
            experiment = sweep-q
            params.g_ac = 100
            params.g_cm = 0.01   # optomechanical coupling
            sweep.q = 0.001:0.05:25
            sweep.g_cm = 0.001, 0.005, 0.01
            spec.cavity_dim = 8
            spec.mech_dim = 10
            solver.method = direct
        "
        .parse()
        .unwrap();
        assert_eq!(cfg.experiment, Some(Experiment::SweepQ));
        assert_eq!(cfg.spec, HilbertSpec::new(8, 10).unwrap());
        let q = cfg.sweeps.q.as_ref().unwrap();
        assert_eq!(q.len(), 25);
        assert_eq!(q[0], 0.001);
        assert!((q[24] - 0.05).abs() < 1e-15);
        assert_eq!(cfg.sweeps.g_cm.as_deref(), Some(&[0.001, 0.005, 0.01][..]));
        assert_eq!(cfg.solver.method, SteadyStateMethod::DirectLu);
        assert_eq!(cfg.scheme(), Scheme::CoherentPump);
        assert_eq!(cfg.params.kappa_b, 0.002);
        assert_eq!(cfg.entries["params.g_cm"], "0.01");
    }

    #[test]
    fn bath_keys_select_bath_preset() {
        let cfg: ExperimentConfig = "bath.r = 0.3\nbath.theta = pi".parse().unwrap();
        assert_eq!(cfg.params.kappa_b, 0.2);
        assert_eq!(cfg.params.q, 0.0);
        assert!(matches!(cfg.scheme(), Scheme::SqueezedBath(b) if b.r == 0.3 && b.theta == PI));

        for text in ["experiment = sweep-r", "sweep.r = 0:0.5:6", "sweep.g_ac = 50, 100"] {
            let cfg: ExperimentConfig = text.parse().unwrap();
            assert!(matches!(cfg.scheme(), Scheme::SqueezedBath(b) if b.r == 0.0), "{text}");
            assert_eq!(cfg.params.kappa_b, 0.2);
        }
    }

    #[test]
    fn log_ranges() {
        let v = parse_range("k", "0.001:0.1:3:log").unwrap();
        assert!((v[1] - 0.01).abs() < 1e-15);
        assert!(parse_range("k", "0:1:3:log").is_err());
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in [
            "params.g_ac 100",
            "params.nope = 1",
            "sweep.q = 0:1:1",
            "sweep.q = 0.5",
            "spec.cavity_dim = 1",
            "params.q = -1",
            "experiment = sweep-z",
            "params.q = 1\nparams.q = 2",
            "solver.residual_tol = 0",
        ] {
            assert!(bad.parse::<ExperimentConfig>().is_err(), "{bad}");
        }
    }
}
