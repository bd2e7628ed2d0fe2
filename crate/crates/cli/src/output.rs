//! Result tables, CSV rendering and the JSON metadata sidecar.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flag {
    Ok,
    /// Semiclassical drift has an eigenvalue with non-negative real part.
    Unstable,
    /// The cutoff loop hit its cap before the observables settled.
    Unconverged,
    /// The solver returned an error; numeric columns are NaN.
    Failed,
    /// Eigenvalue test and closed criterion give different verdicts.
    Disagree,
}

impl Flag {
    pub fn as_str(self) -> &'static str {
        match self {
            Flag::Ok => "ok",
            Flag::Unstable => "unstable",
            Flag::Unconverged => "unconverged",
            Flag::Failed => "failed",
            Flag::Disagree => "disagree",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub values: Vec<f64>,
    pub flag: Flag,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, values: Vec<f64>, flag: Flag) {
        assert_eq!(values.len(), self.columns.len(), "row width must match the header");
        self.rows.push(Row { values, flag });
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r.values[idx]).collect())
    }

    pub fn flagged(&self) -> usize {
        self.rows.iter().filter(|r| r.flag != Flag::Ok).count()
    }

    /// Header plus one line per row, numbers as `{:.12e}`, trailing `flag` column.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push_str(",flag\n");
        for row in &self.rows {
            for v in &row.values {
                write!(out, "{v:.12e},").expect("writing to a String cannot fail");
            }
            out.push_str(row.flag.as_str());
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Serialize)]
pub struct Metadata {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub experiment: String,
    pub config: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: usize,
    pub flagged_rows: usize,
    /// Largest steady-state residual among the rows, if any were solved.
    pub max_residual: Option<f64>,
    /// Distinct `[cavity_dim, mech_dim]` pairs used.
    pub cutoffs: Vec<[usize; 2]>,
    pub threads: usize,
    pub wall_time_s: f64,
    pub details: Value,
}

/// Sidecar path for a CSV output: the same path with a `.json` extension.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn write_outputs(csv: &Path, table: &Table, meta: &Metadata) -> io::Result<PathBuf> {
    if let Some(dir) = csv.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(csv, table.to_csv())?;
    let json = sidecar_path(csv);
    let text = serde_json::to_string_pretty(meta).map_err(io::Error::other)?;
    std::fs::write(&json, text + "\n")?;
    Ok(json)
}
