use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    /// Sites `x, x+1`.
    TwoSite,
    /// Sites `0..x`.
    LeftHalf,
    /// Sites `x..L`.
    RightHalf,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuenchRow {
    pub t: f64,
    pub x: usize,
    pub probe: ProbeKind,
    pub fidelity: f64,
    /// `⟨Z_x⟩` of the evolved state.
    pub expect_z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaleRow {
    pub window_size: usize,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "F_d")]
    pub f_d: f64,
    #[serde(rename = "dF_dM")]
    pub df_dm: f64,
    pub xi_1: f64,
    pub xi_2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChiRow {
    pub window_size: usize,
    pub chi_a: usize,
    pub chi_b: usize,
    #[serde(rename = "one_minus_F")]
    pub one_minus_f: f64,
    #[serde(rename = "one_minus_Fd")]
    pub one_minus_fd: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TtnRow {
    pub iteration: usize,
    pub window_size: usize,
    /// `F^(1/|M|)`.
    #[serde(rename = "per_site_F")]
    pub per_site_f: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Rows {
    Quench(Vec<QuenchRow>),
    ScaleCompare(Vec<ScaleRow>),
    ConvergenceChi(Vec<ChiRow>),
    ConvergenceTtn(Vec<TtnRow>),
}

impl Rows {
    pub fn len(&self) -> usize {
        match self {
            Rows::Quench(r) => r.len(),
            Rows::ScaleCompare(r) => r.len(),
            Rows::ConvergenceChi(r) => r.len(),
            Rows::ConvergenceTtn(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub seeds: Vec<u64>,
    pub version: String,
    pub created_unix_secs: u64,
}

impl Provenance {
    pub fn new(seeds: Vec<u64>) -> Self {
        let created_unix_secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Self { seeds, version: env!("CARGO_PKG_VERSION").into(), created_unix_secs }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub parameters: serde_json::Value,
    pub rows: Rows,
    /// Derived quantities that do not fit the CSV schema.
    pub diagnostics: serde_json::Value,
    pub warnings: Vec<String>,
    pub provenance: Provenance,
}

#[derive(Serialize)]
struct Metadata<'a> {
    experiment: &'a str,
    parameters: &'a serde_json::Value,
    rows: usize,
    diagnostics: &'a serde_json::Value,
    warnings: &'a [String],
    provenance: &'a Provenance,
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

impl ExperimentRecord {
    /// Rows only; contents depend on inputs and seeds alone.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        match &self.rows {
            Rows::Quench(r) => write_rows(path, r),
            Rows::ScaleCompare(r) => write_rows(path, r),
            Rows::ConvergenceChi(r) => write_rows(path, r),
            Rows::ConvergenceTtn(r) => write_rows(path, r),
        }
    }

    /// Parameters, warnings and provenance as JSON.
    pub fn write_metadata(&self, path: &Path) -> Result<()> {
        let meta = Metadata {
            experiment: &self.experiment,
            parameters: &self.parameters,
            rows: self.rows.len(),
            diagnostics: &self.diagnostics,
            warnings: &self.warnings,
            provenance: &self.provenance,
        };
        let mut text = serde_json::to_string_pretty(&meta)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    /// CSV at `path` plus a `.json` sidecar next to it.
    pub fn write(&self, path: &Path) -> Result<()> {
        self.write_csv(path)?;
        self.write_metadata(&path.with_extension("json"))
    }
}

/// Derivative of `f` with respect to `m` at every sample: centered
/// differences inside, one-sided at the ends. Zero for a single sample.
pub fn discrete_derivative(m: &[usize], f: &[f64]) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|i| {
            if n < 2 {
                return 0.0;
            }
            let (lo, hi) = (i.saturating_sub(1), (i + 1).min(n - 1));
            (f[hi] - f[lo]) / (m[hi] as f64 - m[lo] as f64)
        })
        .collect()
}
