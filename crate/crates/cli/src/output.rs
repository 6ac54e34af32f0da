//! CSV and manifest writers.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::RawConfig;
use crate::CliError;

/// 17 significant digits, enough to round-trip an `f64`.
pub fn number(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv(header: &[&str], columns: &[&[f64]]) -> Result<String, CliError> {
    let rows = columns.first().map_or(0, |c| c.len());
    let mut out = header.join(",");
    out.push('\n');
    for i in 0..rows {
        for (j, col) in columns.iter().enumerate() {
            let v = col[i];
            if !v.is_finite() {
                return Err(CliError::Numerical(format!("{} is not finite at row {}", header[j], i + 1)));
            }
            if j > 0 {
                out.push(',');
            }
            write!(out, "{}", number(v)).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledRates {
    pub qubit_a: Vec<f64>,
    pub qubit_b: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config: RawConfig,
    pub rates: Option<SampledRates>,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
    #[serde(default)]
    pub results: serde_json::Value,
}

pub fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn read_manifest(path: &Path) -> Result<Manifest, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}:{}: {e}", path.display(), e.line())))
}
