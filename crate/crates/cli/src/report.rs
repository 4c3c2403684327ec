use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use birkhoff_spectra::SeedRecord;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

/// One thresholded check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    /// `None` when the measured value is not finite; such criteria fail.
    pub value: Option<f64>,
    pub threshold: String,
    pub pass: bool,
}

impl Criterion {
    fn new(value: f64, threshold: String, pass: bool) -> Self {
        let finite = value.is_finite();
        Self {
            value: finite.then_some(value),
            threshold,
            pass: pass && finite,
        }
    }

    pub fn below(value: f64, limit: f64) -> Self {
        Self::new(value, format!("< {limit}"), value < limit)
    }

    pub fn at_most(value: f64, limit: f64) -> Self {
        Self::new(value, format!("<= {limit}"), value <= limit)
    }

    pub fn above(value: f64, limit: f64) -> Self {
        Self::new(value, format!("> {limit:e}"), value > limit)
    }

    pub fn within(value: f64, lo: f64, hi: f64) -> Self {
        Self::new(value, format!("in [{lo}, {hi}]"), (lo..=hi).contains(&value))
    }
}

/// Everything that must be reproducible from the config alone.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Statistics {
    pub seeds: Vec<SeedRecord>,
    pub per_sample: BTreeMap<String, Vec<f64>>,
    pub aggregate: BTreeMap<String, f64>,
    pub criteria: BTreeMap<String, Criterion>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub wall_clock_secs: f64,
    pub workers: usize,
    pub versions: BTreeMap<String, String>,
}

/// A CSV file written next to the report.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub file_name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: String,
    pub config: ExperimentConfig,
    pub statistics: Statistics,
    pub run: RunInfo,
    #[serde(skip)]
    pub artifacts: Vec<Artifact>,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.statistics.pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        action: "writing",
        path: path.to_path_buf(),
        source,
    })
}

/// Write `report.json` and every artifact into `out_dir`, creating it if
/// needed. Returns the report path.
pub fn write_report(report: &ExperimentReport, out_dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir).map_err(|source| CliError::Io {
        action: "creating",
        path: out_dir.to_path_buf(),
        source,
    })?;
    for a in &report.artifacts {
        let path = out_dir.join(&a.file_name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|source| CliError::Io {
                action: "creating",
                path: parent.to_path_buf(),
                source,
            })?;
        }
        write_file(&path, &a.contents)?;
    }
    let path = out_dir.join("report.json");
    write_file(&path, &report.to_json())?;
    Ok(path)
}

pub fn read_report(path: &Path) -> Result<ExperimentReport> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        action: "reading report",
        path: path.to_path_buf(),
        source,
    })?;
    ExperimentReport::from_json(&text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_values_fail() {
        let c = Criterion::below(f64::NAN, 1.0);
        assert_eq!(c.value, None);
        assert!(!c.pass);
        assert!(!Criterion::above(f64::INFINITY, 0.0).pass);
    }

    #[test]
    fn thresholds() {
        assert!(Criterion::below(0.5, 1.0).pass);
        assert!(!Criterion::below(1.0, 1.0).pass);
        assert!(Criterion::at_most(1.0, 1.0).pass);
        assert!(Criterion::within(2.5, 1.5, 2.5).pass);
        assert!(!Criterion::within(2.6, 1.5, 2.5).pass);
    }
}
