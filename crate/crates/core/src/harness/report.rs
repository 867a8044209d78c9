use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Scheme};
use crate::error::{Error, Result};
use crate::metrics::mean_std;

/// Mean and one sample standard deviation over replications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Stat> {
        let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        if finite.is_empty() {
            return None;
        }
        let (mean, std) = mean_std(&finite);
        Some(Stat { mean, std })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSummary {
    pub scheme: Scheme,
    pub mse: Option<Stat>,
    /// `100 * (MSE_degroot - MSE_scheme) / MSE_degroot`; positive means the
    /// scheme beats DeGroot.
    pub gain_vs_degroot: Option<Stat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSummary {
    pub agent: usize,
    pub mse: Option<Stat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationSummary {
    pub index: usize,
    pub seed: u64,
    pub test_points: usize,
    pub failed_points: usize,
    pub non_converged_models: usize,
    pub non_converged_consensus: usize,
    pub mse: BTreeMap<Scheme, f64>,
    pub agent_mse: Vec<f64>,
    /// Numerical failure that aborted this replication.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub replication: usize,
    pub index: usize,
    pub x: Vec<f64>,
    /// `alpha . x` for synthetic data.
    pub xi: Option<f64>,
    pub label: f64,
    pub agent_predictions: Vec<f64>,
    pub predictions: BTreeMap<Scheme, f64>,
    pub squared_errors: BTreeMap<Scheme, f64>,
    pub degroot_weights: Option<Vec<f64>>,
    pub standard_error: Option<f64>,
    pub error: Option<String>,
}

/// Wall-clock seconds per phase. Kept out of the JSON report so that reports
/// stay byte-identical across runs; written to `timings.json` instead.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub phases: BTreeMap<String, f64>,
}

impl Timings {
    pub fn add(&mut self, phase: &str, secs: f64) {
        *self.phases.entry(phase.to_string()).or_insert(0.0) += secs;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub agents: usize,
    pub dimension: usize,
    pub neighbors: usize,
    /// Set when the data differs from what the config names, e.g. a surrogate
    /// replacing a missing file.
    pub data_note: Option<String>,
    pub schemes: Vec<SchemeSummary>,
    /// `100 * (MSE_mavg - MSE_degroot) / MSE_mavg`.
    pub degroot_gain_over_mavg: Option<Stat>,
    pub individual: Vec<AgentSummary>,
    pub replications: Vec<ReplicationSummary>,
    pub points: Vec<PointRecord>,
    #[serde(skip)]
    pub timings: Timings,
}

impl Report {
    pub fn scheme(&self, s: Scheme) -> Option<&SchemeSummary> {
        self.schemes.iter().find(|x| x.scheme == s)
    }

    pub fn mse_mean(&self, s: Scheme) -> Option<f64> {
        self.scheme(s).and_then(|x| x.mse).map(|m| m.mean)
    }

    /// Agent with the lowest mean test MSE.
    pub fn best_individual(&self) -> Option<(usize, f64)> {
        self.individual
            .iter()
            .filter_map(|a| a.mse.map(|m| (a.agent, m.mean)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Report> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("scheme,mse_mean,mse_std,gain_vs_degroot_mean,gain_vs_degroot_std\n");
        for s in &self.schemes {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                s.scheme,
                opt(s.mse.map(|m| m.mean)),
                opt(s.mse.map(|m| m.std)),
                opt(s.gain_vs_degroot.map(|m| m.mean)),
                opt(s.gain_vs_degroot.map(|m| m.std)),
            ));
        }
        out
    }

    /// One row per test point and replication.
    pub fn points_csv(&self) -> String {
        let schemes: Vec<Scheme> = self.schemes.iter().map(|s| s.scheme).collect();
        let mut cols = vec!["replication".to_string(), "index".to_string()];
        cols.extend((1..=self.dimension).map(|j| format!("x{j}")));
        cols.extend(["xi".to_string(), "label".to_string()]);
        for s in &schemes {
            cols.push(format!("{s}_pred"));
            cols.push(format!("{s}_sqerr"));
        }
        cols.push("standard_error".into());
        cols.extend((1..=self.agents).map(|k| format!("w{k}")));
        cols.push("error".into());
        let mut out = cols.join(",");
        out.push('\n');
        for p in &self.points {
            let mut row = vec![p.replication.to_string(), p.index.to_string()];
            row.extend(p.x.iter().map(f64::to_string));
            row.push(opt(p.xi));
            row.push(p.label.to_string());
            for s in &schemes {
                row.push(opt(p.predictions.get(s).copied()));
                row.push(opt(p.squared_errors.get(s).copied()));
            }
            row.push(opt(p.standard_error));
            match &p.degroot_weights {
                Some(w) => row.extend(w.iter().map(f64::to_string)),
                None => row.extend(std::iter::repeat_n(String::new(), self.agents)),
            }
            row.push(p.error.as_deref().unwrap_or("").replace([',', '\n'], ";"));
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Json,
    Csv,
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf> {
    let mut f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    f.write_all(contents.as_bytes())
        .map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes one report under `dir` with file names prefixed by `stem`. JSON
/// produces `<stem>.json`; CSV produces `<stem>_points.csv` and
/// `<stem>_summary.csv`. Phase timings always go to `<stem>_timings.json`.
pub fn emit_report(report: &Report, dir: &Path, stem: &str, format: OutputFormat) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    match format {
        OutputFormat::Json => {
            written.push(write(dir.join(format!("{stem}.json")), &report.to_json())?);
        }
        OutputFormat::Csv => {
            written.push(write(dir.join(format!("{stem}_points.csv")), &report.points_csv())?);
            written.push(write(dir.join(format!("{stem}_summary.csv")), &report.summary_csv())?);
        }
    }
    let timings = serde_json::to_string_pretty(&report.timings).expect("timings serialize");
    written.push(write(dir.join(format!("{stem}_timings.json")), &timings)?);
    Ok(written)
}
