use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::config::{DataSource, ExperimentConfig, NeighborRule, Scheme};
use super::report::{emit_report, OutputFormat, Report, Stat};
use super::run::run_experiment;
use crate::datagen::HeterogeneityLambdaRule;
use crate::error::{Error, Result};

/// Configuration knob varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    /// Fraction of the training data sorted before partitioning (file data).
    SortFraction,
    /// Exponent `q` of the per-agent lambda schedule.
    LambdaExponent,
    /// Covariance scale of the synthetic agents.
    CovScale,
    /// Local validation size `N`.
    Neighbors,
    /// Number of agents. Synthetic data keeps the first `K` agent means.
    AgentCount,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 5] = [
        SweepAxis::SortFraction,
        SweepAxis::LambdaExponent,
        SweepAxis::CovScale,
        SweepAxis::Neighbors,
        SweepAxis::AgentCount,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::SortFraction => "sort-fraction",
            SweepAxis::LambdaExponent => "lambda-exponent",
            SweepAxis::CovScale => "cov-scale",
            SweepAxis::Neighbors => "neighbors",
            SweepAxis::AgentCount => "agent-count",
        }
    }

    /// Returns a copy of `base` with this axis set to `value`.
    pub fn apply(self, base: &ExperimentConfig, value: f64) -> Result<ExperimentConfig> {
        let mut cfg = base.clone();
        let bad = |what: &str| Error::Config(format!("{} sweep: {what}", self.name()));
        if !value.is_finite() {
            return Err(bad("values must be finite"));
        }
        match self {
            SweepAxis::SortFraction => match &mut cfg.data {
                DataSource::File(f) => {
                    if f.partition.kind == crate::datagen::PartitionKind::Random {
                        f.partition.kind = crate::datagen::PartitionKind::SortedLabel;
                    }
                    f.partition.sort_fraction = value;
                }
                DataSource::Synthetic(_) => return Err(bad("requires file data")),
            },
            SweepAxis::LambdaExponent => {
                let rule = cfg.lambda_rule.get_or_insert(HeterogeneityLambdaRule {
                    base_lambda: base.model.lambda,
                    exponent: 0.0,
                    pivot: 3,
                });
                rule.exponent = value;
            }
            SweepAxis::CovScale => match &mut cfg.data {
                DataSource::Synthetic(s) => s.agent_cov_scale = value,
                DataSource::File(_) => return Err(bad("requires synthetic data")),
            },
            SweepAxis::Neighbors => {
                let n = as_count(value).ok_or_else(|| bad("values must be positive integers"))?;
                cfg.neighbors = NeighborRule::Absolute(n);
            }
            SweepAxis::AgentCount => {
                let k = as_count(value).ok_or_else(|| bad("values must be positive integers"))?;
                match &mut cfg.data {
                    DataSource::Synthetic(s) => {
                        if k > s.agent_means.len() {
                            return Err(bad(&format!(
                                "only {} agent means are defined",
                                s.agent_means.len()
                            )));
                        }
                        s.agent_means.truncate(k);
                        cfg.agents = None;
                    }
                    DataSource::File(_) => cfg.agents = Some(k),
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn as_count(v: f64) -> Option<usize> {
    (v >= 1.0 && v.fract() == 0.0).then_some(v as usize)
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepAxis::ALL
            .into_iter()
            .find(|a| a.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown sweep axis {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub mse: BTreeMap<Scheme, Stat>,
    pub degroot_gain_over_mavg: Option<Stat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
    #[serde(skip)]
    pub reports: Vec<Report>,
}

impl SweepResult {
    pub fn row(&self, value: f64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.value == value)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep serializes")
    }

    /// One row per (value, scheme) with the mean and std of MSE.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("axis,value,scheme,mse_mean,mse_std,gain_over_mavg_mean,gain_over_mavg_std\n");
        for row in &self.rows {
            let (gm, gs) = row
                .degroot_gain_over_mavg
                .map(|g| (g.mean.to_string(), g.std.to_string()))
                .unwrap_or_default();
            for (s, st) in &row.mse {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    self.axis, row.value, s, st.mean, st.std, gm, gs
                ));
            }
        }
        out
    }
}

/// Runs `base` once per value of `axis`. Every value reuses the master seed,
/// so differences between rows come from the axis alone.
pub fn run_sweep(base: &ExperimentConfig, axis: SweepAxis, values: &[f64]) -> Result<SweepResult> {
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    let configs = values
        .iter()
        .map(|&v| axis.apply(base, v))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(values.len());
    let mut reports = Vec::with_capacity(values.len());
    for (cfg, &value) in configs.iter().zip(values) {
        let report = run_experiment(cfg)?;
        rows.push(SweepRow {
            value,
            mse: report
                .schemes
                .iter()
                .filter_map(|s| Some((s.scheme, s.mse?)))
                .collect(),
            degroot_gain_over_mavg: report.degroot_gain_over_mavg,
        });
        reports.push(report);
    }
    Ok(SweepResult { axis, rows, reports })
}

/// Writes each per-value report as `<axis>_<index>` plus a sweep summary
/// (`sweep_summary.json` or `sweep_summary.csv`).
pub fn emit_sweep(result: &SweepResult, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (i, report) in result.reports.iter().enumerate() {
        written.extend(emit_report(report, dir, &format!("{}_{i}", result.axis), format)?);
    }
    let (name, body) = match format {
        OutputFormat::Json => ("sweep_summary.json", result.to_json()),
        OutputFormat::Csv => ("sweep_summary.csv", result.summary_csv()),
    };
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(written)
}
