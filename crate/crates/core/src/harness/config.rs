use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::consensus::ConsensusConfig;
use crate::datagen::{FileFormat, HeterogeneityLambdaRule, PartitionScheme, SyntheticConfig};
use crate::error::{Error, Result};
use crate::models::ModelSpec;

/// Aggregation schemes the harness can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Degroot,
    MAvg,
    CvStatic,
    CvAdaptive,
    TauAvg,
    MseAvg,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::Degroot,
        Scheme::MAvg,
        Scheme::CvStatic,
        Scheme::CvAdaptive,
        Scheme::TauAvg,
        Scheme::MseAvg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Degroot => "degroot",
            Scheme::MAvg => "m-avg",
            Scheme::CvStatic => "cv-static",
            Scheme::CvAdaptive => "cv-adaptive",
            Scheme::TauAvg => "tau-avg",
            Scheme::MseAvg => "mse-avg",
        }
    }

    pub fn needs_validation(self) -> bool {
        matches!(self, Scheme::CvStatic | Scheme::CvAdaptive)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown scheme {s:?}")))
    }
}

/// A dataset file split into agents by a partition scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileSource {
    pub path: PathBuf,
    pub format: FileFormat,
    /// Label column for CSV input; `None` means the last column.
    #[serde(default)]
    pub label_column: Option<usize>,
    #[serde(default)]
    pub partition: PartitionScheme,
    /// When the file does not exist, substitute a generated tabular surrogate
    /// of this many samples and flag it in the report.
    #[serde(default)]
    pub surrogate_if_missing: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum DataSource {
    Synthetic(SyntheticConfig),
    File(FileSource),
}

/// How the local validation size `N` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum NeighborRule {
    Absolute(usize),
    /// `max(min, ceil(fraction * n_local))` with `n_local` the smallest
    /// partition size.
    Fraction { fraction: f64, min: usize },
}

impl NeighborRule {
    pub fn resolve(&self, n_local: usize) -> usize {
        match *self {
            NeighborRule::Absolute(n) => n,
            NeighborRule::Fraction { fraction, min } => {
                min.max((fraction * n_local as f64).ceil() as usize)
            }
        }
    }
}

/// Size of the shared hold-out set used by the CV baselines. It is always
/// carved out, whether or not a CV scheme is selected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum ValidationPolicy {
    /// As many samples as one agent partition.
    OnePartition,
    Fixed(usize),
}

/// Test-set size for file data: `max(fraction * n, min)`, capped at
/// `max_fraction * n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TestPolicy {
    pub fraction: f64,
    pub min: usize,
    pub max_fraction: f64,
}

impl Default for TestPolicy {
    fn default() -> Self {
        TestPolicy {
            fraction: 0.15,
            min: 500,
            max_fraction: 0.5,
        }
    }
}

impl TestPolicy {
    pub fn size(&self, n: usize) -> usize {
        let want = ((self.fraction * n as f64).floor() as usize).max(self.min);
        let cap = (self.max_fraction * n as f64).floor() as usize;
        want.min(cap)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub data: DataSource,
    /// Number of agents. Synthetic data takes it from the agent means.
    pub agents: Option<usize>,
    pub model: ModelSpec,
    /// Per-agent regularization schedule; overrides `model.lambda`.
    pub lambda_rule: Option<HeterogeneityLambdaRule>,
    pub neighbors: NeighborRule,
    pub mse_floor: f64,
    pub consensus: ConsensusConfig,
    pub schemes: Vec<Scheme>,
    pub jackknife: bool,
    pub validation: ValidationPolicy,
    pub test: TestPolicy,
    pub replications: usize,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            data: DataSource::Synthetic(SyntheticConfig::default()),
            agents: None,
            model: ModelSpec::least_squares(),
            lambda_rule: None,
            neighbors: NeighborRule::Fraction {
                fraction: 0.01,
                min: 2,
            },
            mse_floor: 1e-12,
            consensus: ConsensusConfig::default(),
            schemes: vec![Scheme::Degroot, Scheme::MAvg],
            jackknife: false,
            validation: ValidationPolicy::OnePartition,
            test: TestPolicy::default(),
            replications: 1,
            seed: 0,
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Number of agents implied by the config.
    pub fn agent_count(&self) -> Result<usize> {
        match &self.data {
            DataSource::Synthetic(s) => match self.agents {
                Some(k) if k != s.agents() => Err(Error::Config(format!(
                    "agents = {k} but the synthetic config defines {} agent means",
                    s.agents()
                ))),
                _ => Ok(s.agents()),
            },
            DataSource::File(_) => self
                .agents
                .ok_or_else(|| Error::Config("file data requires `agents`".into())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.agent_count()?;
        if k < 2 {
            return Err(Error::Config(format!("need at least 2 agents, got {k}")));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("at least one scheme must be selected".into()));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be >= 1".into()));
        }
        if self.jackknife && k < 3 {
            return Err(Error::Config("jackknife requires at least 3 agents".into()));
        }
        if !(self.mse_floor > 0.0) {
            return Err(Error::Config("mse_floor must be > 0".into()));
        }
        match self.neighbors {
            NeighborRule::Absolute(0) => {
                return Err(Error::Config("neighbors must be >= 1".into()))
            }
            NeighborRule::Fraction { fraction, min } if !(fraction > 0.0) || min == 0 => {
                return Err(Error::Config("neighbor fraction and floor must be positive".into()))
            }
            _ => {}
        }
        if let ValidationPolicy::Fixed(0) = self.validation {
            if self.schemes.iter().any(|s| s.needs_validation()) {
                return Err(Error::Config("CV schemes need a non-empty validation set".into()));
            }
        }
        self.model.validate()?;
        self.consensus.validate()?;
        match &self.data {
            DataSource::Synthetic(s) => s.validate()?,
            DataSource::File(f) => f.partition.validate()?,
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_and_validates() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"replications": 2, "bogus": 1}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"model": {"kind": "ridge", "alpha": 1}}"#).is_err());
        let ok = ExperimentConfig::from_json(r#"{"replications": 2, "schemes": ["degroot", "cv-static"]}"#)
            .unwrap();
        assert_eq!(ok.schemes, vec![Scheme::Degroot, Scheme::CvStatic]);
    }

    #[test]
    fn file_source_needs_agents() {
        let text = r#"{"data": {"file": {"path": "x.txt", "format": "libsvm"}}}"#;
        assert!(ExperimentConfig::from_json(text).is_err());
        let text = r#"{"agents": 5, "data": {"file": {"path": "x.txt", "format": "libsvm",
            "partition": {"kind": "sorted-label", "sort_fraction": 0.5}}},
            "neighbors": {"fraction": {"fraction": 0.01, "min": 2}}}"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(cfg.agent_count().unwrap(), 5);
    }

    #[test]
    fn invalid_values_rejected() {
        for text in [
            r#"{"schemes": []}"#,
            r#"{"replications": 0}"#,
            r#"{"agents": 4}"#,
            r#"{"neighbors": {"absolute": 0}}"#,
            r#"{"consensus": {"max_rounds": 0}}"#,
        ] {
            assert!(ExperimentConfig::from_json(text).is_err(), "{text}");
        }
    }

    #[test]
    fn neighbor_rule_and_test_policy() {
        let rule = NeighborRule::Fraction { fraction: 0.01, min: 2 };
        assert_eq!(rule.resolve(30), 2);
        assert_eq!(rule.resolve(701), 8);
        assert_eq!(NeighborRule::Absolute(5).resolve(10_000), 5);
        let tp = TestPolicy::default();
        assert_eq!(tp.size(4177), 626);
        assert_eq!(tp.size(1000), 500);
        assert_eq!(tp.size(506), 253);
    }

    #[test]
    fn scheme_names() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.name()));
        }
        assert!("avg".parse::<Scheme>().is_err());
    }
}
