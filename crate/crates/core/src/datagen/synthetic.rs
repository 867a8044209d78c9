use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::stream_rng;
use crate::data::Dataset;
use crate::error::{Error, Result};

/// Stream used for the noiseless test sample.
pub const TEST_STREAM: u64 = 1 << 32;
/// Stream used for a noisy validation sample from the mixture.
pub const VALIDATION_STREAM: u64 = (1 << 32) + 1;

/// Gaussian agents over a logistic labeling surface.
///
/// Agent `k` draws features from `N(agent_means[k], agent_cov_scale * I)` and
/// labels `1 / (1 + exp(alpha . x))` plus `N(0, label_noise_sd^2)` noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticConfig {
    pub agent_means: Vec<Vec<f64>>,
    pub agent_cov_scale: f64,
    pub alpha: Vec<f64>,
    pub label_noise_sd: f64,
    pub samples_per_agent: usize,
    pub test_samples: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            agent_means: vec![
                vec![-3.0, -4.0],
                vec![-2.0, -2.0],
                vec![-1.0, -1.0],
                vec![0.0, 0.0],
                vec![3.0, 2.0],
            ],
            agent_cov_scale: 1.0,
            alpha: vec![1.0, 1.0],
            label_noise_sd: 0.1,
            samples_per_agent: 200,
            test_samples: 200,
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    pub fn agents(&self) -> usize {
        self.agent_means.len()
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 {
            return Err(Error::Config("alpha must be non-empty".into()));
        }
        if self.agent_means.is_empty() {
            return Err(Error::Config("at least one agent mean is required".into()));
        }
        if self.agent_means.iter().any(|m| m.len() != d) {
            return Err(Error::Config(format!("every agent mean must have dimension {d}")));
        }
        if !(self.agent_cov_scale > 0.0 && self.agent_cov_scale.is_finite()) {
            return Err(Error::Config("agent_cov_scale must be > 0".into()));
        }
        if !(self.label_noise_sd >= 0.0 && self.label_noise_sd.is_finite()) {
            return Err(Error::Config("label_noise_sd must be >= 0".into()));
        }
        if self.samples_per_agent == 0 || self.test_samples == 0 {
            return Err(Error::Config("sample counts must be positive".into()));
        }
        let all_finite = self
            .agent_means
            .iter()
            .flatten()
            .chain(&self.alpha)
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::Config("means and alpha must be finite".into()));
        }
        Ok(())
    }
}

/// Noiseless label `1 / (1 + exp(alpha . x))`.
pub fn logistic_label(alpha: &[f64], x: &[f64]) -> f64 {
    let xi: f64 = alpha.iter().zip(x).map(|(a, v)| a * v).sum();
    1.0 / (1.0 + xi.exp())
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub agents: Vec<Dataset>,
    /// Drawn from the uniform mixture of agent distributions, noiseless labels.
    pub test: Dataset,
}

fn draw_point(cfg: &SyntheticConfig, agent: usize, rng: &mut ChaCha20Rng, out: &mut [f64]) {
    let sd = cfg.agent_cov_scale.sqrt();
    for (o, m) in out.iter_mut().zip(&cfg.agent_means[agent]) {
        let z: f64 = StandardNormal.sample(rng);
        *o = m + sd * z;
    }
}

fn draw_label(cfg: &SyntheticConfig, x: &[f64], noisy: bool, rng: &mut ChaCha20Rng) -> f64 {
    let y = logistic_label(&cfg.alpha, x);
    if noisy && cfg.label_noise_sd > 0.0 {
        let z: f64 = StandardNormal.sample(rng);
        y + cfg.label_noise_sd * z
    } else {
        y
    }
}

fn agent_sample(cfg: &SyntheticConfig, agent: usize) -> Result<Dataset> {
    let mut rng = stream_rng(cfg.seed, agent as u64);
    let (n, d) = (cfg.samples_per_agent, cfg.dim());
    let mut x = Array2::zeros((n, d));
    let mut y = Array1::zeros(n);
    for i in 0..n {
        let mut row = x.row_mut(i);
        let row = row.as_slice_mut().expect("standard layout");
        draw_point(cfg, agent, &mut rng, row);
        y[i] = draw_label(cfg, row, true, &mut rng);
    }
    Dataset::new(x, y)
}

/// `n` points from the uniform mixture of the agent distributions, drawn on
/// `stream` of the config seed.
pub fn sample_mixture(cfg: &SyntheticConfig, n: usize, noisy: bool, stream: u64) -> Result<Dataset> {
    cfg.validate()?;
    let mut rng = stream_rng(cfg.seed, stream);
    let d = cfg.dim();
    let mut x = Array2::zeros((n, d));
    let mut y = Array1::zeros(n);
    for i in 0..n {
        let agent = rng.random_range(0..cfg.agents());
        let mut row = x.row_mut(i);
        let row = row.as_slice_mut().expect("standard layout");
        draw_point(cfg, agent, &mut rng, row);
        y[i] = draw_label(cfg, row, noisy, &mut rng);
    }
    Dataset::new(x, y)
}

/// Per-agent training sets (agent `k` on stream `k`) and a noiseless test set
/// on [`TEST_STREAM`].
pub fn generate_synthetic(cfg: &SyntheticConfig) -> Result<SyntheticData> {
    cfg.validate()?;
    let agents = (0..cfg.agents())
        .map(|k| agent_sample(cfg, k))
        .collect::<Result<Vec<_>>>()?;
    let test = sample_mixture(cfg, cfg.test_samples, false, TEST_STREAM)?;
    Ok(SyntheticData { agents, test })
}

/// A tabular stand-in for the abalone regression task, used when the real
/// file is unavailable.
///
/// Eight positively correlated size-like features are driven by a latent size
/// `s ~ U(0.05, 1)`; the integer-valued label grows nonlinearly in `s`, so
/// locally fitted linear models disagree across the label range.
pub fn tabular_surrogate(n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::invalid("surrogate needs at least one sample"));
    }
    let mut rng = stream_rng(seed, 0);
    let loadings = [0.9, 0.75, 0.3, 1.6, 0.7, 0.35, 0.45, 0.5];
    let powers = [1.0, 1.0, 1.0, 3.0, 3.0, 3.0, 3.0, 0.5];
    let mut x = Array2::zeros((n, loadings.len()));
    let mut y = Array1::zeros(n);
    for i in 0..n {
        let s: f64 = rng.random_range(0.05..1.0);
        for j in 0..loadings.len() {
            let z: f64 = StandardNormal.sample(&mut rng);
            x[[i, j]] = loadings[j] * s.powf(powers[j]) * (1.0 + 0.08 * z);
        }
        let z: f64 = StandardNormal.sample(&mut rng);
        let rings = 2.0 + 8.0 * s + 14.0 * s.powi(4) + (0.6 + 1.5 * s) * z;
        y[i] = rings.round().clamp(1.0, 29.0);
    }
    Dataset::new(x, y)
}
