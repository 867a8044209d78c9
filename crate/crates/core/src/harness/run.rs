use std::collections::BTreeMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::config::{DataSource, ExperimentConfig, FileSource, Scheme, ValidationPolicy};
use super::report::{AgentSummary, PointRecord, ReplicationSummary, Report, SchemeSummary, Stat, Timings};
use crate::baselines::{
    cv_adaptive_weights, cv_static_weights, mean_average, mse_average_weights, tau_average_weights,
    WeightVector,
};
use crate::consensus::consensus_predict;
use crate::data::{Dataset, QueryPoint};
use crate::datagen::{
    generate_synthetic, lambda_schedule, partition, read_dataset, sample_mixture, stream_rng,
    tabular_surrogate, SyntheticConfig, VALIDATION_STREAM,
};
use crate::ensemble::{Agent, Ensemble};
use crate::error::{Error, Result};
use crate::jackknife::jackknife_se;
use crate::models::Model;
use crate::trust::{build_trust_matrix, TrustConfig};

// Named sub-streams of a replication seed.
const SPLIT_STREAM: u64 = 11;
const PARTITION_STREAM: u64 = 12;
const SURROGATE_STREAM: u64 = 13;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `rep` under `master`. Depends on nothing else, so every
/// point of a sweep sees the same data draws.
pub fn replication_seed(master: u64, rep: usize) -> u64 {
    splitmix64(master ^ splitmix64(rep as u64 + 1))
}

fn derive(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream.wrapping_mul(0xD1B5_4A32_D192_ED03)))
}

struct Source {
    file_data: Option<Dataset>,
    note: Option<String>,
}

fn prepare(cfg: &ExperimentConfig) -> Result<Source> {
    match &cfg.data {
        DataSource::Synthetic(_) => Ok(Source {
            file_data: None,
            note: None,
        }),
        DataSource::File(f) => load_file(f, cfg.seed).map(|(d, note)| Source {
            file_data: Some(d),
            note,
        }),
    }
}

fn load_file(f: &FileSource, master: u64) -> Result<(Dataset, Option<String>)> {
    if !f.path.exists() {
        if let Some(n) = f.surrogate_if_missing {
            let data = tabular_surrogate(n, derive(master, SURROGATE_STREAM))?;
            let note = format!(
                "{} not found; using generated tabular surrogate with {n} samples",
                f.path.display()
            );
            return Ok((data, Some(note)));
        }
    }
    Ok((read_dataset(&f.path, f.format, f.label_column)?, None))
}

struct Split {
    agents: Vec<Dataset>,
    validation: Option<Dataset>,
    test: Dataset,
    alpha: Option<Vec<f64>>,
}

fn split_synthetic(s: &SyntheticConfig, cfg: &ExperimentConfig, seed: u64) -> Result<Split> {
    let s = SyntheticConfig { seed, ..s.clone() };
    let data = generate_synthetic(&s)?;
    let n_val = match cfg.validation {
        ValidationPolicy::OnePartition => s.samples_per_agent,
        ValidationPolicy::Fixed(n) => n,
    };
    let validation = if n_val > 0 {
        Some(sample_mixture(&s, n_val, true, VALIDATION_STREAM)?)
    } else {
        None
    };
    Ok(Split {
        agents: data.agents,
        validation,
        test: data.test,
        alpha: Some(s.alpha.clone()),
    })
}

/// Shuffles once, then takes test, validation and training blocks in that
/// order; the training block is partitioned across agents.
fn split_file(data: &Dataset, f: &FileSource, cfg: &ExperimentConfig, k: usize, seed: u64) -> Result<Split> {
    let n = data.len();
    let n_test = cfg.test.size(n);
    let rest = n.saturating_sub(n_test);
    let n_val = match cfg.validation {
        ValidationPolicy::OnePartition => rest / (k + 1),
        ValidationPolicy::Fixed(v) => v,
    };
    if n_test == 0 || rest < n_val + k {
        return Err(Error::Config(format!(
            "{n} samples cannot supply {n_test} test, {n_val} validation and {k} partitions"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream_rng(seed, SPLIT_STREAM));
    let test = data.select(&order[..n_test])?;
    let validation = if n_val > 0 {
        Some(data.select(&order[n_test..n_test + n_val])?)
    } else {
        None
    };
    let train = data.select(&order[n_test + n_val..])?;
    let scheme = crate::datagen::PartitionScheme {
        seed: derive(seed ^ f.partition.seed, PARTITION_STREAM),
        ..f.partition
    };
    Ok(Split {
        agents: partition(&train, k, &scheme)?,
        validation,
        test,
        alpha: None,
    })
}

struct PointContext<'a> {
    ensemble: &'a Ensemble<Model>,
    validation: Option<&'a Dataset>,
    static_weights: Option<WeightVector>,
    cfg: &'a ExperimentConfig,
    trust: TrustConfig,
}

struct PointEval {
    agent_predictions: Vec<f64>,
    predictions: BTreeMap<Scheme, f64>,
    weights: Option<Vec<f64>>,
    se: Option<f64>,
    consensus_converged: bool,
}

fn evaluate_point(ctx: &PointContext<'_>, x: &QueryPoint) -> Result<PointEval> {
    let cfg = ctx.cfg;
    let preds = ctx.ensemble.predictions(x)?;
    let needs_trust = cfg.jackknife
        || cfg
            .schemes
            .iter()
            .any(|s| matches!(s, Scheme::Degroot | Scheme::TauAvg | Scheme::MseAvg));
    let trust = if needs_trust {
        Some(build_trust_matrix(ctx.ensemble, x, &ctx.trust)?)
    } else {
        None
    };
    let mut out = PointEval {
        agent_predictions: preds.clone(),
        predictions: BTreeMap::new(),
        weights: None,
        se: None,
        consensus_converged: true,
    };
    let models = ctx.ensemble.models();
    for &scheme in &cfg.schemes {
        let p = match scheme {
            Scheme::Degroot => {
                let (t, _) = trust.as_ref().expect("trust built");
                let r = consensus_predict(&preds, t, &cfg.consensus)?;
                out.consensus_converged = r.converged;
                out.weights = Some(r.weights);
                r.prediction
            }
            Scheme::MAvg => mean_average(&preds)?,
            Scheme::CvStatic => ctx
                .static_weights
                .as_ref()
                .ok_or_else(|| Error::Config("cv-static needs a validation set".into()))?
                .combine(&preds)?,
            Scheme::CvAdaptive => {
                let v = ctx
                    .validation
                    .ok_or_else(|| Error::Config("cv-adaptive needs a validation set".into()))?;
                cv_adaptive_weights(&models, v, x, ctx.trust.neighbors, cfg.mse_floor)?.combine(&preds)?
            }
            Scheme::TauAvg => tau_average_weights(&trust.as_ref().expect("trust built").0)?.combine(&preds)?,
            Scheme::MseAvg => {
                mse_average_weights(&trust.as_ref().expect("trust built").1, cfg.mse_floor)?.combine(&preds)?
            }
        };
        if !p.is_finite() {
            return Err(Error::Numerical(format!("{scheme} produced a non-finite prediction")));
        }
        out.predictions.insert(scheme, p);
    }
    if cfg.jackknife {
        let (t, _) = trust.as_ref().expect("trust built");
        out.se = Some(jackknife_se(&preds, t, &cfg.consensus)?.standard_error);
    }
    Ok(out)
}

struct ReplicationOutcome {
    summary: ReplicationSummary,
    points: Vec<PointRecord>,
    neighbors: usize,
    dimension: usize,
}

fn run_replication(
    cfg: &ExperimentConfig,
    source: &Source,
    k: usize,
    rep: usize,
    timings: &mut Timings,
) -> Result<ReplicationOutcome> {
    let seed = replication_seed(cfg.seed, rep);
    let clock = Instant::now();
    let split = match (&cfg.data, &source.file_data) {
        (DataSource::Synthetic(s), _) => split_synthetic(s, cfg, seed)?,
        (DataSource::File(f), Some(data)) => split_file(data, f, cfg, k, seed)?,
        (DataSource::File(_), None) => unreachable!("file data is loaded in prepare"),
    };
    timings.add("split", clock.elapsed().as_secs_f64());

    let clock = Instant::now();
    let lambdas = match &cfg.lambda_rule {
        Some(rule) => lambda_schedule(rule, k)?,
        None => vec![cfg.model.lambda; k],
    };
    let fitted = split
        .agents
        .par_iter()
        .zip(&lambdas)
        .map(|(data, &lambda)| cfg.model.with_lambda(lambda).fit(data))
        .collect::<Result<Vec<_>>>()?;
    let non_converged_models = fitted.iter().filter(|f| !f.converged).count();
    let agents: Vec<Agent<Model>> = split
        .agents
        .into_iter()
        .zip(fitted)
        .map(|(data, f)| Agent { data, model: f.model })
        .collect();
    let ensemble = Ensemble::new(agents)?;
    timings.add("fit", clock.elapsed().as_secs_f64());

    let n_local = ensemble.agents().iter().map(|a| a.data.len()).min().unwrap_or(0);
    let trust = TrustConfig {
        neighbors: cfg.neighbors.resolve(n_local),
        mse_floor: cfg.mse_floor,
    };
    let static_weights = match (&split.validation, cfg.schemes.contains(&Scheme::CvStatic)) {
        (Some(v), true) => Some(cv_static_weights(&ensemble.models(), v, cfg.mse_floor)?),
        _ => None,
    };
    let ctx = PointContext {
        ensemble: &ensemble,
        validation: split.validation.as_ref(),
        static_weights,
        cfg,
        trust,
    };

    let clock = Instant::now();
    let test = &split.test;
    let evals: Vec<(QueryPoint, Result<PointEval>)> = (0..test.len())
        .into_par_iter()
        .map(|i| {
            let x = QueryPoint::from_view(test.row(i)).expect("dataset rows are finite");
            let e = evaluate_point(&ctx, &x);
            (x, e)
        })
        .collect();
    timings.add("evaluate", clock.elapsed().as_secs_f64());

    let mut points = Vec::with_capacity(evals.len());
    let mut sq_sums: BTreeMap<Scheme, f64> = BTreeMap::new();
    let mut agent_sums = vec![0.0; k];
    let mut ok = 0usize;
    let mut non_converged_consensus = 0;
    for (i, (x, eval)) in evals.into_iter().enumerate() {
        let label = test.labels()[i];
        let xi = split
            .alpha
            .as_ref()
            .map(|a| a.iter().zip(x.coordinates()).map(|(a, v)| a * v).sum());
        let mut rec = PointRecord {
            replication: rep,
            index: i,
            x: x.coordinates().to_vec(),
            xi,
            label,
            agent_predictions: Vec::new(),
            predictions: BTreeMap::new(),
            squared_errors: BTreeMap::new(),
            degroot_weights: None,
            standard_error: None,
            error: None,
        };
        match eval {
            Ok(e) => {
                ok += 1;
                if !e.consensus_converged {
                    non_converged_consensus += 1;
                }
                for (s, &p) in &e.predictions {
                    let se = (p - label) * (p - label);
                    *sq_sums.entry(*s).or_insert(0.0) += se;
                    rec.squared_errors.insert(*s, se);
                }
                for (sum, p) in agent_sums.iter_mut().zip(&e.agent_predictions) {
                    *sum += (p - label) * (p - label);
                }
                rec.agent_predictions = e.agent_predictions;
                rec.predictions = e.predictions;
                rec.degroot_weights = e.weights;
                rec.standard_error = e.se;
            }
            Err(err) => rec.error = Some(err.to_string()),
        }
        points.push(rec);
    }
    if ok == 0 {
        return Err(Error::Numerical(format!(
            "replication {rep}: every test point failed"
        )));
    }
    let mse = sq_sums.into_iter().map(|(s, v)| (s, v / ok as f64)).collect();
    let agent_mse = agent_sums.into_iter().map(|v| v / ok as f64).collect();
    Ok(ReplicationOutcome {
        summary: ReplicationSummary {
            index: rep,
            seed,
            test_points: test.len(),
            failed_points: test.len() - ok,
            non_converged_models,
            non_converged_consensus,
            mse,
            agent_mse,
            error: None,
        },
        points,
        neighbors: trust.neighbors,
        dimension: test.dim(),
    })
}

fn gain(reference: f64, other: f64) -> f64 {
    100.0 * (reference - other) / reference
}

/// Runs every replication of `cfg` and aggregates the results.
///
/// Replications that fail numerically are recorded and skipped; if all of them
/// fail the run returns [`Error::Numerical`]. Configuration and IO problems are
/// returned immediately.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let k = cfg.agent_count()?;
    let mut timings = Timings::default();
    let clock = Instant::now();
    let source = prepare(cfg)?;
    timings.add("prepare", clock.elapsed().as_secs_f64());

    let mut reps = Vec::with_capacity(cfg.replications);
    let mut points = Vec::new();
    let mut neighbors = None;
    let mut dimension = source.file_data.as_ref().map(|d| d.dim());
    let mut last_err = None;
    for rep in 0..cfg.replications {
        match run_replication(cfg, &source, k, rep, &mut timings) {
            Ok(o) => {
                neighbors.get_or_insert(o.neighbors);
                dimension.get_or_insert(o.dimension);
                reps.push(o.summary);
                points.extend(o.points);
            }
            Err(Error::Numerical(msg)) => {
                reps.push(ReplicationSummary {
                    index: rep,
                    seed: replication_seed(cfg.seed, rep),
                    test_points: 0,
                    failed_points: 0,
                    non_converged_models: 0,
                    non_converged_consensus: 0,
                    mse: BTreeMap::new(),
                    agent_mse: Vec::new(),
                    error: Some(msg.clone()),
                });
                last_err = Some(msg);
            }
            Err(e) => return Err(e),
        }
    }
    let succeeded: Vec<&ReplicationSummary> = reps.iter().filter(|r| r.error.is_none()).collect();
    if succeeded.is_empty() {
        return Err(Error::Numerical(format!(
            "all {} replications failed; last error: {}",
            cfg.replications,
            last_err.unwrap_or_default()
        )));
    }

    let per_rep = |s: Scheme| -> Vec<f64> { succeeded.iter().filter_map(|r| r.mse.get(&s).copied()).collect() };
    let has_degroot = cfg.schemes.contains(&Scheme::Degroot);
    let schemes = cfg
        .schemes
        .iter()
        .map(|&s| {
            let gain_vs_degroot = has_degroot.then(|| {
                let g: Vec<f64> = succeeded
                    .iter()
                    .filter_map(|r| Some(gain(*r.mse.get(&Scheme::Degroot)?, *r.mse.get(&s)?)))
                    .collect();
                Stat::of(&g)
            });
            SchemeSummary {
                scheme: s,
                mse: Stat::of(&per_rep(s)),
                gain_vs_degroot: gain_vs_degroot.flatten(),
            }
        })
        .collect();
    let degroot_gain_over_mavg = if has_degroot && cfg.schemes.contains(&Scheme::MAvg) {
        let g: Vec<f64> = succeeded
            .iter()
            .filter_map(|r| Some(gain(*r.mse.get(&Scheme::MAvg)?, *r.mse.get(&Scheme::Degroot)?)))
            .collect();
        Stat::of(&g)
    } else {
        None
    };
    let individual = (0..k)
        .map(|agent| {
            let v: Vec<f64> = succeeded.iter().filter_map(|r| r.agent_mse.get(agent).copied()).collect();
            AgentSummary {
                agent,
                mse: Stat::of(&v),
            }
        })
        .collect();

    Ok(Report {
        config: cfg.clone(),
        seed: cfg.seed,
        agents: k,
        dimension: dimension.unwrap_or(0),
        neighbors: neighbors.unwrap_or(0),
        data_note: source.note,
        schemes,
        degroot_gain_over_mavg,
        individual,
        replications: reps,
        points,
        timings,
    })
}
