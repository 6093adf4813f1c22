use std::sync::Arc;

use anyhow::Result;
use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};
use stability_lab::dp::{audit_histogram, symmetric_dp_beta};
use stability_lab::naf::{censorship_report, naf_report, nfl_witness, verify_nfl_grid};
use stability_lab::report::extended;
use stability_lab::transform::{dp_transform_traced, prop1_experiment, Prop1Settings};
use stability_lab::tv::{min_envelope, MAX_ENUMERATION_SIZE};
use stability_lab::{
    dp_beta, dp_beta_event_form, private_histogram, seeds, tv_distance, tv_event_form, ContentDomain, Dataset,
    TransformConfig,
};

use crate::config::{require, require_range, ConfigError, LoadedConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Subcommand {
    Tv,
    NafCheck,
    NflCheck,
    Censorship,
    DpBeta,
    Hist,
    Transform,
    Prop1,
    Ingest,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Tv => "tv",
            Subcommand::NafCheck => "naf-check",
            Subcommand::NflCheck => "nfl-check",
            Subcommand::Censorship => "censorship",
            Subcommand::DpBeta => "dp-beta",
            Subcommand::Hist => "hist",
            Subcommand::Transform => "transform",
            Subcommand::Prop1 => "prop1",
            Subcommand::Ingest => "ingest",
        }
    }
}

/// Rows written by `--csv`.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

pub struct Outcome {
    pub result: Value,
    /// False when an assertion-style check failed (exit code 2).
    pub passed: bool,
    pub table: Option<Table>,
}

impl Outcome {
    fn ok(result: Value) -> Self {
        Outcome {
            result,
            passed: true,
            table: None,
        }
    }
}

#[derive(Serialize)]
struct Ext(#[serde(serialize_with = "extended")] f64);

pub fn run(cmd: Subcommand, loaded: &LoadedConfig, seed: u64) -> Result<Outcome> {
    let name = cmd.name();
    match cmd {
        Subcommand::Tv => tv(loaded, name),
        Subcommand::NafCheck => naf_check(loaded, name, seed),
        Subcommand::NflCheck => nfl_check(loaded, name),
        Subcommand::Censorship => censorship(loaded, name, seed),
        Subcommand::DpBeta => dp_beta_curve(loaded, name),
        Subcommand::Hist => hist(loaded, name, seed),
        Subcommand::Transform => transform(loaded, name, seed),
        Subcommand::Prop1 => prop1(loaded, name, seed),
        Subcommand::Ingest => ingest(loaded, name),
    }
}

fn tv(loaded: &LoadedConfig, name: &str) -> Result<Outcome> {
    let c = &loaded.config;
    let q1 = loaded.required_distribution(&c.q1, "q1", name, None)?;
    let q2 = loaded.required_distribution(&c.q2, "q2", name, Some(q1.domain()))?;
    let value = tv_distance(&q1, &q2)?;
    let envelope_mass: f64 = min_envelope(&[&q1, &q2])?.iter().sum();
    let event = if q1.len() <= MAX_ENUMERATION_SIZE {
        let (v, e) = tv_event_form(&q1, &q2)?;
        json!({ "value": v, "symbols": e.symbols(q1.domain()) })
    } else {
        Value::Null
    };
    Ok(Outcome::ok(json!({
        "tv": value,
        "event_form": event,
        "envelope_mass": envelope_mass,
    })))
}

fn naf_check(loaded: &LoadedConfig, name: &str, seed: u64) -> Result<Outcome> {
    let c = &loaded.config;
    let p = loaded.required_distribution(&c.p, "p", name, None)?;
    let alpha = require(c.alpha, "alpha", name)?;
    require_range(alpha, "alpha", alpha >= 0.0 && alpha.is_finite(), "finite and >= 0")?;
    let safes = loaded.safes(name, Some(p.domain()), seeds::derive(seed, "safes", 0))?;
    let report = naf_report(&p, &safes, alpha)?;
    let passed = report.is_naf;
    Ok(Outcome {
        result: serde_json::to_value(&report)?,
        passed,
        table: None,
    })
}

fn nfl_check(loaded: &LoadedConfig, name: &str) -> Result<Outcome> {
    let c = &loaded.config;
    let q1 = loaded.required_distribution(&c.q1, "q1", name, None)?;
    let q2 = loaded.required_distribution(&c.q2, "q2", name, Some(q1.domain()))?;
    if let Some(spec) = &c.p {
        let p = loaded.distribution(spec, "p", Some(q1.domain()))?;
        return match nfl_witness(&p, &q1, &q2) {
            Ok(w) => Ok(Outcome::ok(json!({ "mode": "witness", "witness": w }))),
            Err(stability_lab::Error::WitnessNotFound { margin }) => Ok(Outcome {
                result: json!({ "mode": "witness", "witness": null, "best_margin": margin }),
                passed: false,
                table: None,
            }),
            Err(e) => Err(e.into()),
        };
    }
    let denominator = c.grid_denominator.unwrap_or(20);
    if denominator == 0 {
        return Err(ConfigError::new("grid_denominator", "must be positive").into());
    }
    let check = verify_nfl_grid(&q1, &q2, denominator)?;
    let passed = check.passes();
    Ok(Outcome {
        result: json!({ "mode": "grid", "grid_denominator": denominator, "check": check }),
        passed,
        table: None,
    })
}

fn censorship(loaded: &LoadedConfig, name: &str, seed: u64) -> Result<Outcome> {
    let c = &loaded.config;
    let alpha = require(c.alpha, "alpha", name)?;
    require_range(alpha, "alpha", alpha >= 0.0 && alpha.is_finite(), "finite and >= 0")?;
    let domain = match &c.p {
        Some(spec) => Some(loaded.distribution(spec, "p", None)?.domain().clone()),
        None => None,
    };
    let safes = loaded.safes(name, domain.as_ref(), seeds::derive(seed, "safes", 0))?;
    let report = censorship_report(&safes, alpha)?;
    let domain = safes.domain().expect("non-empty assignment").clone();
    let feasibility = stability_lab::feasibility_alpha(&safes)?;
    let table = Table {
        header: vec!["symbol", "allowed"],
        rows: domain
            .symbols()
            .iter()
            .zip(&report.allowed)
            .map(|(s, a)| vec![s.clone(), a.to_string()])
            .collect(),
    };
    Ok(Outcome {
        result: json!({
            "symbols": domain.symbols(),
            "censorship": report,
            "feasibility_alpha": Ext(feasibility),
        }),
        passed: true,
        table: Some(table),
    })
}

fn dp_beta_curve(loaded: &LoadedConfig, name: &str) -> Result<Outcome> {
    let c = &loaded.config;
    let p = loaded.required_distribution(&c.q1, "q1", name, None)?;
    let p_prime = loaded.required_distribution(&c.q2, "q2", name, Some(p.domain()))?;
    let alphas = match (&c.alphas, c.alpha) {
        (Some(list), _) => list.clone(),
        (None, Some(a)) => vec![a],
        (None, None) => (0..=8).map(|i| i as f64 * 0.25).collect(),
    };
    let mut curve = Vec::with_capacity(alphas.len());
    let mut rows = Vec::with_capacity(alphas.len());
    for (i, &alpha) in alphas.iter().enumerate() {
        require_range(
            alpha,
            &format!("alphas[{i}]"),
            alpha >= 0.0 && alpha.is_finite(),
            "finite and >= 0",
        )?;
        let forward = dp_beta(&p, &p_prime, alpha)?;
        let reverse = dp_beta(&p_prime, &p, alpha)?;
        let symmetric = symmetric_dp_beta(&p, &p_prime, alpha)?;
        let event = if p.len() <= MAX_ENUMERATION_SIZE {
            let (v, e) = dp_beta_event_form(&p, &p_prime, alpha)?;
            json!({ "value": v, "symbols": e.symbols(p.domain()) })
        } else {
            Value::Null
        };
        rows.push(vec![
            alpha.to_string(),
            forward.to_string(),
            reverse.to_string(),
            symmetric.to_string(),
        ]);
        curve.push(json!({
            "alpha": alpha,
            "beta": forward,
            "beta_reverse": reverse,
            "symmetric_beta": symmetric,
            "event_form": event,
        }));
    }
    Ok(Outcome {
        result: json!({ "curve": curve }),
        passed: true,
        table: Some(Table {
            header: vec!["alpha", "beta", "beta_reverse", "symmetric_beta"],
            rows,
        }),
    })
}

/// `corpus` domain if configured, else the `dataset` file's own symbols.
fn sample_with_domain(loaded: &LoadedConfig, name: &str) -> Result<Dataset> {
    let domain: Option<Arc<ContentDomain>> = loaded.corpus()?.map(|(d, _)| d);
    match loaded.dataset(domain.as_ref())? {
        Some(s) => Ok(s),
        None => match loaded.corpus()? {
            Some((_, s)) => Ok(s),
            None => Err(ConfigError::missing("dataset", name).into()),
        },
    }
}

fn privacy(loaded: &LoadedConfig, name: &str) -> Result<(f64, f64)> {
    let dp = loaded
        .config
        .dp
        .clone()
        .ok_or_else(|| ConfigError::missing("dp", name))?;
    let epsilon = require(dp.epsilon, "dp.epsilon", name)?;
    let delta = require(dp.delta, "dp.delta", name)?;
    require_range(
        epsilon,
        "dp.epsilon",
        epsilon > 0.0 && epsilon.is_finite(),
        "epsilon > 0",
    )?;
    require_range(delta, "dp.delta", delta > 0.0 && delta < 1.0, "0 < delta < 1")?;
    Ok((epsilon, delta))
}

fn hist(loaded: &LoadedConfig, name: &str, seed: u64) -> Result<Outcome> {
    let (epsilon, delta) = privacy(loaded, name)?;
    let mut result = serde_json::Map::new();
    let mut passed = true;
    let mut table = None;
    let has_data = loaded.config.dataset.is_some() || loaded.config.corpus.is_some();
    if has_data {
        let sample = sample_with_domain(loaded, name)?;
        let histogram = private_histogram(&sample, epsilon, delta, seeds::derive(seed, "hist", 0))?;
        table = Some(Table {
            header: vec!["symbol", "value"],
            rows: sample
                .domain()
                .symbols()
                .iter()
                .zip(histogram.values())
                .map(|(s, v)| vec![s.clone(), v.to_string()])
                .collect(),
        });
        result.insert("histogram".into(), serde_json::to_value(&histogram)?);
        result.insert("linf_error".into(), json!(histogram.linf_error(&sample)));
    }
    if let Some(audit) = &loaded.config.audit {
        let outcome = audit_histogram(audit.k, audit.domain_size, epsilon, delta, audit.tail)?;
        passed = outcome.passes();
        result.insert("audit".into(), serde_json::to_value(&outcome)?);
    }
    if result.is_empty() {
        return Err(ConfigError::missing("dataset", name).into());
    }
    Ok(Outcome {
        result: Value::Object(result),
        passed,
        table,
    })
}

fn transform_config(loaded: &LoadedConfig, name: &str) -> Result<TransformConfig> {
    let (epsilon, delta) = privacy(loaded, name)?;
    let eta = require(loaded.config.dp.as_ref().and_then(|d| d.eta), "dp.eta", name)?;
    require_range(eta, "dp.eta", eta > 0.0 && eta < 1.0, "0 < eta < 1")?;
    let m = require(loaded.config.m, "m", name)?;
    if m == 0 {
        return Err(ConfigError::new("m", "must be at least 1").into());
    }
    Ok(TransformConfig::new(epsilon, delta, eta, m)?)
}

fn transform(loaded: &LoadedConfig, name: &str, seed: u64) -> Result<Outcome> {
    let config = transform_config(loaded, name)?;
    let c = &loaded.config;
    let sample = if c.dataset.is_some() || c.corpus.is_some() {
        sample_with_domain(loaded, name)?
    } else {
        let data = loaded
            .required_distribution(&c.data_distribution, "data_distribution", name, None)
            .map_err(|_| {
                ConfigError::new(
                    "dataset",
                    format!("`{name}` needs dataset, corpus or data_distribution"),
                )
            })?;
        Dataset::draw(&data, config.m_priv, &mut seeds::rng(seeds::derive(seed, "sample", 0)))
    };
    let learner = loaded.learner(name, Some(sample.domain()))?;
    let trace = dp_transform_traced(
        learner.as_ref(),
        &sample,
        &config,
        seeds::derive(seed, "tape", 0),
        seeds::derive(seed, "noise", 0),
    )?;
    Ok(Outcome::ok(json!({
        "transform_config": config,
        "model": trace.output.to_literal(),
        "projected": trace.projected,
        "histogram": trace.histogram,
    })))
}

fn prop1(loaded: &LoadedConfig, name: &str, seed: u64) -> Result<Outcome> {
    let config = transform_config(loaded, name)?;
    let c = &loaded.config;
    let data = loaded.required_distribution(&c.data_distribution, "data_distribution", name, None)?;
    let learner = loaded.learner(name, Some(data.domain()))?;
    let positive = |v: Option<usize>, path: &str, default: usize| -> Result<usize, ConfigError> {
        match v.unwrap_or(default) {
            0 => Err(ConfigError::new(path, "must be at least 1")),
            n => Ok(n),
        }
    };
    let settings = Prop1Settings {
        outer_trials: positive(c.outer_trials, "outer_trials", 20)?,
        inner_trials: positive(c.inner_trials, "inner_trials", 300)?,
        premise_trials: positive(c.premise_trials.or(c.trials), "premise_trials", 200)?,
        seed,
    };
    let margin = c.margin.unwrap_or(0.0);
    require_range(margin, "margin", margin >= 0.0, "margin >= 0")?;
    let report = prop1_experiment(learner.as_ref(), &data, &config, &settings)?;
    let passed = report.passes(margin);
    let rows = report
        .per_trial_tv
        .iter()
        .enumerate()
        .map(|(i, tv)| vec![i.to_string(), tv.to_string()])
        .collect();
    let mut result = serde_json::to_value(&report)?;
    result["margin"] = json!(margin);
    result["passed"] = json!(passed);
    Ok(Outcome {
        result,
        passed,
        table: Some(Table {
            header: vec!["trial", "tv"],
            rows,
        }),
    })
}

fn ingest(loaded: &LoadedConfig, name: &str) -> Result<Outcome> {
    let (domain, sample) = loaded.corpus()?.ok_or_else(|| ConfigError::missing("corpus", name))?;
    let counts = sample.counts();
    Ok(Outcome {
        result: json!({
            "symbols": domain.symbols(),
            "counts": counts,
            "size": sample.len(),
        }),
        passed: true,
        table: Some(Table {
            header: vec!["symbol", "count"],
            rows: domain
                .symbols()
                .iter()
                .zip(&counts)
                .map(|(s, n)| vec![s.clone(), n.to_string()])
                .collect(),
        }),
    })
}
