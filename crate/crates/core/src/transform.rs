//! Turning an output-stable learner into an `(ε, δ)`-DP one.
//!
//! The private sample is cut into `k` shards of size `m`, a model is trained
//! per shard, each model is sampled once through a single shared
//! [`CouplingTape`], and the private histogram of those `k` draws is
//! projected back onto the simplex within `η` in ℓ∞. Each input item lands
//! in exactly one shard and so moves exactly one histogram entry; everything
//! after the histogram is post-processing.

use std::sync::Arc;

use serde::Serialize;

use crate::coupling::{coupling_bound, CouplingTape};
use crate::domain::{ContentDomain, Dataset, DiscreteDistribution};
use crate::dp::{private_histogram, required_k, DpParams, NoisyHistogram};
use crate::error::{check_param, Error, Result};
use crate::exec;
use crate::learner::Learner;
use crate::seeds;
use crate::tv::tv_distance;

/// Multiple of `η` added to `2α/(1+α)` in the end-to-end bound.
pub const C_ETA: f64 = 5.0;

/// Sizes and privacy parameters of the transformation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TransformConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub eta: f64,
    /// Shard size, i.e. the sample size of the wrapped learner.
    pub m: usize,
    /// Number of shards.
    pub k: usize,
    /// Private sample size `k·m`.
    pub m_priv: usize,
    /// Root seed for the per-shard learner seeds.
    pub learner_seed: u64,
}

impl TransformConfig {
    /// `k = required_k` with failure probability `β = η`.
    pub fn new(epsilon: f64, delta: f64, eta: f64, m: usize) -> Result<Self> {
        let params = DpParams::new(epsilon, delta, eta, eta)?;
        Self::with_shard_count(epsilon, delta, eta, m, required_k(&params))
    }

    /// Explicit shard count, bypassing the accuracy-driven choice of `k`.
    pub fn with_shard_count(epsilon: f64, delta: f64, eta: f64, m: usize, k: usize) -> Result<Self> {
        DpParams::new(epsilon, delta, eta, eta)?;
        check_param("m", m as f64, m >= 1, "must be at least 1")?;
        check_param("k", k as f64, k >= 1, "must be at least 1")?;
        Ok(TransformConfig {
            epsilon,
            delta,
            eta,
            m,
            k,
            m_priv: k * m,
            learner_seed: 0,
        })
    }

    pub fn params(&self) -> DpParams {
        DpParams {
            epsilon: self.epsilon,
            delta: self.delta,
            eta: self.eta,
            beta: self.eta,
        }
    }
}

/// Result of [`simplex_project_linf`].
#[derive(Clone, Debug, PartialEq)]
pub enum Projection {
    Feasible(DiscreteDistribution),
    /// The box `[a − η, a + η] ∩ [0, 1]` misses the simplex.
    Infeasible,
}

impl Projection {
    /// The projected distribution, or uniform when infeasible.
    pub fn or_uniform(self, domain: Arc<ContentDomain>) -> (DiscreteDistribution, bool) {
        match self {
            Projection::Feasible(p) => (p, true),
            Projection::Infeasible => (DiscreteDistribution::uniform(domain), false),
        }
    }
}

/// Finds `p` on the simplex with `|p(z) − a(z)| ≤ η` for all `z`.
///
/// Starts from `a` clipped to `[0, 1]` and moves mass toward the box bounds
/// in index order until the total is one.
pub fn simplex_project_linf(domain: &Arc<ContentDomain>, a: &[f64], eta: f64) -> Result<Projection> {
    check_param("eta", eta, eta > 0.0, "must be positive")?;
    if a.len() != domain.len() {
        return Err(Error::LengthMismatch {
            expected: domain.len(),
            got: a.len(),
        });
    }
    let lower: Vec<f64> = a.iter().map(|&x| (x - eta).max(0.0)).collect();
    let upper: Vec<f64> = a.iter().map(|&x| (x + eta).min(1.0)).collect();
    if lower.iter().sum::<f64>() > 1.0 || upper.iter().sum::<f64>() < 1.0 {
        return Ok(Projection::Infeasible);
    }
    let mut p: Vec<f64> = a
        .iter()
        .zip(lower.iter().zip(&upper))
        .map(|(&x, (&lo, &hi))| x.clamp(0.0, 1.0).clamp(lo, hi))
        .collect();
    let mut excess = p.iter().sum::<f64>() - 1.0;
    if excess.abs() > 1e-12 {
        for z in 0..p.len() {
            let step = if excess > 0.0 {
                excess.min(p[z] - lower[z])
            } else {
                excess.max(p[z] - upper[z])
            };
            p[z] -= step;
            excess -= step;
            if excess == 0.0 {
                break;
            }
        }
    }
    Ok(Projection::Feasible(DiscreteDistribution::new(domain.clone(), p)?))
}

/// Intermediate values of one run of the transformation.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformTrace {
    /// One coupled draw per shard model, in shard order.
    pub coupled: Vec<usize>,
    pub histogram: NoisyHistogram,
    /// False when the projection was infeasible and uniform was used.
    pub projected: bool,
    pub output: DiscreteDistribution,
}

/// Trains the wrapped learner on each of the `k` consecutive shards of size
/// `m` of the private sample.
pub fn fit_shards<L: Learner + ?Sized>(
    learner: &L,
    sample: &Dataset,
    config: &TransformConfig,
) -> Result<Vec<DiscreteDistribution>> {
    if sample.len() != config.m_priv {
        return Err(Error::SizeMismatch {
            expected: config.m_priv,
            got: sample.len(),
        });
    }
    sample
        .shards(config.m)?
        .iter()
        .enumerate()
        .map(|(i, shard)| learner.train(shard, seeds::derive(config.learner_seed, "shard", i as u64)))
        .collect()
}

/// Maps a private histogram to the released model. Depends on the data only
/// through the histogram.
pub fn project_histogram(histogram: &NoisyHistogram, eta: f64) -> Result<(DiscreteDistribution, bool)> {
    Ok(simplex_project_linf(histogram.domain(), histogram.values(), eta)?.or_uniform(histogram.domain().clone()))
}

/// Coupled sampling, private histogram and projection for already-fitted
/// shard models.
pub fn release(
    models: &[DiscreteDistribution],
    config: &TransformConfig,
    tape_seed: u64,
    noise_seed: u64,
) -> Result<TransformTrace> {
    let domain = models.first().ok_or(Error::EmptyList)?.domain().clone();
    let tape = CouplingTape::new(domain.clone(), tape_seed);
    let coupled = models.iter().map(|q| tape.sample(q)).collect::<Result<Vec<_>>>()?;
    let drawn = Dataset::from_indices(domain, coupled.clone())?;
    let histogram = private_histogram(&drawn, config.epsilon, config.delta, noise_seed)?;
    let (output, projected) = project_histogram(&histogram, config.eta)?;
    Ok(TransformTrace {
        coupled,
        histogram,
        projected,
        output,
    })
}

/// Full transformation with its intermediate values.
pub fn dp_transform_traced<L: Learner + ?Sized>(
    learner: &L,
    sample: &Dataset,
    config: &TransformConfig,
    tape_seed: u64,
    noise_seed: u64,
) -> Result<TransformTrace> {
    let models = fit_shards(learner, sample, config)?;
    release(&models, config, tape_seed, noise_seed)
}

/// `(ε, δ)`-DP learner built around `learner`; `sample` must hold `k·m`
/// items.
pub fn dp_transform<L: Learner + ?Sized>(
    learner: &L,
    sample: &Dataset,
    config: &TransformConfig,
    tape_seed: u64,
    noise_seed: u64,
) -> Result<DiscreteDistribution> {
    Ok(dp_transform_traced(learner, sample, config, tape_seed, noise_seed)?.output)
}

/// Mean TV between models trained on two independent `m`-samples from `data`.
pub fn estimate_premise_alpha<L: Learner + ?Sized>(
    learner: &L,
    data: &DiscreteDistribution,
    m: usize,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    Ok(mean(&premise_tvs(learner, data, m, trials, seed)?))
}

fn premise_tvs<L: Learner + ?Sized>(
    learner: &L,
    data: &DiscreteDistribution,
    m: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    check_param("trials", trials as f64, trials >= 1, "must be at least 1")?;
    exec::map_indexed(trials, |t| {
        let t = t as u64;
        let mut rng = seeds::rng(seeds::derive(seed, "premise", t));
        let s1 = Dataset::draw(data, m, &mut rng);
        let s2 = Dataset::draw(data, m, &mut rng);
        let q1 = learner.train(&s1, seeds::derive(seed, "premise-learner", 2 * t))?;
        let q2 = learner.train(&s2, seeds::derive(seed, "premise-learner", 2 * t + 1))?;
        tv_distance(&q1, &q2)
    })
    .into_iter()
    .collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// `2α/(1+α) + C_η·η`.
pub fn prop1_bound(alpha_hat: f64, eta: f64) -> f64 {
    coupling_bound(alpha_hat) + C_ETA * eta
}

/// Trial counts and root seed for [`prop1_experiment`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Prop1Settings {
    pub outer_trials: usize,
    pub inner_trials: usize,
    pub premise_trials: usize,
    pub seed: u64,
}

/// Outcome of [`prop1_experiment`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prop1Report {
    pub config: TransformConfig,
    pub settings: Prop1Settings,
    pub alpha_hat: f64,
    pub c_eta: f64,
    pub bound: f64,
    pub grand_mean: f64,
    /// `TV(mean released model, q^A)` per outer trial.
    pub per_trial_tv: Vec<f64>,
    /// Fraction of runs whose projection fell back to uniform.
    pub fallback_rate: f64,
}

impl Prop1Report {
    pub fn passes(&self, margin: f64) -> bool {
        self.grand_mean <= self.bound + margin
    }
}

/// Compares the averaged output of the private learner against the wrapped
/// learner on a fresh sample, and the result against `2α̂/(1+α̂) + C_η·η`.
///
/// Each outer trial draws `S_A ~ D^m` and `S_B ~ D^{k·m}`; the expected
/// released model on `S_B` is approximated by averaging `inner_trials`
/// runs with fresh tape and noise seeds.
pub fn prop1_experiment<L: Learner + ?Sized>(
    learner: &L,
    data: &DiscreteDistribution,
    config: &TransformConfig,
    settings: &Prop1Settings,
) -> Result<Prop1Report> {
    check_param(
        "outer_trials",
        settings.outer_trials as f64,
        settings.outer_trials >= 1,
        "must be at least 1",
    )?;
    check_param(
        "inner_trials",
        settings.inner_trials as f64,
        settings.inner_trials >= 1,
        "must be at least 1",
    )?;
    let seed = settings.seed;
    let alpha_hat = estimate_premise_alpha(learner, data, config.m, settings.premise_trials, seed)?;
    let domain = data.domain().clone();

    let outer: Vec<Result<(f64, usize)>> = exec::map_indexed(settings.outer_trials, |t| {
        let t = t as u64;
        let mut rng = seeds::rng(seeds::derive(seed, "outer", t));
        let sample_a = Dataset::draw(data, config.m, &mut rng);
        let sample_b = Dataset::draw(data, config.m_priv, &mut rng);
        let reference = learner.train(&sample_a, seeds::derive(seed, "reference-learner", t))?;
        let models = fit_shards(learner, &sample_b, config)?;

        let inner = settings.inner_trials as u64;
        let runs = exec::map_indexed(settings.inner_trials, |j| {
            let run = t * inner + j as u64;
            release(
                &models,
                config,
                seeds::derive(seed, "tape", run),
                seeds::derive(seed, "noise", run),
            )
        });
        let mut sum = vec![0.0; domain.len()];
        let mut fallbacks = 0;
        for run in runs {
            let run = run?;
            fallbacks += usize::from(!run.projected);
            for (s, w) in sum.iter_mut().zip(run.output.weights()) {
                *s += w;
            }
        }
        let mean_model = DiscreteDistribution::from_unnormalized(domain.clone(), sum)?;
        Ok((tv_distance(&mean_model, &reference)?, fallbacks))
    });

    let mut per_trial_tv = Vec::with_capacity(outer.len());
    let mut fallbacks = 0;
    for result in outer {
        let (tv, f) = result?;
        per_trial_tv.push(tv);
        fallbacks += f;
    }
    Ok(Prop1Report {
        config: *config,
        settings: *settings,
        alpha_hat,
        c_eta: C_ETA,
        bound: prop1_bound(alpha_hat, config.eta),
        grand_mean: mean(&per_trial_tv),
        per_trial_tv,
        fallback_rate: fallbacks as f64 / (settings.outer_trials * settings.inner_trials) as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::{ConstantLearner, EmpiricalLearner};

    fn d(n: usize) -> Arc<ContentDomain> {
        ContentDomain::with_size(n).unwrap()
    }

    #[test]
    fn projection_identity() {
        let a = [0.2, 0.3, 0.5];
        match simplex_project_linf(&d(3), &a, 0.05).unwrap() {
            Projection::Feasible(p) => assert_eq!(p.weights(), &a),
            Projection::Infeasible => panic!("feasible input"),
        }
    }

    #[test]
    fn projection_unique_point() {
        match simplex_project_linf(&d(2), &[0.6, 0.6], 0.1).unwrap() {
            Projection::Feasible(p) => {
                assert!((p.prob(0) - 0.5).abs() < 1e-12);
                assert!((p.prob(1) - 0.5).abs() < 1e-12);
            }
            Projection::Infeasible => panic!("feasible input"),
        }
    }

    #[test]
    fn projection_infeasible() {
        assert_eq!(
            simplex_project_linf(&d(2), &[0.0, 0.0], 0.3).unwrap(),
            Projection::Infeasible
        );
        assert_eq!(
            simplex_project_linf(&d(2), &[0.9, 0.9], 0.3).unwrap(),
            Projection::Infeasible
        );
    }

    #[test]
    fn projection_adds_mass_within_box() {
        let a = [0.1, 0.2, 0.3];
        let Projection::Feasible(p) = simplex_project_linf(&d(3), &a, 0.2).unwrap() else {
            panic!("feasible input");
        };
        for (x, y) in p.weights().iter().zip(a) {
            assert!((x - y).abs() <= 0.2 + 1e-12);
        }
    }

    #[test]
    fn config_derives_k_with_beta_eta() {
        let c = TransformConfig::new(1.0, 1e-6, 0.1, 10).unwrap();
        let k = required_k(&DpParams::new(1.0, 1e-6, 0.1, 0.1).unwrap());
        assert_eq!(c.k, k);
        assert_eq!(c.m_priv, k * 10);
    }

    #[test]
    fn size_mismatch_rejected() {
        let config = TransformConfig::with_shard_count(1.0, 1e-3, 0.1, 2, 3).unwrap();
        let s = Dataset::from_indices(d(2), vec![0; 5]).unwrap();
        let learner = EmpiricalLearner::new(0.0).unwrap();
        assert_eq!(
            dp_transform(&learner, &s, &config, 0, 0).unwrap_err(),
            Error::SizeMismatch { expected: 6, got: 5 }
        );
    }

    #[test]
    fn single_shard_pipeline() {
        let config = TransformConfig::with_shard_count(1.0, 1e-3, 0.1, 4, 1).unwrap();
        let s = Dataset::from_indices(d(3), vec![0, 1, 2, 2]).unwrap();
        let trace = dp_transform_traced(&EmpiricalLearner::new(0.0).unwrap(), &s, &config, 5, 6).unwrap();
        assert_eq!(trace.coupled.len(), 1);
        let total: f64 = trace.output.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_learner_concentrates() {
        let q = DiscreteDistribution::new(d(3), vec![0.2, 0.5, 0.3]).unwrap();
        let learner = ConstantLearner::new(q.clone());
        let config = TransformConfig::new(1.0, 1e-6, 0.1, 2).unwrap();
        let s = Dataset::from_indices(d(3), vec![0; config.m_priv]).unwrap();
        for seed in 0..5 {
            let trace = dp_transform_traced(&learner, &s, &config, seed, 100 + seed).unwrap();
            let first = trace.coupled[0];
            assert!(trace.coupled.iter().all(|&x| x == first));
            assert!(trace.output.prob(first) >= 1.0 - config.eta - 1e-12);
        }
    }

    #[test]
    fn reproducible() {
        let config = TransformConfig::with_shard_count(1.0, 1e-3, 0.1, 5, 40).unwrap();
        let mut rng = seeds::rng(1);
        let data = DiscreteDistribution::new(d(4), vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        let s = Dataset::draw(&data, config.m_priv, &mut rng);
        let learner = EmpiricalLearner::new(1.0).unwrap();
        assert_eq!(
            dp_transform(&learner, &s, &config, 3, 4).unwrap(),
            dp_transform(&learner, &s, &config, 3, 4).unwrap()
        );
    }

    #[test]
    fn premise_examples() {
        let data = DiscreteDistribution::uniform(d(2));
        let constant = ConstantLearner::new(data.clone());
        assert_eq!(estimate_premise_alpha(&constant, &data, 5, 50, 0).unwrap(), 0.0);

        // memorizer, m = 1: TV is 1 when the singletons differ (prob ½), else 0
        let memorizer = EmpiricalLearner::new(0.0).unwrap();
        let n = 20_000;
        let est = estimate_premise_alpha(&memorizer, &data, 1, n, 9).unwrap();
        let sigma = (0.25f64 / n as f64).sqrt();
        assert!((est - 0.5).abs() <= 3.0 * sigma, "{est}");
    }

    #[test]
    fn bound_shape() {
        assert_eq!(prop1_bound(0.0, 0.1), 0.5);
        let xs: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        for w in xs.windows(3) {
            let (a, b, c) = (coupling_bound(w[0]), coupling_bound(w[1]), coupling_bound(w[2]));
            assert!(a < b && b < c);
            assert!(b >= (a + c) / 2.0 - 1e-15);
        }
    }

    #[test]
    fn constant_learner_experiment() {
        let data = DiscreteDistribution::new(d(4), vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        let learner = ConstantLearner::new(data.clone());
        let config = TransformConfig::new(1.0, 1e-6, 0.1, 3).unwrap();
        let settings = Prop1Settings {
            outer_trials: 2,
            inner_trials: 200,
            premise_trials: 10,
            seed: 4,
        };
        let report = prop1_experiment(&learner, &data, &config, &settings).unwrap();
        assert_eq!(report.alpha_hat, 0.0);
        assert!(report.grand_mean <= C_ETA * config.eta + 0.05, "{}", report.grand_mean);
        assert!(report.grand_mean <= 1.0);
    }
}
