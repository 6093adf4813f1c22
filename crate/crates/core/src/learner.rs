//! Learners: deterministic maps from a training sample (and a seed) to a
//! generative model over the content domain.

use std::sync::Arc;

use crate::domain::{ensure_same, ContentDomain, Dataset, DiscreteDistribution};
use crate::error::{check_param, Result};

pub trait Learner: Send + Sync {
    fn name(&self) -> &str;

    /// Must return the identical distribution for identical `(sample, seed)`.
    fn train(&self, sample: &Dataset, seed: u64) -> Result<DiscreteDistribution>;
}

/// Add-`λ` smoothed empirical distribution,
/// `(count(z) + λ) / (|S| + λ|Z|)`. `λ = 0` memorizes the sample.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalLearner {
    lambda: f64,
}

impl EmpiricalLearner {
    pub fn new(lambda: f64) -> Result<Self> {
        check_param(
            "lambda",
            lambda,
            lambda >= 0.0 && lambda.is_finite(),
            "must be finite and non-negative",
        )?;
        Ok(EmpiricalLearner { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl Learner for EmpiricalLearner {
    fn name(&self) -> &str {
        "empirical"
    }

    fn train(&self, sample: &Dataset, _seed: u64) -> Result<DiscreteDistribution> {
        let domain = sample.domain().clone();
        let denom = sample.len() as f64 + self.lambda * domain.len() as f64;
        if denom == 0.0 {
            // λ = 0 on an empty sample: nothing to memorize
            return Ok(DiscreteDistribution::uniform(domain));
        }
        let weights = sample
            .counts()
            .into_iter()
            .map(|c| (c as f64 + self.lambda) / denom)
            .collect();
        DiscreteDistribution::new(domain, weights)
    }
}

/// Ignores its input and always returns the same model.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantLearner {
    model: DiscreteDistribution,
}

impl ConstantLearner {
    pub fn new(model: DiscreteDistribution) -> Self {
        ConstantLearner { model }
    }

    pub fn domain(&self) -> &Arc<ContentDomain> {
        self.model.domain()
    }
}

impl Learner for ConstantLearner {
    fn name(&self) -> &str {
        "constant"
    }

    fn train(&self, sample: &Dataset, _seed: u64) -> Result<DiscreteDistribution> {
        ensure_same(sample.domain(), self.model.domain())?;
        Ok(self.model.clone())
    }
}
