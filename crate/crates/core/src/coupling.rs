//! Exponential-race coupling of every distribution over a finite domain.
//!
//! A [`CouplingTape`] holds one unit-rate exponential variate `E_z` per
//! symbol. Any distribution `q` is sampled from the same tape as
//! `argmin_{q(z) > 0} E_z / q(z)`, so `E_z / q(z) ~ Exp(q(z))` gives the
//! correct marginal while close distributions usually pick the same symbol:
//! `P(X_q ≠ X_q') ≤ 2·TV/(1 + TV)`.

use std::sync::Arc;

use rand_distr::{Distribution, Exp1};

use crate::domain::{ensure_same, ContentDomain, DiscreteDistribution};
use crate::error::Result;
use crate::exec;
use crate::seeds;

/// Shared randomness for coupled sampling. Built from a domain and a seed
/// only, never from data.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingTape {
    domain: Arc<ContentDomain>,
    variates: Vec<f64>,
    seed: u64,
}

impl CouplingTape {
    pub fn new(domain: Arc<ContentDomain>, seed: u64) -> Self {
        let mut rng = seeds::rng(seed);
        let variates = (0..domain.len())
            .map(|_| loop {
                let e: f64 = Exp1.sample(&mut rng);
                if e > 0.0 && e.is_finite() {
                    break e;
                }
            })
            .collect();
        CouplingTape { domain, variates, seed }
    }

    pub fn domain(&self) -> &Arc<ContentDomain> {
        &self.domain
    }

    pub fn variates(&self) -> &[f64] {
        &self.variates
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Coupled draw `X_q`; ties go to the lowest index.
    pub fn sample(&self, q: &DiscreteDistribution) -> Result<usize> {
        ensure_same(&self.domain, q.domain())?;
        Ok(self.sample_unchecked(q.weights()))
    }

    pub(crate) fn sample_unchecked(&self, weights: &[f64]) -> usize {
        let mut best = usize::MAX;
        let mut best_score = f64::INFINITY;
        for (z, (&e, &w)) in self.variates.iter().zip(weights).enumerate() {
            if w > 0.0 {
                let score = e / w;
                if score < best_score || best == usize::MAX {
                    best = z;
                    best_score = score;
                }
            }
        }
        debug_assert!(best != usize::MAX, "distribution with empty support");
        best
    }
}

/// Free-function form of [`CouplingTape::sample`].
pub fn coupled_sample(tape: &CouplingTape, q: &DiscreteDistribution) -> Result<usize> {
    tape.sample(q)
}

/// Fraction of `n` fresh tapes (seeds `seed, seed+1, …`) on which `q` and
/// `q_prime` are sampled differently.
pub fn disagreement_estimate(
    q: &DiscreteDistribution,
    q_prime: &DiscreteDistribution,
    n: usize,
    seed: u64,
) -> Result<f64> {
    ensure_same(q.domain(), q_prime.domain())?;
    if n == 0 {
        return Ok(0.0);
    }
    let differs = exec::map_indexed(n, |i| {
        let tape = CouplingTape::new(q.domain().clone(), seed.wrapping_add(i as u64));
        tape.sample_unchecked(q.weights()) != tape.sample_unchecked(q_prime.weights())
    });
    Ok(differs.iter().filter(|&&d| d).count() as f64 / n as f64)
}

/// Counts of `X_q` over `n` fresh tapes (seeds `seed, seed+1, …`).
pub fn coupled_counts(q: &DiscreteDistribution, n: usize, seed: u64) -> Vec<u64> {
    let draws = exec::map_indexed(n, |i| {
        CouplingTape::new(q.domain().clone(), seed.wrapping_add(i as u64)).sample_unchecked(q.weights())
    });
    let mut counts = vec![0u64; q.len()];
    for z in draws {
        counts[z] += 1;
    }
    counts
}

/// The pairwise disagreement bound `2t/(1+t)` at total variation `t`.
pub fn coupling_bound(tv: f64) -> f64 {
    2.0 * tv / (1.0 + tv)
}
