//! Stability-based private histogram.
//!
//! Counts of symbols present in the sample get two-sided geometric noise with
//! ratio `e^{-ε/2}` (replacing one item moves two counts by one, so the count
//! vector has L1 sensitivity 2). Noisy frequencies below
//! `τ = 2·ln(2/δ)/(εk) + 1/k` are suppressed, which bounds the probability of
//! revealing a symbol held by a single record by `δ/2`. Symbols absent from
//! the sample always release 0.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::symmetric_dp_beta;
use crate::domain::{ContentDomain, Dataset, DiscreteDistribution};
use crate::error::{check_param, Error, Result};
use crate::seeds;

/// Two-sided geometric law `P(g) = (1−r)/(1+r) · r^|g|` on the integers.
#[derive(Clone, Copy, Debug)]
pub struct TwoSidedGeometric {
    ratio: f64,
    one_sided: Geometric,
}

impl TwoSidedGeometric {
    /// Noise calibrated to `ε`-DP for integer queries of L1 sensitivity 2.
    pub fn for_epsilon(epsilon: f64) -> Result<Self> {
        check_param(
            "epsilon",
            epsilon,
            epsilon > 0.0 && epsilon.is_finite(),
            "must be positive and finite",
        )?;
        Self::with_ratio((-epsilon / 2.0).exp())
    }

    pub fn with_ratio(ratio: f64) -> Result<Self> {
        check_param("ratio", ratio, ratio > 0.0 && ratio < 1.0, "must lie in (0, 1)")?;
        Ok(TwoSidedGeometric {
            ratio,
            one_sided: Geometric::new(1.0 - ratio).expect("success probability in (0, 1)"),
        })
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn pmf(&self, g: i64) -> f64 {
        let r = self.ratio;
        (1.0 - r) / (1.0 + r) * r.powi(g.unsigned_abs().min(i32::MAX as u64) as i32)
    }

    /// `P(|G| > bound)`.
    pub fn tail_beyond(&self, bound: u64) -> f64 {
        let r = self.ratio;
        2.0 * r.powf(bound as f64 + 1.0) / (1.0 + r)
    }

    /// Smallest `B` with `P(|G| > B) ≤ tail`.
    pub fn truncation_bound(&self, tail: f64) -> u64 {
        let mut bound = 0;
        while self.tail_beyond(bound) > tail {
            bound += 1;
        }
        bound
    }
}

impl Distribution<i64> for TwoSidedGeometric {
    // The difference of two i.i.d. failure counts is two-sided geometric.
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let a = self.one_sided.sample(rng) as i64;
        let b = self.one_sided.sample(rng) as i64;
        a - b
    }
}

/// Suppression threshold `τ = 2·ln(2/δ)/(εk) + 1/k` on noisy frequencies.
pub fn threshold_tau(epsilon: f64, delta: f64, k: usize) -> f64 {
    2.0 * (2.0 / delta).ln() / (epsilon * k as f64) + 1.0 / k as f64
}

/// Released value for a noisy count: `clamp(n/k, 0, 1)` if `n/k ≥ τ`, else 0.
pub fn release_value(noisy_count: i64, k: usize, tau: f64) -> f64 {
    let value = noisy_count as f64 / k as f64;
    if value >= tau {
        value.clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Output of [`private_histogram`].
#[derive(Clone, Debug, PartialEq)]
pub struct NoisyHistogram {
    domain: Arc<ContentDomain>,
    values: Vec<f64>,
    pub epsilon: f64,
    pub delta: f64,
    pub k: usize,
    pub tau: f64,
}

impl NoisyHistogram {
    pub fn domain(&self) -> &Arc<ContentDomain> {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `max_z |a(z) − freq_S(z)|`.
    pub fn linf_error(&self, sample: &Dataset) -> f64 {
        let k = sample.len() as f64;
        self.values
            .iter()
            .zip(sample.counts())
            .map(|(&a, c)| (a - c as f64 / k).abs())
            .fold(0.0, f64::max)
    }
}

impl Serialize for NoisyHistogram {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let values: BTreeMap<&str, f64> = self
            .domain
            .symbols()
            .iter()
            .map(String::as_str)
            .zip(self.values.iter().copied())
            .collect();
        let mut s = serializer.serialize_struct("NoisyHistogram", 5)?;
        s.serialize_field("epsilon", &self.epsilon)?;
        s.serialize_field("delta", &self.delta)?;
        s.serialize_field("k", &self.k)?;
        s.serialize_field("tau", &self.tau)?;
        s.serialize_field("values", &values)?;
        s.end()
    }
}

fn check_privacy(epsilon: f64, delta: f64) -> Result<()> {
    check_param(
        "epsilon",
        epsilon,
        epsilon > 0.0 && epsilon.is_finite(),
        "must be positive and finite",
    )?;
    check_param("delta", delta, delta > 0.0 && delta < 1.0, "must lie in (0, 1)")
}

/// `(ε, δ)`-DP histogram of `sample` under replacement of one item.
pub fn private_histogram(sample: &Dataset, epsilon: f64, delta: f64, seed: u64) -> Result<NoisyHistogram> {
    check_privacy(epsilon, delta)?;
    if sample.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let k = sample.len();
    let tau = threshold_tau(epsilon, delta, k);
    let noise = TwoSidedGeometric::for_epsilon(epsilon)?;
    let mut rng = seeds::rng(seed);
    let values = sample
        .counts()
        .into_iter()
        .map(|count| {
            if count == 0 {
                0.0
            } else {
                release_value(count as i64 + noise.sample(&mut rng), k, tau)
            }
        })
        .collect();
    Ok(NoisyHistogram {
        domain: sample.domain().clone(),
        values,
        epsilon,
        delta,
        k,
        tau,
    })
}

/// Exact law of the released vector, keyed by `k·a(z)` per symbol.
/// Noise values with `|g|` beyond the truncation bound are dropped, so the
/// total mass falls short of one by at most `|Z| · tail`.
pub type OutputLaw = BTreeMap<Vec<u64>, f64>;

pub fn histogram_output_law(counts: &[usize], epsilon: f64, delta: f64, tail: f64) -> Result<OutputLaw> {
    check_privacy(epsilon, delta)?;
    let k: usize = counts.iter().sum();
    if k == 0 {
        return Err(Error::EmptyDataset);
    }
    let tau = threshold_tau(epsilon, delta, k);
    let noise = TwoSidedGeometric::for_epsilon(epsilon)?;
    let bound = noise.truncation_bound(tail) as i64;

    let mut joint: OutputLaw = BTreeMap::from([(Vec::new(), 1.0)]);
    for &count in counts {
        let mut marginal: BTreeMap<u64, f64> = BTreeMap::new();
        if count == 0 {
            marginal.insert(0, 1.0);
        } else {
            for g in -bound..=bound {
                let value = release_value(count as i64 + g, k, tau);
                let key = (value * k as f64).round() as u64;
                *marginal.entry(key).or_default() += noise.pmf(g);
            }
        }
        let mut next = BTreeMap::new();
        for (prefix, p) in &joint {
            for (&key, &q) in &marginal {
                let mut out = prefix.clone();
                out.push(key);
                *next.entry(out).or_default() += p * q;
            }
        }
        joint = next;
    }
    Ok(joint)
}

/// Result of [`audit_histogram`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistogramAudit {
    pub k: usize,
    pub domain_size: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub neighbor_pairs: usize,
    pub worst_beta: f64,
    pub worst_pair: (Vec<usize>, Vec<usize>),
}

impl HistogramAudit {
    pub fn passes(&self) -> bool {
        self.worst_beta <= self.delta
    }
}

/// Exhaustive privacy audit: for every sample in `Z^k` and every
/// single-position replacement, computes the symmetric `β` at `α = ε`
/// between the exact output laws.
pub fn audit_histogram(k: usize, domain_size: usize, epsilon: f64, delta: f64, tail: f64) -> Result<HistogramAudit> {
    check_param("k", k as f64, k >= 1, "must be at least 1")?;
    check_param(
        "domain_size",
        domain_size as f64,
        domain_size >= 1,
        "must be at least 1",
    )?;
    let total = domain_size.checked_pow(k as u32).ok_or(Error::DomainTooLarge {
        size: domain_size,
        max: 1,
    })?;

    let counts_of = |seq: &[usize]| {
        let mut c = vec![0usize; domain_size];
        for &z in seq {
            c[z] += 1;
        }
        c
    };
    let decode = |mut code: usize| {
        (0..k)
            .map(|_| {
                let z = code % domain_size;
                code /= domain_size;
                z
            })
            .collect::<Vec<_>>()
    };

    let mut laws: BTreeMap<Vec<usize>, OutputLaw> = BTreeMap::new();
    let mut law_for = |counts: Vec<usize>| -> Result<OutputLaw> {
        if let Some(law) = laws.get(&counts) {
            return Ok(law.clone());
        }
        let law = histogram_output_law(&counts, epsilon, delta, tail)?;
        laws.insert(counts, law.clone());
        Ok(law)
    };

    let mut worst_beta = 0.0;
    let mut worst_pair = (Vec::new(), Vec::new());
    let mut pairs = 0;
    for code in 0..total {
        let seq = decode(code);
        let law = law_for(counts_of(&seq))?;
        for pos in 0..k {
            for replacement in 0..domain_size {
                if replacement == seq[pos] {
                    continue;
                }
                let mut neighbor = seq.clone();
                neighbor[pos] = replacement;
                let neighbor_law = law_for(counts_of(&neighbor))?;
                let (p, p_prime) = laws_on_common_domain(&law, &neighbor_law)?;
                let beta = symmetric_dp_beta(&p, &p_prime, epsilon)?;
                pairs += 1;
                if beta > worst_beta || worst_pair.0.is_empty() {
                    worst_beta = beta;
                    worst_pair = (seq.clone(), neighbor);
                }
            }
        }
    }
    Ok(HistogramAudit {
        k,
        domain_size,
        epsilon,
        delta,
        neighbor_pairs: pairs,
        worst_beta,
        worst_pair,
    })
}

fn laws_on_common_domain(a: &OutputLaw, b: &OutputLaw) -> Result<(DiscreteDistribution, DiscreteDistribution)> {
    let keys: Vec<&Vec<u64>> = {
        let mut keys: Vec<&Vec<u64>> = a.keys().chain(b.keys()).collect();
        keys.sort();
        keys.dedup();
        keys
    };
    let domain = ContentDomain::new(keys.iter().map(|k| format!("{k:?}")))?;
    let weights = |law: &OutputLaw| keys.iter().map(|k| law.get(*k).copied().unwrap_or(0.0)).collect();
    Ok((
        DiscreteDistribution::new(domain.clone(), weights(a))?,
        DiscreteDistribution::new(domain, weights(b))?,
    ))
}
