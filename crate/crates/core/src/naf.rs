//! Near-access-freeness: safe-model constructions, the `α`-NAF check
//! `p(z) ≤ e^α q_c(z)`, the no-free-lunch lower bound for pairs of safe
//! models, and the envelope diagnostics that measure how much mass any NAF
//! model must give up.

use std::sync::Arc;

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::domain::{ensure_same, ContentDomain, Dataset, DiscreteDistribution};
use crate::error::{check_param, Error, Result};
use crate::exec;
use crate::learner::Learner;
use crate::report::extended;
use crate::seeds;
use crate::tv::{min_envelope, tv_distance};

/// Slack allowed when checking the no-free-lunch bound.
pub const WITNESS_TOLERANCE: f64 = 1e-12;

/// Protected content paired with its safe model.
#[derive(Clone, Debug, PartialEq)]
pub struct SafeEntry {
    pub content: String,
    pub model: DiscreteDistribution,
}

/// Mapping `c ↦ q_c`. All models share one domain and contents are unique.
#[derive(Clone, Debug, PartialEq)]
pub struct SafeAssignment {
    entries: Vec<SafeEntry>,
}

impl SafeAssignment {
    pub fn new(entries: Vec<SafeEntry>) -> Result<Self> {
        let mut assignment = SafeAssignment { entries: Vec::new() };
        for entry in entries {
            assignment.push(entry.content, entry.model)?;
        }
        Ok(assignment)
    }

    pub fn push(&mut self, content: impl Into<String>, model: DiscreteDistribution) -> Result<()> {
        let content = content.into();
        if let Some(first) = self.entries.first() {
            ensure_same(first.model.domain(), model.domain())?;
        }
        if self.entries.iter().any(|e| e.content == content) {
            return Err(Error::DuplicateContent(content));
        }
        self.entries.push(SafeEntry { content, model });
        Ok(())
    }

    pub fn entries(&self) -> &[SafeEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, content: &str) -> Option<&DiscreteDistribution> {
        self.entries.iter().find(|e| e.content == content).map(|e| &e.model)
    }

    pub fn domain(&self) -> Option<&Arc<ContentDomain>> {
        self.entries.first().map(|e| e.model.domain())
    }

    fn models(&self) -> Vec<&DiscreteDistribution> {
        self.entries.iter().map(|e| &e.model).collect()
    }

    /// Pointwise minimum of the safe models.
    pub fn envelope(&self) -> Result<Vec<f64>> {
        if self.is_empty() {
            return Err(Error::EmptySafeAssignment);
        }
        min_envelope(&self.models())
    }
}

fn require_pair_sample(sample: &Dataset) -> Result<()> {
    if sample.len() < 2 {
        return Err(Error::DatasetTooSmall {
            size: sample.len(),
            min: 2,
        });
    }
    Ok(())
}

/// `q_c = learner(S ∖ {one occurrence of c})` for each distinct `c` in `S`.
pub fn safe_leave_one_out<L: Learner + ?Sized>(learner: &L, sample: &Dataset, seed: u64) -> Result<SafeAssignment> {
    require_pair_sample(sample)?;
    let mut safes = SafeAssignment { entries: Vec::new() };
    for c in sample.distinct() {
        let model = learner.train(&sample.without_one(c), seed)?;
        safes.push(sample.domain().symbol(c), model)?;
    }
    Ok(safes)
}

/// Seeded split of `S` into two halves (sizes `⌊n/2⌋` and `⌈n/2⌉`); each
/// half keeps the input order of its items.
pub fn split_halves(sample: &Dataset, seed: u64) -> (Dataset, Dataset) {
    let mut positions: Vec<usize> = (0..sample.len()).collect();
    positions.shuffle(&mut seeds::rng(seeds::derive(seed, "split-halves", 0)));
    let (first, second) = positions.split_at(sample.len() / 2);
    let take = |part: &[usize]| {
        let mut part = part.to_vec();
        part.sort_unstable();
        sample.subset(part.into_iter().map(|i| sample.items()[i]).collect())
    };
    (take(first), take(second))
}

/// Two-shard safe function: `q_c` is the model trained on the half that does
/// not contain `c`. When `c` occurs in both halves it maps to the model of
/// the half opposite shard 0, i.e. the shard-1 model.
pub fn safe_sharded<L: Learner + ?Sized>(learner: &L, sample: &Dataset, seed: u64) -> Result<SafeAssignment> {
    require_pair_sample(sample)?;
    let (half0, half1) = split_halves(sample, seed);
    let model0 = learner.train(&half0, seed)?;
    let model1 = learner.train(&half1, seed)?;
    let in0 = half0.counts();
    let mut safes = SafeAssignment { entries: Vec::new() };
    for c in sample.distinct() {
        let model = if in0[c] > 0 { &model1 } else { &model0 };
        safes.push(sample.domain().symbol(c), model.clone())?;
    }
    Ok(safes)
}

/// Smallest `α ≥ 0` with `p(z) ≤ e^α q_c(z)` for every `c` and `z`;
/// `+∞` when `p` puts mass where some safe model has none.
pub fn naf_alpha(p: &DiscreteDistribution, safes: &SafeAssignment) -> Result<f64> {
    let mut alpha: f64 = 0.0;
    for entry in safes.entries() {
        ensure_same(p.domain(), entry.model.domain())?;
        for z in p.support() {
            alpha = alpha.max(log_ratio(p.prob(z), entry.model.prob(z)));
        }
    }
    Ok(alpha)
}

fn log_ratio(p: f64, q: f64) -> f64 {
    if q == 0.0 {
        f64::INFINITY
    } else {
        (p / q).ln()
    }
}

/// One `(c, z)` pair breaking the NAF constraint.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub content: String,
    pub symbol: String,
    #[serde(serialize_with = "extended")]
    pub log_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NafCheck {
    pub is_naf: bool,
    #[serde(serialize_with = "extended")]
    pub alpha_star: f64,
    pub violations: Vec<Violation>,
}

/// Checks `α`-NAF and lists every violating `(c, z)`, so breaches can be
/// reported individually instead of as a single verdict.
pub fn is_naf(p: &DiscreteDistribution, safes: &SafeAssignment, alpha: f64) -> Result<NafCheck> {
    check_param("alpha", alpha, alpha >= 0.0, "must be non-negative")?;
    let scale = alpha.exp();
    let mut violations = Vec::new();
    for entry in safes.entries() {
        ensure_same(p.domain(), entry.model.domain())?;
        for z in p.support() {
            let (pz, qz) = (p.prob(z), entry.model.prob(z));
            if pz > scale * qz {
                violations.push(Violation {
                    content: entry.content.clone(),
                    symbol: p.domain().symbol(z).to_string(),
                    log_ratio: log_ratio(pz, qz),
                });
            }
        }
    }
    let alpha_star = naf_alpha(p, safes)?;
    Ok(NafCheck {
        is_naf: violations.is_empty(),
        alpha_star,
        violations,
    })
}

/// Lower bound on the NAF level of any model: `−ln Σ_z min_c q_c(z)`,
/// `+∞` when the envelope is empty.
pub fn feasibility_alpha(safes: &SafeAssignment) -> Result<f64> {
    let mass: f64 = safes.envelope()?.iter().sum();
    if mass <= 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok((-mass.ln()).max(0.0))
    }
}

/// Mass an `α`-NAF model is allowed per symbol and in total.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Censorship {
    pub alpha: f64,
    /// `min(1, e^α min_c q_c(z))`, in domain order.
    pub allowed: Vec<f64>,
    pub allowed_mass: f64,
    /// `max(0, 1 − allowed_mass)`.
    pub deficit: f64,
}

pub fn censorship_report(safes: &SafeAssignment, alpha: f64) -> Result<Censorship> {
    check_param("alpha", alpha, alpha >= 0.0, "must be non-negative")?;
    let scale = alpha.exp();
    let allowed: Vec<f64> = safes
        .envelope()?
        .into_iter()
        .map(|e| (scale * e).clamp(0.0, 1.0))
        .collect();
    let allowed_mass: f64 = allowed.iter().sum();
    Ok(Censorship {
        alpha,
        allowed,
        allowed_mass,
        deficit: (1.0 - allowed_mass).max(0.0),
    })
}

/// Full NAF diagnostic for one model at level `α`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NafReport {
    pub alpha: f64,
    #[serde(serialize_with = "extended")]
    pub alpha_star: f64,
    pub is_naf: bool,
    pub violations: Vec<Violation>,
    #[serde(serialize_with = "extended")]
    pub feasibility_alpha: f64,
    pub censorship: Censorship,
}

pub fn naf_report(p: &DiscreteDistribution, safes: &SafeAssignment, alpha: f64) -> Result<NafReport> {
    let check = is_naf(p, safes, alpha)?;
    Ok(NafReport {
        alpha,
        alpha_star: check.alpha_star,
        is_naf: check.is_naf,
        violations: check.violations,
        feasibility_alpha: feasibility_alpha(safes)?,
        censorship: censorship_report(safes, alpha)?,
    })
}

/// A symbol certifying `p(z) ≥ min(q1(z), q2(z)) / (2(1 − TV(q1, q2)))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NflWitness {
    pub index: usize,
    pub symbol: String,
    pub p_value: f64,
    pub threshold: f64,
    pub tv: f64,
}

/// Finds the symbol with the largest slack over the no-free-lunch bound.
pub fn nfl_witness(
    p: &DiscreteDistribution,
    q1: &DiscreteDistribution,
    q2: &DiscreteDistribution,
) -> Result<NflWitness> {
    ensure_same(p.domain(), q1.domain())?;
    let tv = tv_distance(q1, q2)?;
    if tv >= 1.0 {
        return Err(Error::DegenerateTv);
    }
    let (index, margin, threshold) = best_witness(p.weights(), q1.weights(), q2.weights(), tv);
    if margin < -WITNESS_TOLERANCE {
        return Err(Error::WitnessNotFound { margin });
    }
    Ok(NflWitness {
        index,
        symbol: p.domain().symbol(index).to_string(),
        p_value: p.prob(index),
        threshold,
        tv,
    })
}

/// `(index, margin, threshold)` maximizing `p(z) − threshold(z)`.
fn best_witness(p: &[f64], q1: &[f64], q2: &[f64], tv: f64) -> (usize, f64, f64) {
    let denom = 2.0 * (1.0 - tv);
    let mut best = (0, f64::NEG_INFINITY, 0.0);
    for z in 0..p.len() {
        let threshold = q1[z].min(q2[z]) / denom;
        let margin = p[z] - threshold;
        if margin > best.1 {
            best = (z, margin, threshold);
        }
    }
    best
}

/// All compositions of `denominator` into `dim` non-negative parts, i.e. the
/// simplex grid with step `1/denominator` in exact integer form.
pub fn simplex_grid(dim: usize, denominator: u32) -> Vec<Vec<u32>> {
    fn fill(prefix: &mut Vec<u32>, remaining: u32, slots: usize, out: &mut Vec<Vec<u32>>) {
        if slots == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for v in 0..=remaining {
            prefix.push(v);
            fill(prefix, remaining - v, slots - 1, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if dim > 0 {
        fill(&mut Vec::with_capacity(dim), denominator, dim, &mut out);
    }
    out
}

/// Outcome of checking the no-free-lunch bound over a simplex grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NflGridCheck {
    pub tv: f64,
    pub points: usize,
    pub failures: usize,
    /// Smallest best-margin over the grid; non-negative up to tolerance when
    /// every point has a witness.
    pub min_margin: f64,
}

impl NflGridCheck {
    pub fn passes(&self) -> bool {
        self.failures == 0
    }
}

/// Runs [`nfl_witness`]'s search for every `p` on the grid of step
/// `1/denominator`.
pub fn verify_nfl_grid(q1: &DiscreteDistribution, q2: &DiscreteDistribution, denominator: u32) -> Result<NflGridCheck> {
    let tv = tv_distance(q1, q2)?;
    if tv >= 1.0 {
        return Err(Error::DegenerateTv);
    }
    let grid = simplex_grid(q1.len(), denominator);
    let margins = exec::map_indexed(grid.len(), |i| {
        let p: Vec<f64> = grid[i].iter().map(|&n| n as f64 / denominator as f64).collect();
        best_witness(&p, q1.weights(), q2.weights(), tv).1
    });
    Ok(NflGridCheck {
        tv,
        points: grid.len(),
        failures: margins.iter().filter(|&&m| m < -WITNESS_TOLERANCE).count(),
        min_margin: margins.iter().copied().fold(f64::INFINITY, f64::min),
    })
}
