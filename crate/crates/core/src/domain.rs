//! Finite content domains, datasets over them, events and discrete
//! distributions.
//!
//! Every distribution keeps a dense weight vector indexed by symbol position,
//! zero-probability symbols included, so symbol indices are stable across the
//! whole crate.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use rand::distr::Distribution as _;
use rand::Rng;
use rand_distr::weighted::WeightedIndex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds;

/// Absolute tolerance on `Σ w = 1` accepted at construction.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// An ordered set of distinct content symbols.
#[derive(Clone, PartialEq, Eq)]
pub struct ContentDomain {
    symbols: Vec<String>,
    index: HashMap<String, usize>,
}

impl ContentDomain {
    pub fn new<I, S>(symbols: I) -> Result<Arc<Self>>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::EmptyDomain);
        }
        let mut index = HashMap::with_capacity(symbols.len());
        for (i, s) in symbols.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(Error::DuplicateSymbol(s.clone()));
            }
        }
        Ok(Arc::new(ContentDomain { symbols, index }))
    }

    /// Domain `{z0, z1, …, z(n-1)}`.
    pub fn with_size(n: usize) -> Result<Arc<Self>> {
        Self::new((0..n).map(|i| format!("z{i}")))
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol(&self, index: usize) -> &str {
        &self.symbols[index]
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.index.get(symbol).copied()
    }

    pub fn require_index(&self, symbol: &str) -> Result<usize> {
        self.index_of(symbol)
            .ok_or_else(|| Error::UnknownSymbol(symbol.to_string()))
    }
}

impl fmt::Debug for ContentDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("ContentDomain").field(&self.symbols).finish()
    }
}

pub(crate) fn same_domain(a: &Arc<ContentDomain>, b: &Arc<ContentDomain>) -> bool {
    Arc::ptr_eq(a, b) || a.symbols == b.symbols
}

pub(crate) fn ensure_same(a: &Arc<ContentDomain>, b: &Arc<ContentDomain>) -> Result<()> {
    if same_domain(a, b) {
        Ok(())
    } else {
        Err(Error::DomainMismatch)
    }
}

/// A probability vector over a [`ContentDomain`].
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDistribution {
    domain: Arc<ContentDomain>,
    weights: Vec<f64>,
}

impl DiscreteDistribution {
    /// Validates `weights` against `domain`. Weights must be non-negative and
    /// sum to one within [`NORMALIZATION_TOLERANCE`]; they are stored as given.
    pub fn new(domain: Arc<ContentDomain>, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != domain.len() {
            return Err(Error::LengthMismatch {
                expected: domain.len(),
                got: weights.len(),
            });
        }
        for (index, &value) in weights.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::NegativeWeight { index, value });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized { sum });
        }
        Ok(DiscreteDistribution { domain, weights })
    }

    /// Normalizes non-negative `weights` with a positive total.
    pub fn from_unnormalized(domain: Arc<ContentDomain>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !total.is_finite() || total <= 0.0 {
            return Err(Error::NotNormalized { sum: total });
        }
        Self::new(domain, weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(domain: Arc<ContentDomain>) -> Self {
        let n = domain.len();
        DiscreteDistribution {
            domain,
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(domain: Arc<ContentDomain>, index: usize) -> Result<Self> {
        let size = domain.len();
        if index >= size {
            return Err(Error::IndexOutOfRange { index, size });
        }
        let mut weights = vec![0.0; size];
        weights[index] = 1.0;
        Ok(DiscreteDistribution { domain, weights })
    }

    pub fn domain(&self) -> &Arc<ContentDomain> {
        &self.domain
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn prob(&self, index: usize) -> f64 {
        self.weights[index]
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Indices with strictly positive probability.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(i, _)| i)
    }

    /// Probability of an event.
    pub fn mass(&self, event: &Event) -> f64 {
        event.members().map(|i| self.weights[i]).sum()
    }

    /// Draws one symbol index; deterministic in `seed`.
    pub fn sample(&self, seed: u64) -> usize {
        self.sampler().draw(&mut seeds::rng(seed))
    }

    pub fn sampler(&self) -> Sampler {
        Sampler {
            index: WeightedIndex::new(&self.weights).expect("validated distribution has positive finite mass"),
        }
    }

    pub fn to_literal(&self) -> DistributionLiteral {
        DistributionLiteral {
            symbols: self.domain.symbols().to_vec(),
            weights: self.weights.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_literal()).expect("literal serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let literal: DistributionLiteral = serde_json::from_str(text)?;
        literal.into_distribution()
    }
}

/// Reusable sampler for repeated draws from one distribution.
#[derive(Clone, Debug)]
pub struct Sampler {
    index: WeightedIndex<f64>,
}

impl Sampler {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.index.sample(rng)
    }
}

/// JSON form of a distribution: `{"symbols": [...], "weights": [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionLiteral {
    pub symbols: Vec<String>,
    pub weights: Vec<f64>,
}

impl DistributionLiteral {
    pub fn into_distribution(self) -> Result<DiscreteDistribution> {
        DiscreteDistribution::new(ContentDomain::new(self.symbols)?, self.weights)
    }

    /// Builds the distribution on an existing domain, reordering weights by
    /// symbol name. The literal must list exactly the domain's symbols.
    pub fn into_distribution_on(self, domain: &Arc<ContentDomain>) -> Result<DiscreteDistribution> {
        if self.symbols.len() != domain.len() || self.weights.len() != self.symbols.len() {
            return Err(Error::DomainMismatch);
        }
        let mut weights = vec![0.0; domain.len()];
        let mut seen = vec![false; domain.len()];
        for (symbol, w) in self.symbols.iter().zip(self.weights) {
            let i = domain.index_of(symbol).ok_or(Error::DomainMismatch)?;
            if seen[i] {
                return Err(Error::DuplicateSymbol(symbol.clone()));
            }
            seen[i] = true;
            weights[i] = w;
        }
        DiscreteDistribution::new(domain.clone(), weights)
    }
}

/// An ordered multiset of symbols from one domain.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    domain: Arc<ContentDomain>,
    items: Vec<usize>,
}

impl Dataset {
    pub fn from_indices(domain: Arc<ContentDomain>, items: Vec<usize>) -> Result<Self> {
        let size = domain.len();
        if let Some(&index) = items.iter().find(|&&i| i >= size) {
            return Err(Error::IndexOutOfRange { index, size });
        }
        Ok(Dataset { domain, items })
    }

    pub fn from_symbols<S: AsRef<str>>(domain: Arc<ContentDomain>, symbols: &[S]) -> Result<Self> {
        let items = symbols
            .iter()
            .map(|s| domain.require_index(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset { domain, items })
    }

    /// Loads one symbol per line; blank lines are skipped.
    pub fn from_text_file(domain: Arc<ContentDomain>, path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let symbols: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        Self::from_symbols(domain, &symbols)
    }

    /// `m` i.i.d. draws from `dist`.
    pub fn draw<R: Rng + ?Sized>(dist: &DiscreteDistribution, m: usize, rng: &mut R) -> Self {
        let sampler = dist.sampler();
        Dataset {
            domain: dist.domain().clone(),
            items: (0..m).map(|_| sampler.draw(rng)).collect(),
        }
    }

    pub fn domain(&self) -> &Arc<ContentDomain> {
        &self.domain
    }

    pub fn items(&self) -> &[usize] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn symbols(&self) -> impl Iterator<Item = &str> + '_ {
        self.items.iter().map(|&i| self.domain.symbol(i))
    }

    /// Occurrence count of every domain symbol.
    pub fn counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.domain.len()];
        for &i in &self.items {
            counts[i] += 1;
        }
        counts
    }

    /// Distinct symbol indices in first-occurrence order.
    pub fn distinct(&self) -> Vec<usize> {
        let mut seen = vec![false; self.domain.len()];
        self.items
            .iter()
            .copied()
            .filter(|&i| !std::mem::replace(&mut seen[i], true))
            .collect()
    }

    /// Copy with the first occurrence of `index` removed.
    pub fn without_one(&self, index: usize) -> Self {
        let mut items = self.items.clone();
        if let Some(pos) = items.iter().position(|&i| i == index) {
            items.remove(pos);
        }
        Dataset {
            domain: self.domain.clone(),
            items,
        }
    }

    pub fn subset(&self, items: Vec<usize>) -> Self {
        Dataset {
            domain: self.domain.clone(),
            items,
        }
    }

    /// Consecutive chunks of `m` items in input order. The length must be a
    /// multiple of `m`.
    pub fn shards(&self, m: usize) -> Result<Vec<Dataset>> {
        if m == 0 || !self.items.len().is_multiple_of(m) {
            let n = self.items.len();
            return Err(Error::SizeMismatch {
                expected: n - n % m.max(1),
                got: n,
            });
        }
        Ok(self.items.chunks(m).map(|chunk| self.subset(chunk.to_vec())).collect())
    }
}

/// A subset of a domain, stored as a membership vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    membership: Vec<bool>,
}

impl Event {
    pub fn empty(size: usize) -> Self {
        Event {
            membership: vec![false; size],
        }
    }

    /// Bit `i` of `mask` selects symbol `i`.
    pub fn from_mask(size: usize, mask: u32) -> Self {
        Event {
            membership: (0..size).map(|i| mask >> i & 1 == 1).collect(),
        }
    }

    pub fn from_members(size: usize, members: &[usize]) -> Self {
        let mut event = Self::empty(size);
        for &i in members {
            event.membership[i] = true;
        }
        event
    }

    pub fn contains(&self, index: usize) -> bool {
        self.membership[index]
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.membership.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn complement(&self) -> Self {
        Event {
            membership: self.membership.iter().map(|b| !b).collect(),
        }
    }

    pub fn symbols<'a>(&'a self, domain: &'a ContentDomain) -> Vec<&'a str> {
        self.members().map(|i| domain.symbol(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary() -> Arc<ContentDomain> {
        ContentDomain::new(["a", "b"]).unwrap()
    }

    #[test]
    fn accepts_uniform_and_point_mass() {
        assert!(DiscreteDistribution::new(binary(), vec![0.5, 0.5]).is_ok());
        assert!(DiscreteDistribution::new(binary(), vec![1.0, 0.0]).is_ok());
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(matches!(
            DiscreteDistribution::new(binary(), vec![0.6, 0.6]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            DiscreteDistribution::new(binary(), vec![1.5, -0.5]),
            Err(Error::NegativeWeight { index: 1, .. })
        ));
        assert!(matches!(
            DiscreteDistribution::new(binary(), vec![1.0]),
            Err(Error::LengthMismatch { expected: 2, got: 1 })
        ));
        assert!(DiscreteDistribution::new(binary(), vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn domain_rejects_duplicates() {
        assert_eq!(
            ContentDomain::new(["a", "a"]).unwrap_err(),
            Error::DuplicateSymbol("a".into())
        );
        assert_eq!(
            ContentDomain::new(Vec::<String>::new()).unwrap_err(),
            Error::EmptyDomain
        );
    }

    #[test]
    fn index_symbol_bijection() {
        let d = ContentDomain::with_size(5).unwrap();
        for i in 0..5 {
            assert_eq!(d.index_of(d.symbol(i)), Some(i));
        }
    }

    #[test]
    fn point_mass_always_sampled() {
        let d = ContentDomain::with_size(4).unwrap();
        let q = DiscreteDistribution::point_mass(d, 3).unwrap();
        for seed in 0..100 {
            assert_eq!(q.sample(seed), 3);
        }
    }

    #[test]
    fn json_literal_round_trip() {
        let q = DiscreteDistribution::new(binary(), vec![0.25, 0.75]).unwrap();
        let back = DiscreteDistribution::from_json(&q.to_json()).unwrap();
        assert_eq!(q, back);
    }

    #[test]
    fn literal_reorders_onto_domain() {
        let lit = DistributionLiteral {
            symbols: vec!["b".into(), "a".into()],
            weights: vec![0.9, 0.1],
        };
        let q = lit.into_distribution_on(&binary()).unwrap();
        assert_eq!(q.weights(), &[0.1, 0.9]);
    }

    #[test]
    fn dataset_rejects_foreign_symbols() {
        assert_eq!(
            Dataset::from_symbols(binary(), &["a", "c"]).unwrap_err(),
            Error::UnknownSymbol("c".into())
        );
    }

    #[test]
    fn shards_preserve_order() {
        let s = Dataset::from_symbols(binary(), &["a", "b", "b", "a"]).unwrap();
        let shards = s.shards(2).unwrap();
        assert_eq!(shards[0].items(), &[0, 1]);
        assert_eq!(shards[1].items(), &[1, 0]);
        assert!(s.shards(3).is_err());
    }

    #[test]
    fn event_mask_and_mass() {
        let q = DiscreteDistribution::new(ContentDomain::with_size(3).unwrap(), vec![0.2, 0.3, 0.5]).unwrap();
        let e = Event::from_mask(3, 0b101);
        assert_eq!(e.members().collect::<Vec<_>>(), vec![0, 2]);
        assert!((q.mass(&e) - 0.7).abs() < 1e-15);
        assert!((q.mass(&e.complement()) - 0.3).abs() < 1e-15);
    }
}
