#![allow(dead_code)]

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use stability_lab::seeds::LabRng;
use stability_lab::{ContentDomain, DiscreteDistribution};

/// Random distribution on `domain`: normalized exponentials, with each
/// coordinate zeroed with probability `zero_prob` (at least one survives).
pub fn random_distribution(rng: &mut LabRng, domain: &Arc<ContentDomain>, zero_prob: f64) -> DiscreteDistribution {
    let n = domain.len();
    let mut w: Vec<f64> = (0..n)
        .map(|_| {
            if rng.random::<f64>() < zero_prob {
                0.0
            } else {
                Exp1.sample(rng)
            }
        })
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        w[rng.random_range(0..n)] = 1.0;
    }
    DiscreteDistribution::from_unnormalized(domain.clone(), w).unwrap()
}

pub fn random_pair(
    rng: &mut LabRng,
    sizes: std::ops::RangeInclusive<usize>,
    zero_prob: f64,
) -> (DiscreteDistribution, DiscreteDistribution) {
    let n = rng.random_range(sizes);
    let domain = ContentDomain::with_size(n).unwrap();
    (
        random_distribution(rng, &domain, zero_prob),
        random_distribution(rng, &domain, zero_prob),
    )
}
