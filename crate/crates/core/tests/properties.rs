use std::sync::Arc;

use proptest::prelude::*;
use stability_lab::dp::{private_histogram, threshold_tau};
use stability_lab::naf::{verify_nfl_grid, SafeEntry};
use stability_lab::transform::{fit_shards, project_histogram, release, simplex_project_linf, Projection};
use stability_lab::{
    dp_beta, dp_beta_event_form, feasibility_alpha, is_naf, min_envelope, naf_alpha, nfl_witness, tv_distance,
    tv_event_form, ContentDomain, Dataset, DiscreteDistribution, EmpiricalLearner, SafeAssignment, TransformConfig,
};

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![1 => Just(0u32), 4 => 1u32..1000], n).prop_map(|mut w| {
        if w.iter().all(|&x| x == 0) {
            w[0] = 1;
        }
        let total: u32 = w.iter().sum();
        w.into_iter().map(|x| x as f64 / total as f64).collect()
    })
}

fn on(domain: &Arc<ContentDomain>, w: Vec<f64>) -> DiscreteDistribution {
    DiscreteDistribution::new(domain.clone(), w).unwrap()
}

/// Two or three distributions on a shared domain of size 2..=max.
fn family(max: usize, count: usize) -> impl Strategy<Value = Vec<DiscreteDistribution>> {
    (2..=max).prop_flat_map(move |n| {
        prop::collection::vec(weights(n), count).prop_map(move |ws| {
            let domain = ContentDomain::with_size(n).unwrap();
            ws.into_iter().map(|w| on(&domain, w)).collect()
        })
    })
}

fn assignment(models: &[DiscreteDistribution]) -> SafeAssignment {
    SafeAssignment::new(
        models
            .iter()
            .enumerate()
            .map(|(i, m)| SafeEntry {
                content: format!("c{i}"),
                model: m.clone(),
            })
            .collect(),
    )
    .unwrap()
}

proptest! {
    #[test]
    fn tv_is_a_metric(qs in family(10, 3)) {
        let (a, b, c) = (&qs[0], &qs[1], &qs[2]);
        let ab = tv_distance(a, b).unwrap();
        prop_assert_eq!(ab, tv_distance(b, a).unwrap());
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        prop_assert!(tv_distance(a, a).unwrap() <= 1e-12);
        prop_assert!(ab <= tv_distance(a, c).unwrap() + tv_distance(c, b).unwrap() + 1e-12);
    }

    #[test]
    fn tv_event_form_agrees(qs in family(12, 2)) {
        let (value, event) = tv_event_form(&qs[0], &qs[1]).unwrap();
        let tv = tv_distance(&qs[0], &qs[1]).unwrap();
        prop_assert!((value - tv).abs() <= 1e-12);
        prop_assert!((qs[0].mass(&event) - qs[1].mass(&event) - value).abs() <= 1e-12);
    }

    #[test]
    fn envelope_mass_is_one_minus_tv(qs in family(12, 2)) {
        let mass: f64 = min_envelope(&[&qs[0], &qs[1]]).unwrap().iter().sum();
        prop_assert!((mass - (1.0 - tv_distance(&qs[0], &qs[1]).unwrap())).abs() <= 1e-12);
    }

    #[test]
    fn dp_beta_matches_event_form(qs in family(12, 2), alpha in 0.0f64..3.0) {
        let closed = dp_beta(&qs[0], &qs[1], alpha).unwrap();
        let (brute, _) = dp_beta_event_form(&qs[0], &qs[1], alpha).unwrap();
        prop_assert!((closed - brute).abs() <= 1e-12);
    }

    #[test]
    fn dp_beta_at_zero_is_tv(qs in family(12, 2)) {
        let beta = dp_beta(&qs[0], &qs[1], 0.0).unwrap();
        prop_assert!((beta - tv_distance(&qs[0], &qs[1]).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn dp_beta_non_increasing(qs in family(8, 2), a in 0.0f64..2.0, b in 0.0f64..2.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(dp_beta(&qs[0], &qs[1], hi).unwrap() <= dp_beta(&qs[0], &qs[1], lo).unwrap() + 1e-15);
    }

    #[test]
    fn dp_beta_vanishes_past_max_log_ratio(n in 2usize..8, seed_a in weights(8), seed_b in prop::collection::vec(1u32..1000, 8)) {
        // P' has full support so supp P ⊆ supp P'
        let domain = ContentDomain::with_size(n).unwrap();
        let p = DiscreteDistribution::from_unnormalized(domain.clone(), seed_a[..n].to_vec().iter().map(|x| x + 1e-3).collect()).unwrap();
        let total: u32 = seed_b[..n].iter().sum();
        let q = on(&domain, seed_b[..n].iter().map(|&x| x as f64 / total as f64).collect());
        let max_ratio = (0..n)
            .filter(|&z| p.prob(z) > 0.0)
            .map(|z| (p.prob(z) / q.prob(z)).ln())
            .fold(0.0f64, f64::max);
        prop_assert!(dp_beta(&p, &q, max_ratio).unwrap() <= 1e-15);
    }

    #[test]
    fn naf_identity_and_monotonicity(qs in family(8, 3)) {
        let p = &qs[0];
        prop_assert_eq!(naf_alpha(p, &assignment(&[p.clone(), p.clone()])).unwrap(), 0.0);

        let small = assignment(&qs[1..2]);
        let large = assignment(&qs[1..3]);
        prop_assert!(naf_alpha(p, &large).unwrap() >= naf_alpha(p, &small).unwrap());
        prop_assert!(feasibility_alpha(&large).unwrap() >= feasibility_alpha(&small).unwrap());
    }

    #[test]
    fn feasibility_is_envelope_identity(qs in family(10, 2)) {
        let tv = tv_distance(&qs[0], &qs[1]).unwrap();
        prop_assume!(tv < 1.0);
        let f = feasibility_alpha(&assignment(&qs)).unwrap();
        prop_assert!((f - (-(1.0 - tv).ln())).abs() <= 1e-12 || (tv < 1e-12 && f == 0.0));
    }

    #[test]
    fn is_naf_is_sound(qs in family(8, 3), alpha in 0.0f64..3.0) {
        let safes = assignment(&qs[1..]);
        let check = is_naf(&qs[0], &safes, alpha).unwrap();
        if check.is_naf {
            for e in safes.entries() {
                for z in 0..qs[0].len() {
                    prop_assert!(qs[0].prob(z) <= alpha.exp() * e.model.prob(z) + 1e-12);
                }
            }
        } else {
            prop_assert!(check.alpha_star > alpha);
        }
    }

    #[test]
    fn feasibility_never_beats_naf(qs in family(8, 3)) {
        let safes = assignment(&qs[1..]);
        prop_assert!(feasibility_alpha(&safes).unwrap() <= naf_alpha(&qs[0], &safes).unwrap() + 1e-9);
    }

    #[test]
    fn nfl_witness_exists(qs in family(6, 3)) {
        prop_assume!(tv_distance(&qs[1], &qs[2]).unwrap() < 1.0);
        let w = nfl_witness(&qs[0], &qs[1], &qs[2]).unwrap();
        prop_assert!(w.p_value >= w.threshold - 1e-12);
    }

    #[test]
    fn projection_stays_in_box(a in prop::collection::vec(0.0f64..1.0, 2..10), eta in 0.01f64..0.5) {
        let domain = ContentDomain::with_size(a.len()).unwrap();
        let lower: f64 = a.iter().map(|x| (x - eta).max(0.0)).sum();
        let upper: f64 = a.iter().map(|x| (x + eta).min(1.0)).sum();
        match simplex_project_linf(&domain, &a, eta).unwrap() {
            Projection::Feasible(p) => {
                prop_assert!(lower <= 1.0 && upper >= 1.0);
                for (x, y) in p.weights().iter().zip(&a) {
                    prop_assert!((x - y).abs() <= eta + 1e-12);
                }
            }
            Projection::Infeasible => prop_assert!(lower > 1.0 || upper < 1.0),
        }
    }

    #[test]
    fn distribution_json_round_trip(qs in family(10, 1)) {
        let back = DiscreteDistribution::from_json(&qs[0].to_json()).unwrap();
        prop_assert_eq!(&back, &qs[0]);
    }

    #[test]
    fn histogram_has_no_false_positives(items in prop::collection::vec(0usize..6, 1..60), seed in any::<u64>(), eps in 0.1f64..5.0) {
        let s = Dataset::from_indices(ContentDomain::with_size(6).unwrap(), items).unwrap();
        let h = private_histogram(&s, eps, 1e-3, seed).unwrap();
        let counts = s.counts();
        for (z, &a) in h.values().iter().enumerate() {
            prop_assert!((0.0..=1.0).contains(&a));
            if a > 0.0 {
                prop_assert!(counts[z] > 0);
                prop_assert!(a >= threshold_tau(eps, 1e-3, s.len()).min(1.0));
            }
        }
    }
}

#[test]
fn nfl_grid_small_domains() {
    let domain = ContentDomain::with_size(3).unwrap();
    let q1 = on(&domain, vec![0.6, 0.3, 0.1]);
    let q2 = on(&domain, vec![0.1, 0.3, 0.6]);
    let check = verify_nfl_grid(&q1, &q2, 20).unwrap();
    assert_eq!(check.points, 231);
    assert!(check.passes(), "{check:?}");
}

#[test]
fn single_record_influence() {
    // Replacing one item of S_B moves at most one shard model and one coupled draw.
    let domain = ContentDomain::with_size(5).unwrap();
    let config = TransformConfig::with_shard_count(1.0, 1e-3, 0.1, 4, 25).unwrap();
    let learner = EmpiricalLearner::new(0.0).unwrap();
    let base: Vec<usize> = (0..config.m_priv).map(|i| (i * 7 + i / 3) % 5).collect();
    let s = Dataset::from_indices(domain.clone(), base.clone()).unwrap();
    let models = fit_shards(&learner, &s, &config).unwrap();
    for position in [0, 13, 57, 99] {
        for replacement in 0..5 {
            let mut items = base.clone();
            items[position] = replacement;
            let s2 = Dataset::from_indices(domain.clone(), items).unwrap();
            let models2 = fit_shards(&learner, &s2, &config).unwrap();
            let changed_models = models.iter().zip(&models2).filter(|(a, b)| a != b).count();
            assert!(changed_models <= 1);
            for tape_seed in 0..20 {
                let a = release(&models, &config, tape_seed, 1).unwrap();
                let b = release(&models2, &config, tape_seed, 1).unwrap();
                let changed_draws = a.coupled.iter().zip(&b.coupled).filter(|(x, y)| x != y).count();
                assert!(changed_draws <= 1);
            }
        }
    }
}

#[test]
fn output_depends_on_data_only_through_histogram() {
    let domain = ContentDomain::with_size(4).unwrap();
    let s1 = Dataset::from_indices(domain.clone(), vec![0, 0, 1, 2, 2, 2, 3, 0]).unwrap();
    let s2 = Dataset::from_indices(domain, vec![2, 0, 2, 0, 1, 3, 2, 0]).unwrap();
    // same counts, different datasets ⇒ same histogram under one noise seed
    let h1 = private_histogram(&s1, 1.0, 0.01, 17).unwrap();
    let h2 = private_histogram(&s2, 1.0, 0.01, 17).unwrap();
    assert_eq!(h1, h2);
    assert_eq!(
        project_histogram(&h1, 0.1).unwrap(),
        project_histogram(&h2, 0.1).unwrap()
    );
}
