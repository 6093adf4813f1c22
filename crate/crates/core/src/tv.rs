//! Total variation distance and the pointwise-minimum envelope.

use crate::domain::{ensure_same, DiscreteDistribution, Event};
use crate::error::{Error, Result};

/// Largest domain the event-enumeration routines accept (2^20 events).
pub const MAX_ENUMERATION_SIZE: usize = 20;

/// `½ Σ_z |q1(z) − q2(z)|`.
pub fn tv_distance(q1: &DiscreteDistribution, q2: &DiscreteDistribution) -> Result<f64> {
    ensure_same(q1.domain(), q2.domain())?;
    let l1: f64 = q1.weights().iter().zip(q2.weights()).map(|(a, b)| (a - b).abs()).sum();
    Ok(0.5 * l1)
}

/// `sup_E q1(E) − q2(E)` by enumerating every event; returns the maximizer.
/// Independent of [`tv_distance`], used as its oracle.
pub fn tv_event_form(q1: &DiscreteDistribution, q2: &DiscreteDistribution) -> Result<(f64, Event)> {
    ensure_same(q1.domain(), q2.domain())?;
    max_event_gap(q1.weights(), q2.weights(), 1.0)
}

/// `max_E Σ_{z∈E} (a(z) − scale·b(z))` over all `2^n` events.
pub(crate) fn max_event_gap(a: &[f64], b: &[f64], scale: f64) -> Result<(f64, Event)> {
    let n = a.len();
    if n > MAX_ENUMERATION_SIZE {
        return Err(Error::DomainTooLarge {
            size: n,
            max: MAX_ENUMERATION_SIZE,
        });
    }
    let mut best = (0.0, 0u32);
    for mask in 0u32..(1u32 << n) {
        let mut pa = 0.0;
        let mut pb = 0.0;
        for i in 0..n {
            if mask >> i & 1 == 1 {
                pa += a[i];
                pb += b[i];
            }
        }
        let gap = pa - scale * pb;
        if gap > best.0 {
            best = (gap, mask);
        }
    }
    Ok((best.0, Event::from_mask(n, best.1)))
}

/// Pointwise minimum `min_c q_c(z)`. The result generally sums to less than 1.
pub fn min_envelope(models: &[&DiscreteDistribution]) -> Result<Vec<f64>> {
    let (first, rest) = models.split_first().ok_or(Error::EmptyList)?;
    let mut envelope = first.weights().to_vec();
    for q in rest {
        ensure_same(first.domain(), q.domain())?;
        for (e, &w) in envelope.iter_mut().zip(q.weights()) {
            *e = e.min(w);
        }
    }
    Ok(envelope)
}
