use crate::domain::{ensure_same, DiscreteDistribution, Event};
use crate::error::{check_param, Result};
use crate::tv::max_event_gap;

fn check_alpha(alpha: f64) -> Result<f64> {
    check_param(
        "alpha",
        alpha,
        alpha >= 0.0 && alpha.is_finite(),
        "must be finite and non-negative",
    )?;
    Ok(alpha.exp())
}

/// Smallest `β` with `P(E) ≤ e^α P'(E) + β` for every event `E`:
/// `Σ_z max(P(z) − e^α P'(z), 0)`.
pub fn dp_beta(p: &DiscreteDistribution, p_prime: &DiscreteDistribution, alpha: f64) -> Result<f64> {
    ensure_same(p.domain(), p_prime.domain())?;
    let scale = check_alpha(alpha)?;
    Ok(p.weights()
        .iter()
        .zip(p_prime.weights())
        .map(|(&a, &b)| (a - scale * b).max(0.0))
        .sum())
}

/// `max_E P(E) − e^α P'(E)` by enumerating all events (|Z| ≤ 20), with the
/// maximizing event.
pub fn dp_beta_event_form(
    p: &DiscreteDistribution,
    p_prime: &DiscreteDistribution,
    alpha: f64,
) -> Result<(f64, Event)> {
    ensure_same(p.domain(), p_prime.domain())?;
    let scale = check_alpha(alpha)?;
    max_event_gap(p.weights(), p_prime.weights(), scale)
}

/// Both inequalities of the `(α, β)` condition: the larger one-sided `β`.
pub fn symmetric_dp_beta(p: &DiscreteDistribution, p_prime: &DiscreteDistribution, alpha: f64) -> Result<f64> {
    Ok(dp_beta(p, p_prime, alpha)?.max(dp_beta(p_prime, p, alpha)?))
}
