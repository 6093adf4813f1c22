//! Differential-privacy machinery: exact `(α, β)` divergences between two
//! output laws and a thresholded private histogram with an exact audit.

mod divergence;
mod histogram;

pub use divergence::{dp_beta, dp_beta_event_form, symmetric_dp_beta};
pub use histogram::{
    audit_histogram, histogram_output_law, private_histogram, release_value, threshold_tau, HistogramAudit,
    NoisyHistogram, OutputLaw, TwoSidedGeometric,
};

use serde::{Deserialize, Serialize};

use crate::domain::Dataset;
use crate::error::{check_param, Result};

/// Constant in front of the sample-size requirement of the histogram.
pub const REQUIRED_K_CONSTANT: f64 = 8.0;

/// Privacy and accuracy parameters: `(ε, δ)` privacy, `η` accuracy and `β`
/// failure probability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DpParams {
    pub epsilon: f64,
    pub delta: f64,
    pub eta: f64,
    pub beta: f64,
}

impl DpParams {
    pub fn new(epsilon: f64, delta: f64, eta: f64, beta: f64) -> Result<Self> {
        let params = DpParams {
            epsilon,
            delta,
            eta,
            beta,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        check_param(
            "epsilon",
            self.epsilon,
            self.epsilon > 0.0 && self.epsilon.is_finite(),
            "must be positive and finite",
        )?;
        check_param("delta", self.delta, open_unit(self.delta), "must lie in (0, 1)")?;
        check_param("eta", self.eta, open_unit(self.eta), "must lie in (0, 1)")?;
        check_param("beta", self.beta, open_unit(self.beta), "must lie in (0, 1)")
    }
}

fn open_unit(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

/// Histogram sample size `⌈8·ln(1/(ηβδ)) / (ηε)⌉` that delivers `η`
/// accuracy with probability `1 − β`.
pub fn required_k(params: &DpParams) -> usize {
    let DpParams {
        epsilon,
        delta,
        eta,
        beta,
    } = *params;
    (REQUIRED_K_CONSTANT * (1.0 / (eta * beta * delta)).ln() / (eta * epsilon)).ceil() as usize
}

/// Empirical frequency `|{i : z_i = z}| / |S|`; zero on an empty sample.
pub fn freq(sample: &Dataset, symbol: usize) -> f64 {
    if sample.is_empty() {
        return 0.0;
    }
    sample.items().iter().filter(|&&i| i == symbol).count() as f64 / sample.len() as f64
}
