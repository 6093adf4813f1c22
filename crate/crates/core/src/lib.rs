//! Executable stability notions for generative models over finite content
//! domains: total variation, `(α, β)` differential privacy, near-access-
//! freeness (NAF), the exponential-race coupling, a private heavy-hitter
//! histogram, and the transformation turning an output-stable learner into
//! a differentially private one.
//!
//! Randomized routines take explicit seeds. Monte Carlo loops run on rayon
//! when the `parallel` feature is on (default) and sequentially otherwise;
//! results are identical either way.

pub mod corpus;
pub mod coupling;
pub mod domain;
pub mod dp;
pub mod error;
pub mod exec;
pub mod learner;
pub mod naf;
pub mod report;
pub mod seeds;
pub mod stats;
pub mod transform;
pub mod tv;

pub use coupling::{coupled_sample, disagreement_estimate, CouplingTape};
pub use domain::{ContentDomain, Dataset, DiscreteDistribution, DistributionLiteral, Event};
pub use dp::{
    dp_beta, dp_beta_event_form, freq, private_histogram, required_k, symmetric_dp_beta, DpParams, NoisyHistogram,
};
pub use error::{Error, Result};
pub use learner::{ConstantLearner, EmpiricalLearner, Learner};
pub use naf::{
    censorship_report, feasibility_alpha, is_naf, naf_alpha, nfl_witness, safe_leave_one_out, safe_sharded, NafReport,
    SafeAssignment, SafeEntry,
};
pub use transform::{dp_transform, estimate_premise_alpha, prop1_experiment, simplex_project_linf, TransformConfig};
pub use tv::{min_envelope, tv_distance, tv_event_form};
