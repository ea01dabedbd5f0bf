//! Joint bit-precision and MCS selection for the two token classes.
//!
//! Candidates are generated per class from the profile's precision and MCS
//! sets, filtered by SNR activation thresholds, and costed per token. The
//! selection problem has one pick per class, so it is solved exactly by
//! enumerating every `(intended, non-intended)` pair.

mod bler;
mod candidate;
mod mcs;
mod optimize;
mod profile;

pub use bler::BlerTable;
pub use candidate::{distortion, generate_candidates, per_token_costs, spectral_efficiency, Candidate};
pub use mcs::McsScheme;
pub use optimize::{
    optimize, solve, AdaptationPlan, ClassCounts, Constraint, Infeasible, NormBounds, SelectionProblem,
    NORMALIZATION_EPSILON,
};
pub use profile::{BlerCapSchedule, CapStep, DistortionModel, LinkProfile, PduParams, PerClass, Weights};
