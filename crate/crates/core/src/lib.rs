//! Resilience of Rademacher sums `X = Σ a_i ξ_i`.
//!
//! `R_x(ξ)` is the Hamming distance from `ξ` to the fiber `X^{-1}(x)`: the
//! fewest sign flips that force `X = x`.

pub mod basis;
pub mod error;
pub mod families;
pub mod scalar;
pub mod sequence;
pub mod solver;
pub mod stats;

pub use error::{Error, Result};
pub use sequence::{
    canonicalize, evaluate, evaluate_partial, parity_fix, IndexSet, Param, SignVector,
    WeightSequence,
};
pub use solver::{Resilience, ResilienceProfile, ResilienceResult, SolverConfig};
pub use stats::{
    berry_esseen_check, estimate_resilience_prob, max_atom_probability, sweep, EstimateReport,
    SweepConfig, SweepResult,
};
