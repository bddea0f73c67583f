//! Sampling estimates of `Pr[R_x <= k]`, scaling sweeps, and normal
//! approximation diagnostics.

pub mod atoms;
pub mod berry_esseen;
pub mod estimate;
pub mod rng;
pub mod sweep;

pub use atoms::{max_atom_probability, AtomProbability};
pub use berry_esseen::{
    berry_esseen_check, kolmogorov_distance, normal_cdf, BerryEsseenStats, Mode,
};
pub use estimate::{
    estimate_resilience_prob, exact_resilience_prob, wilson_interval, EstimateReport, Method,
};
pub use sweep::{fit_line, sweep, LogLogFit, SweepConfig, SweepResult, SweepRow};
