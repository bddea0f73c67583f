//! Exact resilience `R_x(ξ) = d(ξ, X^{-1}(x))`.
//!
//! Three independent routes compute the same quantity:
//!
//! * [`resilience_dp`]: minimum-cardinality signed subset sum over a dense table,
//! * [`resilience_bounded`]: iterative deepening with a meet-in-the-middle join,
//! * [`hypercube_profile`]: Gray-code sweep plus multi-source BFS over `{-1,+1}^n`.
//!
//! All three rest on the flip identity: flipping the positions `S` of `ξ`
//! changes `X` by `-2 Σ_{i∈S} a_i ξ_i`, so `R_x(ξ)` is the smallest `|S|` with
//! `Σ_{i∈S} a_i ξ_i = (X(ξ) - x) / 2`.

mod bounded;
mod classes;
mod dp;
mod hypercube;
mod qk;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::scalar::serde_int;
use crate::sequence::IndexSet;

pub use bounded::{resilience_bounded, BoundedOutcome, FlipSearch};
pub use dp::{flip_table, resilience_dp, resilience_dp_with, FlipTable};
pub use hypercube::{
    fiber_distances, fiber_distances_with, gray_sweep, hypercube_profile, hypercube_profile_with,
    support_distribution, support_distribution_with, DistanceMap,
};
pub use qk::{qk_exact, qk_exact_with, QkResult};

/// Resource limits shared by the exhaustive and table-based routines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    /// Largest `n` for which `2^n` sign vectors are enumerated.
    pub exhaustive_limit: u32,
    /// Largest number of cells a DP table may hold.
    pub dp_cell_limit: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            exhaustive_limit: 26,
            dp_cell_limit: 1 << 27,
        }
    }
}

/// A flip distance, or `Infinite` when the target is outside the support of `X`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Resilience {
    Finite(usize),
    Infinite,
}

impl Resilience {
    pub fn finite(self) -> Option<usize> {
        match self {
            Resilience::Finite(d) => Some(d),
            Resilience::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == Resilience::Infinite
    }
}

impl fmt::Display for Resilience {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resilience::Finite(d) => write!(f, "{d}"),
            Resilience::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Resilience {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Resilience::Finite(d) => s.serialize_u64(*d as u64),
            Resilience::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Resilience {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(u64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Resilience::Finite(v as usize)),
            Repr::Text(t) if t == "inf" => Ok(Resilience::Infinite),
            Repr::Text(t) => Err(serde::de::Error::custom(format!(
                "expected a count or \"inf\", got {t:?}"
            ))),
        }
    }
}

/// `R_x(ξ)` together with a minimum flip set when finite.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResilienceResult {
    pub value: Resilience,
    pub witness: Option<IndexSet>,
}

impl ResilienceResult {
    pub fn infinite() -> Self {
        ResilienceResult {
            value: Resilience::Infinite,
            witness: None,
        }
    }

    pub fn finite(witness: IndexSet) -> Self {
        ResilienceResult {
            value: Resilience::Finite(witness.len()),
            witness: Some(witness),
        }
    }
}

/// Exact distribution of `R_x` over all `2^n` sign vectors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResilienceProfile {
    #[serde(with = "serde_int")]
    pub target: BigInt,
    pub n: usize,
    /// Distance → number of sign vectors at that distance. Empty when the
    /// target is unachievable.
    pub counts: BTreeMap<u32, u64>,
}

impl ResilienceProfile {
    pub fn is_achievable(&self) -> bool {
        !self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn count_at_most(&self, k: usize) -> u64 {
        self.counts
            .range(..=(k.min(u32::MAX as usize) as u32))
            .map(|(_, c)| c)
            .sum()
    }

    /// `Pr[R_x <= k]` with denominator `2^n`.
    pub fn prob_at_most(&self, k: usize) -> Ratio<u64> {
        Ratio::new(self.count_at_most(k), 1u64 << self.n)
    }

    pub fn max_distance(&self) -> Option<u32> {
        self.counts.keys().next_back().copied()
    }

    /// Size of the fiber `X^{-1}(x)`.
    pub fn fiber_size(&self) -> u64 {
        self.counts.get(&0).copied().unwrap_or(0)
    }
}
