use num_bigint::BigInt;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::sign_vector;
use crate::error::{Error, Result};
use crate::scalar::{serde_int, serde_ratio};
use crate::sequence::WeightSequence;
use crate::solver::{hypercube_profile_with, FlipSearch, SolverConfig};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExactExhaustive,
    MonteCarlo,
}

/// `Pr[R_x <= k]` with a 95% Wilson interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    #[serde(with = "serde_ratio")]
    pub estimate: Ratio<u64>,
    pub hits: u64,
    pub samples: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    pub k: usize,
    #[serde(with = "serde_int")]
    pub x: BigInt,
    pub method: Method,
}

impl EstimateReport {
    pub fn estimate_f64(&self) -> f64 {
        *self.estimate.numer() as f64 / *self.estimate.denom() as f64
    }

    pub fn contains(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }
}

/// 95% Wilson score interval for `hits` successes out of `samples`, clamped
/// so that it always contains the point estimate.
pub fn wilson_interval(hits: u64, samples: u64) -> (f64, f64) {
    assert!(samples > 0 && hits <= samples);
    let n = samples as f64;
    let p = hits as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let low = (center - half).max(0.0).min(p);
    let high = (center + half).min(1.0).max(p);
    (low, high)
}

/// Monte Carlo estimate of `Pr[R_x <= k]` from `samples` seeded sign vectors.
pub fn estimate_resilience_prob(
    a: &WeightSequence,
    x: &BigInt,
    k: usize,
    samples: u64,
    seed: u64,
) -> Result<EstimateReport> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    let n = a.len();
    let hits: u64 = (0..samples)
        .into_par_iter()
        .map(|i| {
            let xi = sign_vector(seed, i, n);
            let mut search = FlipSearch::new(a, &xi, k).expect("length matches by construction");
            search.query(x).within(k) as u64
        })
        .sum();
    let (ci_low, ci_high) = wilson_interval(hits, samples);
    Ok(EstimateReport {
        estimate: Ratio::new(hits, samples),
        hits,
        samples,
        ci_low,
        ci_high,
        seed,
        k,
        x: x.clone(),
        method: Method::MonteCarlo,
    })
}

/// Exact `Pr[R_x <= k]` over all `2^n` sign vectors, as a degenerate report.
pub fn exact_resilience_prob(
    a: &WeightSequence,
    x: &BigInt,
    k: usize,
    cfg: &SolverConfig,
) -> Result<EstimateReport> {
    let profile = hypercube_profile_with(a, x, cfg)?;
    let hits = profile.count_at_most(k);
    let samples = 1u64 << a.len();
    let p = hits as f64 / samples as f64;
    Ok(EstimateReport {
        estimate: Ratio::new(hits, samples),
        hits,
        samples,
        ci_low: p,
        ci_high: p,
        seed: 0,
        k,
        x: x.clone(),
        method: Method::ExactExhaustive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(w: &[i64]) -> WeightSequence {
        WeightSequence::from_i64s(w).unwrap()
    }

    #[test]
    fn wilson_known_values() {
        // 0 of 10: upper end is z²/(n + z²).
        let (lo, hi) = wilson_interval(0, 10);
        assert_eq!(lo, 0.0);
        assert!((hi - Z95 * Z95 / (10.0 + Z95 * Z95)).abs() < 1e-12);
        // 5 of 10 is symmetric about one half.
        let (lo, hi) = wilson_interval(5, 10);
        assert!((lo + hi - 1.0).abs() < 1e-12);
        assert!((lo - 0.236593090).abs() < 1e-6);
        let (lo, hi) = wilson_interval(10, 10);
        assert_eq!(hi, 1.0);
        assert!(lo < 1.0);
    }

    #[test]
    fn four_ones_zero_flips() {
        let r =
            estimate_resilience_prob(&seq(&[1, 1, 1, 1]), &BigInt::from(0), 0, 1 << 16, 1).unwrap();
        assert!(r.contains(6.0 / 16.0), "{r:?}");
        assert_eq!(r.method, Method::MonteCarlo);
        let again =
            estimate_resilience_prob(&seq(&[1, 1, 1, 1]), &BigInt::from(0), 0, 1 << 16, 1).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn full_depth_is_certain() {
        let a = seq(&[3, 1, 4, 1, 5]);
        let r = estimate_resilience_prob(&a, &BigInt::from(2), 5, 500, 9).unwrap();
        assert_eq!(r.estimate, Ratio::from_integer(1));
    }

    #[test]
    fn single_sample() {
        let r = estimate_resilience_prob(&seq(&[1, 1]), &BigInt::from(0), 0, 1, 4).unwrap();
        assert!(r.hits <= 1);
        assert!(r.ci_high - r.ci_low > 0.5);
        assert!(estimate_resilience_prob(&seq(&[1]), &BigInt::from(0), 0, 0, 4).is_err());
    }

    #[test]
    fn thread_count_does_not_matter() {
        let a = seq(&[1, 2, 2, 3, 5, 8, 1, 1, 1, 4]);
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let r1 =
            one.install(|| estimate_resilience_prob(&a, &BigInt::from(0), 1, 5000, 3).unwrap());
        let r4 =
            four.install(|| estimate_resilience_prob(&a, &BigInt::from(0), 1, 5000, 3).unwrap());
        assert_eq!(r1, r4);
    }

    #[test]
    fn exact_report_is_degenerate() {
        let r = exact_resilience_prob(
            &seq(&[1, 1, 1, 1]),
            &BigInt::from(0),
            0,
            &SolverConfig::default(),
        )
        .unwrap();
        assert_eq!(r.estimate, Ratio::new(6, 16));
        assert_eq!(r.ci_low, r.ci_high);
        assert_eq!(r.method, Method::ExactExhaustive);
    }
}
