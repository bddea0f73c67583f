use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::rng::sign_vector;
use crate::error::{Error, Result};
use crate::scalar::serde_int;
use crate::sequence::WeightSequence;
use crate::solver::{support_distribution_with, SolverConfig};

/// Most Monte Carlo samples a single call will draw.
pub const SAMPLE_LIMIT: u64 = 1 << 26;

/// How the distribution of `X` is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Mode {
    Exhaustive,
    MonteCarlo { samples: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerryEsseenStats {
    pub sigma: f64,
    pub rho: f64,
    #[serde(with = "serde_int")]
    pub sigma_squared: BigInt,
    #[serde(with = "serde_int")]
    pub rho_exact: BigInt,
    pub kolmogorov_distance: f64,
    /// `kolmogorov_distance / (ρ/σ³)`.
    pub ratio: f64,
    pub mode: Mode,
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

pub(crate) fn check_samples(samples: u64) -> Result<()> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    if samples > SAMPLE_LIMIT {
        return Err(Error::Resource {
            what: "Monte Carlo samples",
            size: samples as u128,
            limit: SAMPLE_LIMIT as u128,
        });
    }
    Ok(())
}

/// Sorted `(value, count)` atoms of `X`, plus the total count.
pub(crate) fn atoms(a: &WeightSequence, mode: Mode) -> Result<(Vec<(BigInt, u64)>, u64)> {
    match mode {
        Mode::Exhaustive => {
            let cfg = SolverConfig::default();
            let dist = support_distribution_with(a, &cfg)?;
            Ok((dist, 1u64 << a.len()))
        }
        Mode::MonteCarlo { samples, seed } => {
            check_samples(samples)?;
            let n = a.len();
            let mut values: Vec<BigInt> = (0..samples)
                .into_par_iter()
                .map(|i| {
                    a.evaluate(&sign_vector(seed, i, n))
                        .expect("length matches")
                })
                .collect();
            values.par_sort_unstable();
            let mut dist: Vec<(BigInt, u64)> = Vec::new();
            for v in values {
                match dist.last_mut() {
                    Some((last, c)) if *last == v => *c += 1,
                    _ => dist.push((v, 1)),
                }
            }
            Ok((dist, samples))
        }
    }
}

/// `sup_t |F(t) - Φ(t/σ)|` for a distribution with the given sorted atoms.
/// The supremum is attained at an atom, from one side or the other.
pub fn kolmogorov_distance(dist: &[(BigInt, u64)], total: u64, sigma: f64) -> f64 {
    let mut below = 0u64;
    let mut d = 0.0f64;
    for (v, c) in dist {
        let phi = normal_cdf(v.to_f64().unwrap_or(f64::NAN) / sigma);
        let left = below as f64 / total as f64;
        below += c;
        let right = below as f64 / total as f64;
        d = d.max((left - phi).abs()).max((right - phi).abs());
    }
    d
}

/// σ, ρ and the Kolmogorov distance between `X/σ` and the standard normal.
pub fn berry_esseen_check(a: &WeightSequence, mode: Mode) -> Result<BerryEsseenStats> {
    let sigma_squared = a.total_sum_of_squares();
    let rho_exact = a.abs_cube_sum();
    let sigma = sigma_squared.to_f64().unwrap_or(f64::INFINITY).sqrt();
    let rho = rho_exact.to_f64().unwrap_or(f64::INFINITY);
    let (dist, total) = atoms(a, mode)?;
    let kolmogorov_distance = kolmogorov_distance(&dist, total, sigma);
    Ok(BerryEsseenStats {
        sigma,
        rho,
        sigma_squared,
        rho_exact,
        kolmogorov_distance,
        ratio: kolmogorov_distance / (rho / sigma.powi(3)),
        mode,
    })
}
