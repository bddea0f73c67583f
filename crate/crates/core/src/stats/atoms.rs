use num_bigint::BigInt;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::berry_esseen::{atoms, Mode};
use super::estimate::wilson_interval;
use crate::error::Result;
use crate::scalar::{serde_int, serde_ratio};
use crate::sequence::WeightSequence;

/// Largest point mass `max_x Pr[X = x]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AtomProbability {
    Exact {
        #[serde(with = "serde_ratio")]
        value: Ratio<u64>,
        /// Smallest value attaining the maximum.
        #[serde(with = "serde_int")]
        atom: BigInt,
        ties: usize,
    },
    Estimate {
        #[serde(with = "serde_ratio")]
        value: Ratio<u64>,
        #[serde(with = "serde_int")]
        atom: BigInt,
        hits: u64,
        samples: u64,
        ci_low: f64,
        ci_high: f64,
        seed: u64,
    },
}

impl AtomProbability {
    pub fn value(&self) -> Ratio<u64> {
        match self {
            AtomProbability::Exact { value, .. } | AtomProbability::Estimate { value, .. } => {
                *value
            }
        }
    }

    pub fn atom(&self) -> &BigInt {
        match self {
            AtomProbability::Exact { atom, .. } | AtomProbability::Estimate { atom, .. } => atom,
        }
    }
}

pub fn max_atom_probability(a: &WeightSequence, mode: Mode) -> Result<AtomProbability> {
    let (dist, total) = atoms(a, mode)?;
    let top = dist.iter().map(|d| d.1).max().expect("nonempty support");
    let mut hits = dist.iter().filter(|d| d.1 == top);
    let atom = hits.next().expect("max exists").0.clone();
    let ties = 1 + hits.count();
    let value = Ratio::new(top, total);
    Ok(match mode {
        Mode::Exhaustive => AtomProbability::Exact { value, atom, ties },
        Mode::MonteCarlo { samples, seed } => {
            let (ci_low, ci_high) = wilson_interval(top, samples);
            AtomProbability::Estimate {
                value,
                atom,
                hits: top,
                samples,
                ci_low,
                ci_high,
                seed,
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(w: &[i64]) -> AtomProbability {
        max_atom_probability(&WeightSequence::from_i64s(w).unwrap(), Mode::Exhaustive).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(exact(&[1, 1, 1, 1]).value(), Ratio::new(6, 16));
        assert_eq!(exact(&[1, 2, 4, 8]).value(), Ratio::new(1, 16));
        assert_eq!(exact(&[1]).value(), Ratio::new(1, 2));
        match exact(&[1]) {
            AtomProbability::Exact { atom, ties, .. } => {
                assert_eq!(atom, BigInt::from(-1));
                assert_eq!(ties, 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn monte_carlo_top_atom() {
        let a = WeightSequence::from_i64s(&[1; 10]).unwrap();
        let r = max_atom_probability(
            &a,
            Mode::MonteCarlo {
                samples: 100_000,
                seed: 2,
            },
        )
        .unwrap();
        assert_eq!(r.atom(), &BigInt::from(0));
        match r {
            AtomProbability::Estimate {
                ci_low, ci_high, ..
            } => {
                let p = 252.0 / 1024.0;
                assert!(ci_low <= p && p <= ci_high);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn scale_invariance() {
        assert_eq!(
            exact(&[1, 3, 4, 4, 9]).value(),
            exact(&[-5, -15, -20, -20, -45]).value()
        );
    }
}
