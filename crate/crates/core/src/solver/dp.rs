use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::{Resilience, ResilienceResult, SolverConfig};
use crate::error::{Error, Result};
use crate::sequence::{IndexSet, SignVector, WeightSequence};

const UNREACHED: u16 = u16::MAX;

/// Flip-sum contributions `a_i ξ_i` and their absolute total.
fn contributions(a: &WeightSequence, xi: &SignVector) -> Result<(Vec<i64>, i64)> {
    if xi.len() != a.len() {
        return Err(Error::Dimension {
            what: "sign vector",
            expected: a.len(),
            got: xi.len(),
        });
    }
    let w = a.small().ok_or(Error::Resource {
        what: "absolute weight sum for the DP table",
        size: a.abs_sum().to_u128().unwrap_or(u128::MAX),
        limit: 1 << 61,
    })?;
    if a.len() >= UNREACHED as usize {
        return Err(Error::Resource {
            what: "sequence length for the DP table",
            size: a.len() as u128,
            limit: UNREACHED as u128 - 1,
        });
    }
    let c: Vec<i64> = w.iter().enumerate().map(|(i, &w)| w * xi.sign(i)).collect();
    let abs: i64 = w.iter().map(|w| w.abs()).sum();
    Ok((c, abs))
}

/// Relaxes `layer` in place with one more optional item of value `c`.
fn relax(layer: &mut [u16], c: i64) {
    let width = layer.len();
    let shift = c.unsigned_abs() as usize;
    if shift >= width {
        return;
    }
    if c > 0 {
        for s in (shift..width).rev() {
            let cand = layer[s - shift].saturating_add(1);
            if cand < layer[s] {
                layer[s] = cand;
            }
        }
    } else {
        for s in 0..width - shift {
            let cand = layer[s + shift].saturating_add(1);
            if cand < layer[s] {
                layer[s] = cand;
            }
        }
    }
}

/// `(X - x) / 2` as a table offset, or `None` when no flip set can reach it.
fn target_offset(current: i64, x: &BigInt, abs: i64) -> Option<usize> {
    let x = x.to_i64()?;
    let diff = current as i128 - x as i128;
    if diff % 2 != 0 {
        return None;
    }
    let t = diff / 2;
    if t.abs() > abs as i128 {
        return None;
    }
    Some((t + abs as i128) as usize)
}

/// Minimum flip count for every target at once, for a fixed `ξ`.
#[derive(Clone, Debug)]
pub struct FlipTable {
    abs_sum: i64,
    current: i64,
    min_flips: Vec<u16>,
}

impl FlipTable {
    /// `X(ξ)` for the sign vector the table was built from.
    pub fn current_sum(&self) -> i64 {
        self.current
    }

    pub fn resilience(&self, x: &BigInt) -> Resilience {
        match target_offset(self.current, x, self.abs_sum) {
            Some(off) if self.min_flips[off] != UNREACHED => {
                Resilience::Finite(self.min_flips[off] as usize)
            }
            _ => Resilience::Infinite,
        }
    }
}

/// Builds the single-layer table of minimum subset cardinalities over all
/// flip sums in `[-Σ|a_i|, Σ|a_i|]`.
pub fn flip_table(a: &WeightSequence, xi: &SignVector, cfg: &SolverConfig) -> Result<FlipTable> {
    let (c, abs) = contributions(a, xi)?;
    let width = 2 * abs as u64 + 1;
    if width > cfg.dp_cell_limit {
        return Err(Error::Resource {
            what: "DP table cells",
            size: width as u128,
            limit: cfg.dp_cell_limit as u128,
        });
    }
    let mut layer = vec![UNREACHED; width as usize];
    layer[abs as usize] = 0;
    for &ci in &c {
        relax(&mut layer, ci);
    }
    let current = c.iter().sum();
    Ok(FlipTable {
        abs_sum: abs,
        current,
        min_flips: layer,
    })
}

pub fn resilience_dp(a: &WeightSequence, xi: &SignVector, x: &BigInt) -> Result<ResilienceResult> {
    resilience_dp_with(a, xi, x, &SolverConfig::default())
}

/// Exact `R_x(ξ)` with the lexicographically smallest minimum flip set.
///
/// Keeps one suffix layer per position (`layer[i]` uses items `i..n`) so the
/// witness can be rebuilt front to back, taking an index whenever doing so
/// still completes a minimum-size set.
pub fn resilience_dp_with(
    a: &WeightSequence,
    xi: &SignVector,
    x: &BigInt,
    cfg: &SolverConfig,
) -> Result<ResilienceResult> {
    let (c, abs) = contributions(a, xi)?;
    let current: i64 = c.iter().sum();
    let Some(target) = target_offset(current, x, abs) else {
        return Ok(ResilienceResult::infinite());
    };
    let n = c.len();
    let width = 2 * abs as usize + 1;
    let cells = (n as u128 + 1) * width as u128;
    if cells > cfg.dp_cell_limit as u128 {
        return Err(Error::Resource {
            what: "DP table cells",
            size: cells,
            limit: cfg.dp_cell_limit as u128,
        });
    }

    let mut layers = vec![UNREACHED; (n + 1) * width];
    layers[n * width + abs as usize] = 0;
    for i in (0..n).rev() {
        let (head, tail) = layers.split_at_mut((i + 1) * width);
        let cur = &mut head[i * width..];
        cur.copy_from_slice(&tail[..width]);
        relax(cur, c[i]);
    }

    let best = layers[target];
    if best == UNREACHED {
        return Ok(ResilienceResult::infinite());
    }
    let mut witness = Vec::with_capacity(best as usize);
    let mut s = target as i64;
    let mut need = best;
    for (i, &ci) in c.iter().enumerate() {
        if need == 0 {
            break;
        }
        let rest = s - ci;
        if rest >= 0 && (rest as usize) < width {
            let next = layers[(i + 1) * width + rest as usize];
            if next != UNREACHED && next + 1 == need {
                witness.push(i);
                s = rest;
                need -= 1;
            }
        }
    }
    debug_assert_eq!(need, 0);
    Ok(ResilienceResult::finite(IndexSet::new(witness, n)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(w: &[i64]) -> WeightSequence {
        WeightSequence::from_i64s(w).unwrap()
    }

    fn signs(s: &str) -> SignVector {
        s.parse().unwrap()
    }

    #[test]
    fn all_ones_needs_half_of_sum() {
        let r = resilience_dp(&seq(&[1, 1, 1, 1]), &signs("++++"), &0.into()).unwrap();
        assert_eq!(r.value, Resilience::Finite(2));
        assert_eq!(r.witness.unwrap().as_slice(), &[0, 1]);
    }

    #[test]
    fn already_at_target() {
        let r = resilience_dp(&seq(&[1, 2, 4]), &signs("+++"), &7.into()).unwrap();
        assert_eq!(r.value, Resilience::Finite(0));
        assert!(r.witness.unwrap().is_empty());
    }

    #[test]
    fn single_flip_witness() {
        // Exhaustive over the 8 flip subsets: only {first} moves 7 to 5.
        let r = resilience_dp(&seq(&[1, 2, 4]), &signs("+++"), &5.into()).unwrap();
        assert_eq!(r.value, Resilience::Finite(1));
        assert_eq!(r.witness.unwrap().one_based(), vec![1]);
    }

    #[test]
    fn parity_obstruction_is_infinite() {
        let r = resilience_dp(&seq(&[1, 2, 4]), &signs("+++"), &6.into()).unwrap();
        assert_eq!(r, ResilienceResult::infinite());
    }

    #[test]
    fn out_of_range_target_is_infinite() {
        let r = resilience_dp(&seq(&[1, 1]), &signs("+-"), &BigInt::from(10).pow(30)).unwrap();
        assert!(r.value.is_infinite());
    }

    #[test]
    fn lowest_index_tie_break() {
        // X = 1; any two of the four +1s bring it to -3. The first pair wins.
        let r = resilience_dp(&seq(&[3, 1, 1, 1, 1]), &signs("-++++"), &(-3).into()).unwrap();
        assert_eq!(r.value, Resilience::Finite(2));
        assert_eq!(r.witness.unwrap().as_slice(), &[1, 2]);
    }

    #[test]
    fn dimension_error() {
        assert!(matches!(
            resilience_dp(&seq(&[1, 2]), &signs("+"), &0.into()),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn cell_limit_is_enforced() {
        let cfg = SolverConfig {
            dp_cell_limit: 10,
            ..SolverConfig::default()
        };
        let err = resilience_dp_with(&seq(&[5, 5]), &signs("++"), &0.into(), &cfg).unwrap_err();
        assert!(matches!(err, Error::Resource { .. }));
    }

    #[test]
    fn table_agrees_with_witnessed_dp() {
        let a = seq(&[3, -1, 4, 1, -5, 9, 2, 6]);
        for v in 0u64..256 {
            let xi = SignVector::from_vertex(v, 8);
            let table = flip_table(&a, &xi, &SolverConfig::default()).unwrap();
            for x in -31..=31 {
                let x = BigInt::from(x);
                assert_eq!(
                    table.resilience(&x),
                    resilience_dp(&a, &xi, &x).unwrap().value
                );
            }
        }
    }
}
