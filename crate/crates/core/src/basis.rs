//! Order-`h` additive bases of `[n] = {1, …, n}`.
//!
//! `B` is an order-`h` basis of `[n]` when every `x ∈ [n]` is a sum of at most
//! `h` distinct elements of `B`.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::Pow;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest range accepted by [`optimal_basis_bruteforce`].
pub const BRUTEFORCE_LIMIT: u64 = 24;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdditiveBasis {
    /// Sorted, distinct, positive.
    pub elements: Vec<u64>,
    pub order: u32,
    pub range: u64,
    pub sum_of_squares: u128,
}

impl AdditiveBasis {
    fn from_sorted(elements: Vec<u64>, order: u32, range: u64) -> Self {
        let sum_of_squares = elements.iter().map(|&b| b as u128 * b as u128).sum();
        AdditiveBasis {
            elements,
            order,
            range,
            sum_of_squares,
        }
    }

    pub fn verify(&self) -> bool {
        verify_basis(&self.elements, self.order, self.range)
    }
}

fn check_args(h: u32, n: u64) -> Result<()> {
    if h == 0 {
        return Err(Error::InvalidParameter(
            "basis order must be at least 1".into(),
        ));
    }
    if n == 0 {
        return Err(Error::InvalidParameter(
            "basis range must be at least 1".into(),
        ));
    }
    Ok(())
}

/// `⌈n^{2·3^{h-1}/(3^h-1)}⌉`, computed with integer roots.
pub fn layer_width(h: u32, n: u64) -> u64 {
    assert!(h >= 2);
    let p = 2 * 3u32.pow(h - 1);
    let q = 3u32.pow(h) - 1;
    let power = BigUint::from(n).pow(p);
    let mut m = power.nth_root(q);
    if m.clone().pow(q) < power {
        m += 1u32;
    }
    u64::try_from(m).expect("root of a u64 power fits in u64")
}

/// Recursive construction `B = [m] ∪ m·B'` with `B'` an order-`(h-1)` basis
/// of `[⌊n/m⌋]`. Falls back to `[n]` whenever `m >= n`.
pub fn build_basis(h: u32, n: u64) -> Result<AdditiveBasis> {
    check_args(h, n)?;
    Ok(AdditiveBasis::from_sorted(build(h, n), h, n))
}

fn build(h: u32, n: u64) -> Vec<u64> {
    if h == 1 {
        return (1..=n).collect();
    }
    let m = layer_width(h, n);
    if m >= n {
        return (1..=n).collect();
    }
    let inner = n / m;
    let mut out: Vec<u64> = (1..=m).collect();
    if inner > 0 {
        out.extend(
            build(h - 1, inner)
                .into_iter()
                .map(|b| b * m)
                .filter(|&v| v > m),
        );
    }
    out
}

/// Minimum number of distinct elements of `set` summing to each value in
/// `0..=n`; `u8::MAX` where impossible.
fn min_counts(set: &[u64], n: u64) -> Vec<u8> {
    let n = n as usize;
    let mut dp = vec![u8::MAX; n + 1];
    dp[0] = 0;
    let mut seen = set.to_vec();
    seen.sort_unstable();
    seen.dedup();
    for &b in seen.iter().filter(|&&b| b >= 1 && b as usize <= n) {
        let b = b as usize;
        for v in (b..=n).rev() {
            let cand = dp[v - b].saturating_add(1);
            if cand < dp[v] {
                dp[v] = cand;
            }
        }
    }
    dp
}

/// True iff every `x ∈ [n]` is a sum of at most `h` distinct elements of `set`.
pub fn verify_basis(set: &[u64], h: u32, n: u64) -> bool {
    min_counts(set, n)[1..].iter().all(|&c| (c as u32) <= h)
}

/// Rebuilds minimum-size distinct representations `x = b_1 + … + b_t`.
#[derive(Clone, Debug)]
pub struct BasisRepresenter {
    elements: Vec<u64>,
    range: usize,
    /// `layers[i][v]`: fewest distinct elements from `elements[i..]` summing to `v`.
    layers: Vec<u8>,
}

impl BasisRepresenter {
    pub fn new(basis: &AdditiveBasis) -> Self {
        Self::from_elements(&basis.elements, basis.range)
    }

    /// `elements` must be sorted and distinct.
    pub fn from_elements(elements: &[u64], range: u64) -> Self {
        let elements = elements.to_vec();
        let range = range as usize;
        let width = range + 1;
        let k = elements.len();
        let mut layers = vec![u8::MAX; (k + 1) * width];
        layers[k * width] = 0;
        for i in (0..k).rev() {
            let (head, tail) = layers.split_at_mut((i + 1) * width);
            let cur = &mut head[i * width..];
            cur.copy_from_slice(&tail[..width]);
            let b = elements[i] as usize;
            if b <= range {
                for v in b..=range {
                    let cand = tail[v - b].saturating_add(1);
                    if cand < cur[v] {
                        cur[v] = cand;
                    }
                }
            }
        }
        BasisRepresenter {
            elements,
            range,
            layers,
        }
    }

    /// Distinct elements summing to `x`, fewest possible, smallest elements
    /// preferred. `None` when `x` is out of range or not representable.
    pub fn represent(&self, x: u64) -> Option<Vec<u64>> {
        let width = self.range + 1;
        let mut v = usize::try_from(x).ok().filter(|&v| v <= self.range)?;
        let mut need = self.layers[v];
        if need == u8::MAX {
            return None;
        }
        let mut out = Vec::with_capacity(need as usize);
        for (i, &b) in self.elements.iter().enumerate() {
            if need == 0 {
                break;
            }
            let b = b as usize;
            if b <= v && self.layers[(i + 1) * width + v - b].saturating_add(1) == need {
                out.push(b as u64);
                v -= b;
                need -= 1;
            }
        }
        Some(out)
    }
}

/// A minimum sum-of-squares order-`h` basis of `[n]` by exhaustive search.
/// Among optima the lexicographically smallest element list is returned.
pub fn optimal_basis_bruteforce(h: u32, n: u64) -> Result<AdditiveBasis> {
    check_args(h, n)?;
    if n > BRUTEFORCE_LIMIT {
        return Err(Error::Resource {
            what: "brute-force basis range",
            size: n as u128,
            limit: BRUTEFORCE_LIMIT as u128,
        });
    }
    let mut search = Brute {
        h: h.min(u8::MAX as u32 - 1) as u8,
        n: n as usize,
        chosen: Vec::new(),
        best: None,
    };
    let mut dp = vec![u8::MAX; n as usize + 1];
    dp[0] = 0;
    search.dfs(1, &dp, 0);
    let (elements, _) = search.best.expect("[n] is always a basis");
    Ok(AdditiveBasis::from_sorted(elements, h, n))
}

struct Brute {
    h: u8,
    n: usize,
    chosen: Vec<u64>,
    best: Option<(Vec<u64>, u128)>,
}

impl Brute {
    /// Elements below `pos` are decided; `dp` holds their min-count table.
    fn dfs(&mut self, pos: usize, dp: &[u8], cost: u128) {
        // Nothing at or above `pos` can help represent `pos - 1`.
        if pos > 1 && dp[pos - 1] > self.h {
            return;
        }
        if self.best.as_ref().is_some_and(|(_, b)| cost >= *b) {
            return;
        }
        if pos > self.n {
            self.best = Some((self.chosen.clone(), cost));
            return;
        }
        let mut with = dp.to_vec();
        for v in (pos..=self.n).rev() {
            let cand = with[v - pos].saturating_add(1);
            if cand < with[v] {
                with[v] = cand;
            }
        }
        self.chosen.push(pos as u64);
        self.dfs(pos + 1, &with, cost + (pos * pos) as u128);
        self.chosen.pop();
        self.dfs(pos + 1, dp, cost);
    }
}

/// `2 + 2/(3^h - 1)`, the exponent in the sum-of-squares bound.
pub fn bound_exponent(h: u32) -> Ratio<u64> {
    let t = 3u64.pow(h);
    Ratio::new(2 * t, t - 1)
}

/// Exact check of `Σ b² <= 10^h · n^{2·3^h/(3^h-1)}` by raising both sides
/// to the power `3^h - 1`.
pub fn lemma_bound_holds(basis: &AdditiveBasis) -> bool {
    let h = basis.order;
    let q = 3u32.pow(h) - 1;
    let p = 2 * 3u32.pow(h);
    let lhs = BigUint::from(basis.sum_of_squares).pow(q);
    let rhs = BigUint::from(10u32).pow(h * q) * BigUint::from(basis.range).pow(p);
    lhs <= rhs
}

/// `10^h · n^{2+2/(3^h-1)}` in floating point, for display only.
pub fn lemma_bound_f64(h: u32, n: u64) -> f64 {
    let e = bound_exponent(h);
    10f64.powi(h as i32) * (n as f64).powf(*e.numer() as f64 / *e.denom() as f64)
}
