//! Ones plus many copies of `√n/i` and of small integers.
//!
//! Blocks, in index order: `⌈1000 log(i+1)⌉` copies of `round(√n/i)` for
//! `1 <= i <= ⌊n^{0.2}⌋`, then `⌈10 log n⌉` copies of each `j` in
//! `2..=⌊n^{0.3}⌋`, then ones (parity fixed).

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive};

use super::{
    ceil_guarded, need_param_list, seal, BlockCursor, CertificateFailure, CertificateOutcome,
    Family, Strategy,
};
use crate::error::{Error, Result};
use crate::sequence::{parity_fix, SignVector, WeightSequence};

/// Chebyshev multiplier: certificates give up when `|X| > L·σ`.
pub const DEFAULT_CHEBYSHEV_L: u64 = 20;

/// `⌊n^{p/q}⌋` exactly.
fn floor_power(n: u64, p: u32, q: u32) -> u64 {
    BigUint::from(n).pow(p).nth_root(q).to_u64().expect("fits")
}

/// `round(√n / i)`, halves rounded up.
fn round_sqrt_over(n: u64, i: u64) -> u64 {
    // round(√n/i) is the largest v with 2iv - i <= 2√n.
    let fits = |v: u64| {
        let lhs = 2 * i as i128 * v as i128 - i as i128;
        lhs <= 0 || lhs * lhs <= 4 * n as i128
    };
    let mut v = ((n as f64).sqrt() / i as f64).round() as u64;
    while fits(v + 1) {
        v += 1;
    }
    while v > 0 && !fits(v) {
        v -= 1;
    }
    v
}

pub fn janson_spencer(n: usize) -> Result<WeightSequence> {
    let nn = n as u64;
    if n < 2 {
        return Err(Error::Construction(format!(
            "janson_spencer needs n >= 2, got {n}"
        )));
    }
    let lg = (n as f64).log2();
    let i_max = floor_power(nn, 1, 5);
    let j_max = floor_power(nn, 3, 10);
    let values: Vec<u64> = (1..=i_max).map(|i| round_sqrt_over(nn, i)).collect();
    let copies: Vec<u64> = (1..=i_max)
        .map(|i| ceil_guarded(1000.0 * ((i + 1) as f64).log2()) as u64)
        .collect();
    let small_copies = ceil_guarded(10.0 * lg) as u64;
    let used = copies.iter().sum::<u64>() + j_max.saturating_sub(1) * small_copies;
    if used >= nn {
        return Err(Error::Construction(format!(
            "janson_spencer at n = {n}: {used} non-unit entries leave no ones"
        )));
    }
    let mut w: Vec<i64> = Vec::with_capacity(n);
    for (&v, &c) in values.iter().zip(&copies) {
        w.extend(std::iter::repeat_n(v as i64, c as usize));
    }
    for j in 2..=j_max {
        w.extend(std::iter::repeat_n(j as i64, small_copies as usize));
    }
    w.resize(n, 1);
    let a = WeightSequence::from_i64s(&w)?
        .with_name(Family::JansonSpencer.as_str())
        .with_param("i_max", i_max as usize)
        .with_param("sqrt_values", values.as_slice())
        .with_param("sqrt_copies", copies.as_slice())
        .with_param("small_max", j_max as usize)
        .with_param("small_copies", small_copies as usize)
        .with_param("ones_start", used as usize);
    parity_fix(&a)
}

/// Greedy descent: repeatedly flip the largest value `v <= |X|/2` whose sign
/// matches `X`, until `X = 0`.
#[derive(Clone, Debug)]
pub struct HarmonicCertifier<'a> {
    a: &'a WeightSequence,
    l: u64,
    sum_of_squares: BigInt,
    /// Value → run indices carrying it.
    groups: BTreeMap<i64, Vec<usize>>,
    budget: usize,
}

impl<'a> HarmonicCertifier<'a> {
    pub fn new(a: &'a WeightSequence, l: u64) -> Result<Self> {
        let sqrt_values = need_param_list(a, "sqrt_values")?;
        let w = a
            .small()
            .filter(|w| w.iter().all(|&v| v > 0))
            .ok_or_else(|| {
                Error::Misuse("harmonic certificate needs small positive weights".into())
            })?;
        let mut groups: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for (ri, run) in a.runs().iter().enumerate() {
            groups.entry(w[run.start]).or_default().push(ri);
        }
        let sum_of_squares = a.total_sum_of_squares();
        let sigma = sum_of_squares.to_f64().unwrap_or(f64::INFINITY).sqrt();
        let top = sqrt_values.iter().copied().max().unwrap_or(1).max(1) as f64;
        let lg = (a.len() as f64).log2();
        let budget = (l as f64 * sigma / (2.0 * top)).ceil() as usize
            + ceil_guarded(lg.log2().max(0.0)) as usize
            + 2;
        Ok(HarmonicCertifier {
            a,
            l,
            sum_of_squares,
            groups,
            budget,
        })
    }

    /// Reported size target `⌈Lσ/(2v_1)⌉ + ⌈log log n⌉ + 2`, with `v_1` the
    /// largest `√n/i` value. Informational only.
    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn certify(&self, xi: &SignVector) -> Result<CertificateOutcome> {
        let a = self.a;
        let x0 = a.evaluate(xi)?;
        let limit_sq = BigInt::from(self.l * self.l) * &self.sum_of_squares;
        if &x0 * &x0 > limit_sq {
            return Ok(CertificateOutcome::Failure(CertificateFailure::TooFar {
                magnitude: x0.abs(),
                limit: format!("L·σ with L = {}", self.l),
            }));
        }
        let mut x = x0.to_i128().expect("bounded by L·σ");
        let runs = a.runs();
        let mut cursors = vec![BlockCursor::default(); runs.len()];
        let mut flips = Vec::new();
        while x != 0 {
            let t = (x.abs() / 2) as i64;
            let plus = x > 0;
            let (&v, group) = self
                .groups
                .range(..=t)
                .next_back()
                .expect("ones are always present");
            let pos = group.iter().find_map(|&ri| {
                let run = runs[ri];
                cursors[ri].take(xi, run.start, run.end(), plus)
            });
            let Some(pos) = pos else {
                return Ok(CertificateOutcome::Failure(
                    CertificateFailure::MissingCopy {
                        value: v as u64,
                        plus,
                    },
                ));
            };
            flips.push(pos);
            x -= if plus { 2 * v as i128 } else { -2 * v as i128 };
        }
        seal(
            a,
            xi,
            flips,
            BigInt::from(0),
            Strategy::Harmonic,
            self.budget,
        )
    }
}

pub fn harmonic_certificate(a: &WeightSequence, xi: &SignVector) -> Result<CertificateOutcome> {
    harmonic_certificate_with(a, xi, DEFAULT_CHEBYSHEV_L)
}

pub fn harmonic_certificate_with(
    a: &WeightSequence,
    xi: &SignVector,
    l: u64,
) -> Result<CertificateOutcome> {
    HarmonicCertifier::new(a, l)?.certify(xi)
}
