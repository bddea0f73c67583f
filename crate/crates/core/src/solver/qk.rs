use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use super::hypercube::{ball_volume, check_dimension, new_scratch, vertex_values};
use super::SolverConfig;
use crate::error::{Error, Result};
use crate::scalar::{serde_int, serde_ratio, Scalar};
use crate::sequence::{WeightSequence, WeightsView};

/// `q_k(a) = max_x Pr[R_x <= k]` over the requested targets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QkResult {
    pub k: usize,
    pub n: usize,
    #[serde(with = "serde_ratio")]
    pub value: Ratio<u64>,
    /// Number of sign vectors within distance `k` of the maximizing fiber.
    pub ball_size: u64,
    /// Smallest maximizing target.
    #[serde(with = "serde_int")]
    pub argmax: BigInt,
    /// Number of targets attaining the maximum, `argmax` included.
    pub ties: u64,
}

pub fn qk_exact(a: &WeightSequence, k: usize, candidates: Option<&[BigInt]>) -> Result<QkResult> {
    qk_exact_with(a, k, candidates, &SolverConfig::default())
}

/// Exact `q_k(a)`. Without `candidates` every atom of `X` is a target.
///
/// Negating `ξ` maps the fiber of `x` onto the fiber of `-x` isometrically,
/// so only targets `x >= 0` are expanded.
pub fn qk_exact_with(
    a: &WeightSequence,
    k: usize,
    candidates: Option<&[BigInt]>,
    cfg: &SolverConfig,
) -> Result<QkResult> {
    check_dimension(a.len(), cfg)?;
    if candidates.is_some_and(|c| c.is_empty()) {
        return Err(Error::InvalidParameter("empty candidate list".into()));
    }
    let volumes = match a.view() {
        WeightsView::Small(w) => fiber_volumes(w, k, candidates),
        WeightsView::Big(w) => fiber_volumes(w, k, candidates),
    };

    let n = a.len();
    let mut best: Option<(u64, BigInt, u64)> = None;
    for (x, vol) in volumes {
        match &mut best {
            Some((b, arg, ties)) if vol == *b => {
                *ties += 1;
                if x < *arg {
                    *arg = x;
                }
            }
            Some((b, _, _)) if vol < *b => {}
            _ => best = Some((vol, x, 1)),
        }
    }
    let (ball_size, argmax, ties) = best.expect("at least one target");
    Ok(QkResult {
        k,
        n,
        value: Ratio::new(ball_size, 1u64 << n),
        ball_size,
        argmax,
        ties,
    })
}

/// Ball volume around each target's fiber, one entry per target (both signs).
fn fiber_volumes<T: Scalar>(
    weights: &[T],
    k: usize,
    candidates: Option<&[BigInt]>,
) -> Vec<(BigInt, u64)> {
    let n = weights.len();
    let values = vertex_values(weights);
    let mut order: Vec<u32> = (0..values.len() as u32).collect();
    order.sort_unstable_by(|&u, &v| values[u as usize].cmp(&values[v as usize]));

    let mut fibers: Vec<(T, &[u32])> = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let x = &values[order[start] as usize];
        let mut end = start + 1;
        while end < order.len() && values[order[end] as usize] == *x {
            end += 1;
        }
        fibers.push((x.clone(), &order[start..end]));
        start = end;
    }
    let fiber_of = |x: &T| {
        fibers
            .binary_search_by(|(v, _)| v.cmp(x))
            .map(|i| fibers[i].1)
            .unwrap_or(&[])
    };

    let targets: Vec<BigInt> = match candidates {
        Some(c) => {
            let mut c = c.to_vec();
            c.sort();
            c.dedup();
            c
        }
        None => fibers.iter().map(|(v, _)| v.to_big()).collect(),
    };

    let mut scratch = new_scratch(n);
    let mut cache: Vec<(BigInt, u64)> = Vec::new();
    let mut out = Vec::with_capacity(targets.len());
    for x in targets {
        let key = x.abs();
        let vol = match cache.binary_search_by(|(v, _)| v.cmp(&key)) {
            Ok(i) => cache[i].1,
            Err(i) => {
                let fiber = T::from_big(&key).map(|t| fiber_of(&t)).unwrap_or(&[]);
                let vol = ball_volume(fiber, n, k, &mut scratch);
                cache.insert(i, (key, vol));
                vol
            }
        };
        out.push((x, vol));
    }
    out
}
