use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU8, Ordering::Relaxed};

use num_bigint::BigInt;
use rayon::prelude::*;
use rustc_hash::FxHashMap;

use super::{ResilienceProfile, SolverConfig};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sequence::{WeightSequence, WeightsView};

const UNSET: u8 = u8::MAX;
/// Frontiers smaller than this are expanded on the calling thread.
const PAR_FRONTIER: usize = 1 << 14;

pub(crate) fn check_dimension(n: usize, cfg: &SolverConfig) -> Result<()> {
    if n > cfg.exhaustive_limit as usize || n > 32 {
        return Err(Error::Resource {
            what: "hypercube dimension",
            size: n as u128,
            limit: cfg.exhaustive_limit.min(32) as u128,
        });
    }
    Ok(())
}

/// Calls `f(vertex, X)` for every vertex of `{-1,+1}^n` in reflected Gray
/// order. Vertex bit `i` set means `ξ_i = +1`; one weight update per step.
pub fn gray_sweep<T: Scalar>(weights: &[T], mut f: impl FnMut(u64, &T)) {
    let n = weights.len();
    assert!(n < 64, "gray sweep supports fewer than 64 coordinates");
    let mut x = weights.iter().fold(T::zero(), |acc, w| acc - w.clone());
    let mut vertex = 0u64;
    f(vertex, &x);
    for step in 1u64..(1u64 << n) {
        let bit = step.trailing_zeros() as usize;
        vertex ^= 1 << bit;
        let delta = weights[bit].clone() + weights[bit].clone();
        if vertex >> bit & 1 == 1 {
            x = x + delta;
        } else {
            x = x - delta;
        }
        f(vertex, &x);
    }
}

/// Distance from every vertex to the fiber `X^{-1}(x)`.
pub struct DistanceMap {
    n: usize,
    dist: Vec<u8>,
}

impl DistanceMap {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `None` when the fiber is empty.
    pub fn get(&self, vertex: u64) -> Option<u32> {
        match self.dist[vertex as usize] {
            UNSET => None,
            d => Some(d as u32),
        }
    }

    pub fn counts(&self) -> BTreeMap<u32, u64> {
        let mut hist = [0u64; 256];
        for &d in &self.dist {
            hist[d as usize] += 1;
        }
        hist.iter()
            .enumerate()
            .filter(|&(d, &c)| c > 0 && d != UNSET as usize)
            .map(|(d, &c)| (d as u32, c))
            .collect()
    }
}

fn mark_fiber<T: Scalar>(weights: &[T], x: &BigInt) -> Vec<AtomicU8> {
    let n = weights.len();
    let dist: Vec<AtomicU8> = (0..1usize << n).map(|_| AtomicU8::new(UNSET)).collect();
    if let Some(x) = T::from_big(x) {
        gray_sweep(weights, |v, val| {
            if *val == x {
                dist[v as usize].store(0, Relaxed);
            }
        });
    }
    dist
}

/// Level-synchronous multi-source BFS. Writes only ever set `level + 1` on
/// unset cells, so the final distances do not depend on scheduling.
fn bfs(dist: &[AtomicU8], n: usize, depth_limit: u32) {
    let mut frontier: Vec<u32> = dist
        .iter()
        .enumerate()
        .filter(|(_, d)| d.load(Relaxed) == 0)
        .map(|(v, _)| v as u32)
        .collect();
    let mut level = 0u32;
    while !frontier.is_empty() && level < depth_limit {
        let next_level = (level + 1) as u8;
        let expand = |chunk: &[u32]| {
            let mut next = Vec::new();
            for &v in chunk {
                for b in 0..n {
                    let u = v ^ (1 << b);
                    let cell = &dist[u as usize];
                    if cell.load(Relaxed) == UNSET
                        && cell
                            .compare_exchange(UNSET, next_level, Relaxed, Relaxed)
                            .is_ok()
                    {
                        next.push(u);
                    }
                }
            }
            next
        };
        frontier = if frontier.len() >= PAR_FRONTIER && rayon::current_num_threads() > 1 {
            frontier
                .par_chunks(PAR_FRONTIER / 4)
                .map(expand)
                .collect::<Vec<_>>()
                .concat()
        } else {
            expand(&frontier)
        };
        level += 1;
    }
}

pub fn fiber_distances(a: &WeightSequence, x: &BigInt) -> Result<DistanceMap> {
    fiber_distances_with(a, x, &SolverConfig::default())
}

pub fn fiber_distances_with(
    a: &WeightSequence,
    x: &BigInt,
    cfg: &SolverConfig,
) -> Result<DistanceMap> {
    let n = a.len();
    check_dimension(n, cfg)?;
    let dist = match a.view() {
        WeightsView::Small(w) => mark_fiber(w, x),
        WeightsView::Big(w) => mark_fiber(w, x),
    };
    bfs(&dist, n, u32::MAX);
    Ok(DistanceMap {
        n,
        dist: dist.into_iter().map(AtomicU8::into_inner).collect(),
    })
}

pub fn hypercube_profile(a: &WeightSequence, x: &BigInt) -> Result<ResilienceProfile> {
    hypercube_profile_with(a, x, &SolverConfig::default())
}

/// Exact distribution of `R_x` over all `2^n` sign vectors.
pub fn hypercube_profile_with(
    a: &WeightSequence,
    x: &BigInt,
    cfg: &SolverConfig,
) -> Result<ResilienceProfile> {
    let map = fiber_distances_with(a, x, cfg)?;
    Ok(ResilienceProfile {
        target: x.clone(),
        n: a.len(),
        counts: map.counts(),
    })
}

/// Truncated BFS from a fiber; returns the number of vertices within `k`.
/// `scratch` must be all `UNSET` on entry and is restored before returning.
pub(crate) fn ball_volume(fiber: &[u32], n: usize, k: usize, scratch: &mut [u8]) -> u64 {
    if fiber.is_empty() {
        return 0;
    }
    if k >= n {
        return 1u64 << n;
    }
    let mut touched: Vec<u32> = Vec::with_capacity(fiber.len());
    for &v in fiber {
        scratch[v as usize] = 0;
        touched.push(v);
    }
    let mut start = 0;
    for level in 0..k {
        let end = touched.len();
        for i in start..end {
            let v = touched[i];
            for b in 0..n {
                let u = v ^ (1 << b);
                if scratch[u as usize] == UNSET {
                    scratch[u as usize] = (level + 1) as u8;
                    touched.push(u);
                }
            }
        }
        start = end;
    }
    for &v in &touched {
        scratch[v as usize] = UNSET;
    }
    touched.len() as u64
}

pub(crate) fn new_scratch(n: usize) -> Vec<u8> {
    vec![UNSET; 1usize << n]
}

/// Value of `X` at every vertex.
pub(crate) fn vertex_values<T: Scalar>(weights: &[T]) -> Vec<T> {
    let mut values = vec![T::zero(); 1usize << weights.len()];
    gray_sweep(weights, |v, x| values[v as usize] = x.clone());
    values
}

fn distribution<T: Scalar>(weights: &[T]) -> Vec<(BigInt, u64)> {
    let mut counts: FxHashMap<T, u64> = FxHashMap::default();
    gray_sweep(weights, |_, x| *counts.entry(x.clone()).or_default() += 1);
    let mut out: Vec<(T, u64)> = counts.into_iter().collect();
    out.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    out.into_iter().map(|(v, c)| (v.to_big(), c)).collect()
}

pub fn support_distribution(a: &WeightSequence) -> Result<Vec<(BigInt, u64)>> {
    support_distribution_with(a, &SolverConfig::default())
}

/// Exact atoms of `X`: `(value, number of sign vectors)` sorted by value.
pub fn support_distribution_with(
    a: &WeightSequence,
    cfg: &SolverConfig,
) -> Result<Vec<(BigInt, u64)>> {
    check_dimension(a.len(), cfg)?;
    Ok(match a.view() {
        WeightsView::Small(w) => distribution(w),
        WeightsView::Big(w) => distribution(w),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::SignVector;

    fn seq(w: &[i64]) -> WeightSequence {
        WeightSequence::from_i64s(w).unwrap()
    }

    fn counts(pairs: &[(u32, u64)]) -> BTreeMap<u32, u64> {
        pairs.iter().copied().collect()
    }

    #[test]
    fn gray_sweep_visits_every_vertex_with_its_sum() {
        let w = [3i64, -1, 4, 1, 5];
        let a = seq(&w);
        let mut seen = [false; 32];
        gray_sweep(&w, |v, x| {
            assert!(!seen[v as usize]);
            seen[v as usize] = true;
            let direct = a.evaluate(&SignVector::from_vertex(v, 5)).unwrap();
            assert_eq!(BigInt::from(*x), direct);
        });
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn two_ones_target_zero() {
        // Vertices: -- (X=-2), +- and -+ (X=0), ++ (X=2).
        let p = hypercube_profile(&seq(&[1, 1]), &0.into()).unwrap();
        assert_eq!(p.counts, counts(&[(0, 2), (1, 2)]));
    }

    #[test]
    fn powers_of_two_are_binomial() {
        let a = seq(&[1, 2, 4, 8]);
        for x in [-15, -1, 3, 15] {
            let p = hypercube_profile(&a, &x.into()).unwrap();
            assert_eq!(p.counts, counts(&[(0, 1), (1, 4), (2, 6), (3, 4), (4, 1)]));
        }
    }

    #[test]
    fn single_weight() {
        let p = hypercube_profile(&seq(&[1]), &1.into()).unwrap();
        assert_eq!(p.counts, counts(&[(0, 1), (1, 1)]));
    }

    #[test]
    fn unachievable_target_gives_empty_profile() {
        let p = hypercube_profile(&seq(&[1, 2, 4]), &6.into()).unwrap();
        assert!(!p.is_achievable());
        assert_eq!(p.total(), 0);
    }

    #[test]
    fn dimension_limit() {
        let cfg = SolverConfig {
            exhaustive_limit: 3,
            ..SolverConfig::default()
        };
        let err = hypercube_profile_with(&seq(&[1, 1, 1, 1]), &0.into(), &cfg).unwrap_err();
        assert!(matches!(err, Error::Resource { .. }));
    }

    #[test]
    fn distribution_of_all_ones() {
        let d = support_distribution(&seq(&[1, 1, 1, 1])).unwrap();
        let expect: Vec<(BigInt, u64)> = [(-4, 1), (-2, 4), (0, 6), (2, 4), (4, 1)]
            .iter()
            .map(|&(v, c)| (BigInt::from(v), c))
            .collect();
        assert_eq!(d, expect);
    }

    #[test]
    fn parallel_bfs_matches_sequential() {
        let a = seq(&[1, 1, 2, 3, 5, 8, 13, 21, 1, 1, 2, 3, 5, 8, 13, 21, 1, 1]);
        let serial = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let wide = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let p1 = serial.install(|| hypercube_profile(&a, &0.into()).unwrap());
        let p4 = wide.install(|| hypercube_profile(&a, &0.into()).unwrap());
        assert_eq!(p1, p4);
        assert_eq!(p1.total(), 1 << 18);
    }
}
