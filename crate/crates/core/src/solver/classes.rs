//! Positions grouped by their flip contribution `a_i ξ_i`.
//!
//! Equal contributions are interchangeable for every flip-count question, so
//! search runs over multisets of classes instead of subsets of positions.

use rustc_hash::FxHashMap;

use crate::scalar::Scalar;
use crate::sequence::{Run, SignVector};

#[derive(Clone, Debug)]
pub(crate) struct FlipClass<T> {
    pub value: T,
    pub count: usize,
    /// `(run index, sign)` pairs whose positions carry this contribution.
    pub sources: Vec<(usize, bool)>,
}

pub(crate) fn flip_classes<T: Scalar>(
    weights: &[T],
    runs: &[Run],
    xi: &SignVector,
) -> Vec<FlipClass<T>> {
    let mut index: FxHashMap<T, usize> = FxHashMap::default();
    let mut classes: Vec<FlipClass<T>> = Vec::new();
    for (ri, run) in runs.iter().enumerate() {
        let plus = xi.count_plus(run.start, run.end());
        let w = &weights[run.start];
        for (sign, count) in [(true, plus), (false, run.len - plus)] {
            if count == 0 {
                continue;
            }
            let value = if sign { w.clone() } else { -w.clone() };
            let slot = *index.entry(value.clone()).or_insert_with(|| {
                classes.push(FlipClass {
                    value,
                    count: 0,
                    sources: Vec::new(),
                });
                classes.len() - 1
            });
            classes[slot].count += count;
            classes[slot].sources.push((ri, sign));
        }
    }
    classes
}

/// The first `uses` positions belonging to `class`.
pub(crate) fn take_positions<T>(
    class: &FlipClass<T>,
    uses: usize,
    runs: &[Run],
    xi: &SignVector,
) -> Vec<usize> {
    let mut out = Vec::with_capacity(uses);
    for &(ri, sign) in &class.sources {
        if out.len() == uses {
            break;
        }
        let run = runs[ri];
        out.extend(
            xi.positions_with_sign(run.start, run.end(), sign)
                .take(uses - out.len()),
        );
    }
    debug_assert_eq!(out.len(), uses);
    out
}
