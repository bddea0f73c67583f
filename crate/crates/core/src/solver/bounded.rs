use std::ops::ControlFlow;

use num_bigint::BigInt;
use rustc_hash::FxHashMap;

use super::classes::{flip_classes, take_positions, FlipClass};
use super::ResilienceResult;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sequence::{signed_sum, IndexSet, SignVector, WeightSequence, WeightsView};

/// Result of a depth-limited search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundedOutcome {
    /// The exact resilience (possibly `Infinite` when that can be certified).
    Found(ResilienceResult),
    /// `R_x(ξ)` is larger than the given bound.
    Exceeded(usize),
}

impl BoundedOutcome {
    /// True when `R_x(ξ) <= k` is certified.
    pub fn within(&self, k: usize) -> bool {
        match self {
            BoundedOutcome::Found(r) => r.value.finite().is_some_and(|d| d <= k),
            BoundedOutcome::Exceeded(_) => false,
        }
    }
}

/// `R_x(ξ)` if it is at most `kmax`, else `Exceeded(kmax)`.
pub fn resilience_bounded(
    a: &WeightSequence,
    xi: &SignVector,
    x: &BigInt,
    kmax: usize,
) -> Result<BoundedOutcome> {
    Ok(FlipSearch::new(a, xi, kmax)?.query(x))
}

/// One half-set per partial sum.
///
/// Half-sets are multisets of classes listed in class order. A left half
/// keeps the least `(last class, uses)`, a right half the greatest first
/// class with the fewest uses of it. If any left and right halves with the
/// given sums combine into a valid multiset, so do the two kept ones.
#[derive(Clone, Debug)]
struct Half {
    /// `(class, uses)` at the joining end.
    edge: Option<(u32, u32)>,
    combo: Vec<(u32, u32)>,
}

#[derive(Default)]
struct Halves<T> {
    left: FxHashMap<T, Half>,
    right: Vec<(T, Half)>,
}

struct Search<'a, T> {
    classes: Vec<FlipClass<T>>,
    current: T,
    abs_sum: T,
    n: usize,
    kmax: usize,
    halves: Vec<Halves<T>>,
    a: &'a WeightSequence,
    xi: &'a SignVector,
}

enum Inner<'a> {
    Small(Search<'a, i64>),
    Big(Search<'a, BigInt>),
}

/// Reusable bounded search for one `(a, ξ)` pair: half-sum tables are built
/// once and shared across targets.
pub struct FlipSearch<'a> {
    inner: Inner<'a>,
}

impl<'a> FlipSearch<'a> {
    pub fn new(a: &'a WeightSequence, xi: &'a SignVector, kmax: usize) -> Result<Self> {
        if xi.len() != a.len() {
            return Err(Error::Dimension {
                what: "sign vector",
                expected: a.len(),
                got: xi.len(),
            });
        }
        let inner = match a.view() {
            WeightsView::Small(w) => Inner::Small(Search::new(w, a, xi, kmax)),
            WeightsView::Big(w) => Inner::Big(Search::new(w, a, xi, kmax)),
        };
        Ok(FlipSearch { inner })
    }

    /// `X(ξ)`.
    pub fn current_sum(&self) -> BigInt {
        match &self.inner {
            Inner::Small(s) => s.current.to_big(),
            Inner::Big(s) => s.current.clone(),
        }
    }

    pub fn query(&mut self, x: &BigInt) -> BoundedOutcome {
        match &mut self.inner {
            Inner::Small(s) => match i64::from_big(x) {
                Some(x) => s.query(&x),
                // |x| > 2^63 while Σ|a_i| <= 2^61: unreachable.
                None => BoundedOutcome::Found(ResilienceResult::infinite()),
            },
            Inner::Big(s) => s.query(x),
        }
    }
}

/// Visits every multiset of `size` elements drawn from `classes[start..]`
/// (respecting multiplicities) in class order.
fn for_each_multiset<T: Scalar>(
    classes: &[FlipClass<T>],
    size: usize,
    f: &mut impl FnMut(&T, &[(u32, u32)]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    fn rec<T: Scalar>(
        classes: &[FlipClass<T>],
        start: usize,
        remaining: usize,
        sum: T,
        combo: &mut Vec<(u32, u32)>,
        f: &mut impl FnMut(&T, &[(u32, u32)]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if remaining == 0 {
            return f(&sum, combo);
        }
        for c in start..classes.len() {
            let class = &classes[c];
            let mut s = sum.clone();
            for u in 1..=remaining.min(class.count) {
                s = s + class.value.clone();
                combo.push((c as u32, u as u32));
                let flow = rec(classes, c + 1, remaining - u, s.clone(), combo, f);
                combo.pop();
                flow?;
            }
        }
        ControlFlow::Continue(())
    }
    rec(
        classes,
        0,
        size,
        T::zero(),
        &mut Vec::with_capacity(size),
        f,
    )
}

impl<'a, T: Scalar> Search<'a, T> {
    fn new(w: &[T], a: &'a WeightSequence, xi: &'a SignVector, kmax: usize) -> Self {
        let classes = flip_classes(w, a.runs(), xi);
        let current = signed_sum(w, a.runs(), xi);
        let abs_sum = w.iter().fold(T::zero(), |acc, v| acc + v.abs());
        Search {
            classes,
            current,
            abs_sum,
            n: a.len(),
            kmax,
            halves: Vec::new(),
            a,
            xi,
        }
    }

    fn ensure_half(&mut self, size: usize) {
        while self.halves.len() <= size {
            let p = self.halves.len();
            let mut left: FxHashMap<T, Half> = FxHashMap::default();
            let mut right: FxHashMap<T, Half> = FxHashMap::default();
            let _ = for_each_multiset(&self.classes, p, &mut |sum, combo| {
                let last = combo.last().copied();
                left.entry(sum.clone())
                    .and_modify(|h| {
                        if last < h.edge {
                            *h = Half {
                                edge: last,
                                combo: combo.to_vec(),
                            };
                        }
                    })
                    .or_insert_with(|| Half {
                        edge: last,
                        combo: combo.to_vec(),
                    });
                let first = combo.first().copied();
                let better = |h: &Half| match (first, h.edge) {
                    (Some((c, u)), Some((hc, hu))) => c > hc || (c == hc && u < hu),
                    _ => false,
                };
                right
                    .entry(sum.clone())
                    .and_modify(|h| {
                        if better(h) {
                            *h = Half {
                                edge: first,
                                combo: combo.to_vec(),
                            };
                        }
                    })
                    .or_insert_with(|| Half {
                        edge: first,
                        combo: combo.to_vec(),
                    });
                ControlFlow::Continue(())
            });
            let mut right: Vec<(T, Half)> = right.into_iter().collect();
            right.sort_unstable_by(|a, b| a.0.cmp(&b.0));
            self.halves.push(Halves { left, right });
        }
    }

    fn query(&mut self, x: &T) -> BoundedOutcome {
        let diff = self.current.clone() - x.clone();
        let two = T::from_i64(2);
        if !(diff.clone() % two.clone()).is_zero() {
            return BoundedOutcome::Found(ResilienceResult::infinite());
        }
        if x.abs() > self.abs_sum {
            return BoundedOutcome::Found(ResilienceResult::infinite());
        }
        let target = diff / two;

        let depth = self.kmax.min(self.n);
        for len in 0..=depth {
            let (l, r) = (len / 2, len - len / 2);
            self.ensure_half(r);
            let classes = &self.classes;
            let left = &self.halves[l].left;
            let hit = self.halves[r].right.iter().find_map(|(sum, rh)| {
                let lh = left.get(&(target.clone() - sum.clone()))?;
                let ok = match (lh.edge, rh.edge) {
                    (None, _) | (_, None) => true,
                    (Some((m, u)), Some((m2, u2))) => {
                        m < m2 || (m == m2 && (u + u2) as usize <= classes[m as usize].count)
                    }
                };
                ok.then(|| [lh.combo.as_slice(), rh.combo.as_slice()].concat())
            });
            if let Some(combo) = hit {
                return BoundedOutcome::Found(ResilienceResult::finite(self.materialize(&combo)));
            }
        }
        if self.kmax >= self.n {
            BoundedOutcome::Found(ResilienceResult::infinite())
        } else {
            BoundedOutcome::Exceeded(self.kmax)
        }
    }

    fn materialize(&self, combo: &[(u32, u32)]) -> IndexSet {
        let mut uses: FxHashMap<u32, u32> = FxHashMap::default();
        for &(c, u) in combo {
            *uses.entry(c).or_default() += u;
        }
        let mut positions = Vec::new();
        for (c, u) in uses {
            positions.extend(take_positions(
                &self.classes[c as usize],
                u as usize,
                self.a.runs(),
                self.xi,
            ));
        }
        IndexSet::new(positions, self.n).expect("class positions are distinct and in range")
    }
}
