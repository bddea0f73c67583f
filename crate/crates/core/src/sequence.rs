//! Weight sequences, sign vectors and the signed sum `X = Σ a_i ξ_i`.
//!
//! Positions are 0-based throughout the library. A sign vector stores one bit
//! per coordinate: bit `1` means `ξ_i = +1`, bit `0` means `ξ_i = -1`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{serde_int, Scalar};

/// Sequences whose absolute sum stays below this bound run on `i64`.
const SMALL_SUM_LIMIT: u64 = 1 << 61;

/// A packed element of `{-1, +1}^n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SignVector {
    len: usize,
    words: Vec<u64>,
}

impl SignVector {
    pub fn all_minus(len: usize) -> Self {
        SignVector {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn all_plus(len: usize) -> Self {
        let mut v = SignVector {
            len,
            words: vec![u64::MAX; len.div_ceil(64)],
        };
        v.mask_tail();
        v
    }

    pub fn from_bools(plus: &[bool]) -> Self {
        let mut v = Self::all_minus(plus.len());
        for (i, &p) in plus.iter().enumerate() {
            if p {
                v.words[i / 64] |= 1 << (i % 64);
            }
        }
        v
    }

    /// Builds a sign vector from raw words; bits past `len` are cleared.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        words.resize(len.div_ceil(64), 0);
        let mut v = SignVector { len, words };
        v.mask_tail();
        v
    }

    /// Interprets the low `len` bits of `vertex` as a sign vector (`len <= 64`).
    pub fn from_vertex(vertex: u64, len: usize) -> Self {
        assert!(len <= 64, "vertex encoding holds at most 64 coordinates");
        Self::from_words(vec![vertex], len)
    }

    /// The hypercube vertex index of this vector, if it has at most 64 coordinates.
    pub fn to_vertex(&self) -> Option<u64> {
        match self.words.len() {
            0 => Some(0),
            1 => Some(self.words[0]),
            _ => None,
        }
    }

    fn mask_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn is_plus(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    /// `+1` or `-1`.
    #[inline]
    pub fn sign(&self, i: usize) -> i64 {
        if self.is_plus(i) {
            1
        } else {
            -1
        }
    }

    pub fn set(&mut self, i: usize, plus: bool) {
        assert!(
            i < self.len,
            "index {i} out of range for length {}",
            self.len
        );
        if plus {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(
            i < self.len,
            "index {i} out of range for length {}",
            self.len
        );
        self.words[i / 64] ^= 1 << (i % 64);
    }

    /// A copy with every position of `flips` negated.
    pub fn with_flips(&self, flips: &IndexSet) -> Result<SignVector> {
        let mut out = self.clone();
        for &i in flips.iter() {
            if i >= self.len {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: self.len,
                });
            }
            out.flip(i);
        }
        Ok(out)
    }

    /// Number of `+1` entries in `start..end`.
    pub fn count_plus(&self, start: usize, end: usize) -> usize {
        debug_assert!(start <= end && end <= self.len);
        if start >= end {
            return 0;
        }
        let (sw, sb) = (start / 64, start % 64);
        let (ew, eb) = (end / 64, end % 64);
        if sw == ew {
            let mask = ((1u64 << (eb - sb)) - 1) << sb;
            return (self.words[sw] & mask).count_ones() as usize;
        }
        let mut total = (self.words[sw] >> sb).count_ones() as usize;
        total += self.words[sw + 1..ew]
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum::<usize>();
        if eb != 0 {
            total += (self.words[ew] & ((1u64 << eb) - 1)).count_ones() as usize;
        }
        total
    }

    /// Positions in `start..end` whose sign is `plus`, in increasing order.
    pub fn positions_with_sign(
        &self,
        start: usize,
        end: usize,
        plus: bool,
    ) -> impl Iterator<Item = usize> + '_ {
        (start..end).filter(move |&i| self.is_plus(i) == plus)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.is_plus(i))
    }
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in self.iter() {
            f.write_str(if p { "+" } else { "-" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SignVector({self})")
    }
}

impl FromStr for SignVector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bools = s
            .trim()
            .chars()
            .enumerate()
            .map(|(i, c)| match c {
                '+' => Ok(true),
                '-' => Ok(false),
                other => Err(format!("invalid sign {other:?} at position {}", i + 1)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SignVector::from_bools(&bools))
    }
}

/// Sorted set of distinct 0-based positions.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn empty() -> Self {
        IndexSet(Vec::new())
    }

    /// Validates that all indices are below `n` and distinct.
    pub fn new(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        indices.sort_unstable();
        for w in indices.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateIndex(w[0]));
            }
        }
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(Error::IndexOutOfRange {
                    index: last,
                    len: n,
                });
            }
        }
        Ok(IndexSet(indices))
    }

    /// `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        IndexSet((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, usize> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// 1-based rendering, as used on the command line.
    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }
}

/// A maximal block of consecutive equal weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Run {
    pub start: usize,
    pub len: usize,
}

impl Run {
    pub fn end(&self) -> usize {
        self.start + self.len
    }
}

/// A construction parameter recorded alongside a generated sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Param {
    Int(i64),
    List(Vec<i64>),
    Text(String),
}

impl From<i64> for Param {
    fn from(v: i64) -> Self {
        Param::Int(v)
    }
}

impl From<usize> for Param {
    fn from(v: usize) -> Self {
        Param::Int(v as i64)
    }
}

impl From<u32> for Param {
    fn from(v: u32) -> Self {
        Param::Int(v as i64)
    }
}

impl From<&[u64]> for Param {
    fn from(v: &[u64]) -> Self {
        Param::List(v.iter().map(|&x| x as i64).collect())
    }
}

impl From<String> for Param {
    fn from(v: String) -> Self {
        Param::Text(v)
    }
}

/// Borrowed weights in the narrowest exact representation available.
#[derive(Clone, Copy, Debug)]
pub enum WeightsView<'a> {
    Small(&'a [i64]),
    Big(&'a [BigInt]),
}

/// Nonzero integer weights `a = (a_1, .., a_n)` with optional metadata.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "WeightDoc", into = "WeightDoc")]
pub struct WeightSequence {
    weights: Vec<BigInt>,
    small: Option<Vec<i64>>,
    runs: Vec<Run>,
    name: Option<String>,
    params: BTreeMap<String, Param>,
}

#[derive(Serialize, Deserialize)]
struct WeightDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(with = "serde_int::vec")]
    weights: Vec<BigInt>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    params: BTreeMap<String, Param>,
}

impl TryFrom<WeightDoc> for WeightSequence {
    type Error = Error;

    fn try_from(doc: WeightDoc) -> Result<Self> {
        Ok(WeightSequence::new(doc.weights)?
            .with_name_opt(doc.name)
            .with_params(doc.params))
    }
}

impl From<WeightSequence> for WeightDoc {
    fn from(a: WeightSequence) -> Self {
        WeightDoc {
            name: a.name,
            weights: a.weights,
            params: a.params,
        }
    }
}

impl WeightSequence {
    pub fn new(weights: Vec<BigInt>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(pos) = weights.iter().position(Zero::is_zero) {
            return Err(Error::ZeroWeight(pos));
        }
        let mut abs_sum = BigInt::zero();
        for w in &weights {
            abs_sum += w.abs();
        }
        let small = match abs_sum.to_u64() {
            Some(s) if s <= SMALL_SUM_LIMIT => {
                Some(weights.iter().map(|w| w.to_i64().unwrap()).collect())
            }
            _ => None,
        };
        let mut runs: Vec<Run> = Vec::new();
        for (i, w) in weights.iter().enumerate() {
            match runs.last_mut() {
                Some(r) if weights[r.start] == *w => r.len += 1,
                _ => runs.push(Run { start: i, len: 1 }),
            }
        }
        Ok(WeightSequence {
            weights,
            small,
            runs,
            name: None,
            params: BTreeMap::new(),
        })
    }

    pub fn from_i64s(weights: &[i64]) -> Result<Self> {
        Self::new(weights.iter().map(|&w| BigInt::from(w)).collect())
    }

    pub fn with_name(self, name: impl Into<String>) -> Self {
        self.with_name_opt(Some(name.into()))
    }

    fn with_name_opt(mut self, name: Option<String>) -> Self {
        self.name = name;
        self
    }

    pub fn with_params(mut self, params: BTreeMap<String, Param>) -> Self {
        self.params = params;
        self
    }

    pub fn with_param(mut self, key: &str, value: impl Into<Param>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    /// Always false; sequences have at least one entry.
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[BigInt] {
        &self.weights
    }

    /// Machine-word weights, present when `Σ|a_i| <= 2^61`.
    pub fn small(&self) -> Option<&[i64]> {
        self.small.as_deref()
    }

    pub fn view(&self) -> WeightsView<'_> {
        match &self.small {
            Some(s) => WeightsView::Small(s),
            None => WeightsView::Big(&self.weights),
        }
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn params(&self) -> &BTreeMap<String, Param> {
        &self.params
    }

    pub fn param_int(&self, key: &str) -> Option<i64> {
        match self.params.get(key) {
            Some(Param::Int(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn param_list(&self, key: &str) -> Option<&[i64]> {
        match self.params.get(key) {
            Some(Param::List(v)) => Some(v),
            _ => None,
        }
    }

    pub fn param_text(&self, key: &str) -> Option<&str> {
        match self.params.get(key) {
            Some(Param::Text(v)) => Some(v),
            _ => None,
        }
    }

    pub fn total_sum(&self) -> BigInt {
        self.weights.iter().sum()
    }

    pub fn total_sum_of_squares(&self) -> BigInt {
        self.weights.iter().map(|w| w * w).sum()
    }

    pub fn abs_sum(&self) -> BigInt {
        self.weights.iter().map(|w| w.abs()).sum()
    }

    /// `Σ |a_i|^3`.
    pub fn abs_cube_sum(&self) -> BigInt {
        self.weights.iter().map(|w| w.abs().pow(3)).sum()
    }

    /// Multiplies every weight by the nonzero scalar `c`.
    pub fn scaled(&self, c: &BigInt) -> Result<Self> {
        if c.is_zero() {
            return Err(Error::InvalidParameter(
                "scale factor must be nonzero".into(),
            ));
        }
        Ok(
            WeightSequence::new(self.weights.iter().map(|w| w * c).collect())?
                .with_name_opt(self.name.clone()),
        )
    }

    fn check_len(&self, xi: &SignVector) -> Result<()> {
        if xi.len() != self.len() {
            return Err(Error::Dimension {
                what: "sign vector",
                expected: self.len(),
                got: xi.len(),
            });
        }
        Ok(())
    }

    /// `X(ξ) = Σ a_i ξ_i`.
    pub fn evaluate(&self, xi: &SignVector) -> Result<BigInt> {
        self.check_len(xi)?;
        Ok(match self.view() {
            WeightsView::Small(w) => BigInt::from(signed_sum(w, &self.runs, xi)),
            WeightsView::Big(w) => signed_sum(w, &self.runs, xi),
        })
    }

    /// `X_I(ξ) = Σ_{i∈I} a_i ξ_i`.
    pub fn evaluate_partial(&self, xi: &SignVector, part: &IndexSet) -> Result<BigInt> {
        self.check_len(xi)?;
        let mut acc = BigInt::zero();
        for &i in part.iter() {
            if i >= self.len() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: self.len(),
                });
            }
            if xi.is_plus(i) {
                acc += &self.weights[i];
            } else {
                acc -= &self.weights[i];
            }
        }
        Ok(acc)
    }
}

impl fmt::Debug for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("WeightSequence");
        if let Some(name) = &self.name {
            d.field("name", name);
        }
        if self.len() <= 32 {
            d.field("weights", &self.weights);
        } else {
            d.field("len", &self.len());
        }
        d.finish()
    }
}

/// Run-length signed sum: each run contributes `w · (#plus − #minus)`.
pub(crate) fn signed_sum<T: Scalar>(weights: &[T], runs: &[Run], xi: &SignVector) -> T {
    let mut acc = T::zero();
    for r in runs {
        let plus = xi.count_plus(r.start, r.end()) as i64;
        let coeff = 2 * plus - r.len as i64;
        if coeff != 0 {
            acc = acc + weights[r.start].clone() * T::from_i64(coeff);
        }
    }
    acc
}

pub fn evaluate(a: &WeightSequence, xi: &SignVector) -> Result<BigInt> {
    a.evaluate(xi)
}

pub fn evaluate_partial(a: &WeightSequence, xi: &SignVector, part: &IndexSet) -> Result<BigInt> {
    a.evaluate_partial(xi, part)
}

/// Absolute values sorted ascending. The resilience distribution for every
/// target is unchanged: negating `a_i` is matched by negating `ξ_i`, and
/// permutations are Hamming isometries.
pub fn canonicalize(a: &WeightSequence) -> WeightSequence {
    let mut w: Vec<BigInt> = a.weights().iter().map(|w| w.abs()).collect();
    w.sort();
    WeightSequence::new(w)
        .expect("absolute values of nonzero weights are nonzero")
        .with_name_opt(a.name().map(str::to_owned))
}

/// Makes the total sum even by turning the last entry equal to 1 into a 2.
pub fn parity_fix(a: &WeightSequence) -> Result<WeightSequence> {
    if a.total_sum().is_even_int() {
        return Ok(a.clone());
    }
    let one = BigInt::one();
    let pos = a
        .weights()
        .iter()
        .rposition(|w| *w == one)
        .ok_or(Error::ParityUnfixable)?;
    let mut w = a.weights().to_vec();
    w[pos] = BigInt::from(2);
    Ok(WeightSequence::new(w)?
        .with_name_opt(a.name().map(str::to_owned))
        .with_params(a.params().clone())
        .with_param("parity_fixed_index", pos))
}

trait EvenInt {
    fn is_even_int(&self) -> bool;
}

impl EvenInt for BigInt {
    fn is_even_int(&self) -> bool {
        num_integer::Integer::is_even(self)
    }
}
