//! Weight-sequence families and constructive flip certificates.

mod harmonic;
mod layered;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::basis::build_basis;
use crate::error::{Error, Result};
use crate::scalar::{serde_int, serde_ratio};
use crate::sequence::{parity_fix, IndexSet, Param, SignVector, WeightSequence};

pub use harmonic::{
    harmonic_certificate, harmonic_certificate_with, janson_spencer, HarmonicCertifier,
    DEFAULT_CHEBYSHEV_L,
};
pub use layered::{
    layered, layered_certificate, layered_params, layered_with_params, LayeredCertifier,
    LayeredParams,
};

/// Default `ε` for `layered` and `pk_lower`.
pub fn default_epsilon() -> Ratio<u64> {
    Ratio::new(1, 10)
}

/// Default `ε` for `p1_sharp`, so that `g ≈ n^{1/3}`.
pub fn default_p1_epsilon() -> Ratio<u64> {
    Ratio::from_integer(1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Ones,
    Arithmetic,
    Powers2,
    PlantedLog,
    Layered,
    PkLower,
    P1Sharp,
    JansonSpencer,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Ones,
        Family::Arithmetic,
        Family::Powers2,
        Family::PlantedLog,
        Family::Layered,
        Family::PkLower,
        Family::P1Sharp,
        Family::JansonSpencer,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Ones => "ones",
            Family::Arithmetic => "arithmetic",
            Family::Powers2 => "powers2",
            Family::PlantedLog => "planted_log",
            Family::Layered => "layered",
            Family::PkLower => "pk_lower",
            Family::P1Sharp => "p1_sharp",
            Family::JansonSpencer => "janson_spencer",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown family {s:?}")))
    }
}

/// Which family to build, and at what size.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: Family,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_ratio")]
    pub epsilon: Option<Ratio<u64>>,
}

mod opt_ratio {
    use super::serde_ratio;
    use num_rational::Ratio;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Ratio<u64>>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(r) => serde_ratio::serialize(r, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Ratio<u64>>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| serde_ratio::parse(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

impl FamilySpec {
    pub fn new(family: Family, n: usize) -> Self {
        FamilySpec {
            family,
            n,
            k: None,
            epsilon: None,
        }
    }

    pub fn with_k(mut self, k: u32) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_epsilon(mut self, eps: Ratio<u64>) -> Self {
        self.epsilon = Some(eps);
        self
    }
}

pub fn generate(spec: &FamilySpec) -> Result<WeightSequence> {
    if let Some(eps) = spec.epsilon {
        if *eps.numer() == 0 || eps >= Ratio::from_integer(1) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1), got {eps}"
            )));
        }
    }
    match spec.family {
        Family::Ones => ones(spec.n),
        Family::Arithmetic => arithmetic(spec.n),
        Family::Powers2 => powers2(spec.n),
        Family::PlantedLog => planted_log(spec.n),
        Family::Layered => layered(spec.n, spec.epsilon.unwrap_or_else(default_epsilon)),
        Family::PkLower => {
            let k = spec
                .k
                .ok_or_else(|| Error::InvalidParameter("pk_lower needs k".into()))?;
            pk_lower(spec.n, k, spec.epsilon.unwrap_or_else(default_epsilon))
        }
        Family::P1Sharp => p1_sharp(spec.n, spec.epsilon.unwrap_or_else(default_p1_epsilon)),
        Family::JansonSpencer => janson_spencer(spec.n),
    }
}

fn require_len(family: Family, n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::Construction(format!(
            "{family} needs n >= {min}, got n = {n}"
        )));
    }
    Ok(())
}

fn named(weights: Vec<i64>, family: Family) -> WeightSequence {
    WeightSequence::from_i64s(&weights)
        .expect("family weights are nonzero")
        .with_name(family.as_str())
}

/// All ones, parity fixed.
pub fn ones(n: usize) -> Result<WeightSequence> {
    require_len(Family::Ones, n, 1)?;
    parity_fix(&named(vec![1; n], Family::Ones))
}

/// `(1, 2, …, n)`.
pub fn arithmetic(n: usize) -> Result<WeightSequence> {
    require_len(Family::Arithmetic, n, 1)?;
    Ok(named((1..=n as i64).collect(), Family::Arithmetic))
}

/// `(1, 2, 4, …, 2^{n-1})`, exact at any length.
pub fn powers2(n: usize) -> Result<WeightSequence> {
    require_len(Family::Powers2, n, 1)?;
    let w: Vec<BigInt> = (0..n).map(|i| BigInt::from(1) << i).collect();
    Ok(WeightSequence::new(w)?.with_name(Family::Powers2.as_str()))
}

/// Smallest `k` with `2^k >= n` and `n - k` odd.
pub fn planted_log_k(n: usize) -> usize {
    let mut k = (usize::BITS - (n.max(1) - 1).leading_zeros()) as usize;
    if (n - k.min(n)) % 2 == 0 {
        k += 1;
    }
    k.max(1)
}

/// `n - k` ones followed by `1, 2, …, 2^{k-1}`.
pub fn planted_log(n: usize) -> Result<WeightSequence> {
    require_len(Family::PlantedLog, n, 2)?;
    let k = planted_log_k(n);
    if k >= n {
        return Err(Error::Construction(format!(
            "planted_log at n = {n} leaves no ones (k = {k})"
        )));
    }
    let mut w = vec![1i64; n - k];
    w.extend((0..k).map(|i| 1i64 << i));
    Ok(named(w, Family::PlantedLog)
        .with_param("k", k)
        .with_param("ones", n - k))
}

/// Order-`k` basis of `[g]` with `⌈2 log n⌉` copies of each element, padded
/// with ones, where `g = ⌊(εn / log n)^{(3^k-1)/(2·3^k)}⌋`.
pub fn pk_lower(n: usize, k: u32, eps: Ratio<u64>) -> Result<WeightSequence> {
    if k == 0 {
        return Err(Error::InvalidParameter("pk_lower needs k >= 1".into()));
    }
    require_len(Family::PkLower, n, 4)?;
    let lg = (n as f64).log2();
    let t = 3f64.powi(k as i32);
    let g = floor_guarded((ratio_f64(eps) * n as f64 / lg).powf((t - 1.0) / (2.0 * t))) as u64;
    if g == 0 {
        return Err(Error::Construction(format!(
            "pk_lower at n = {n} gives an empty basis range (g = 0)"
        )));
    }
    let basis = build_basis(k, g)?;
    let copies = ceil_guarded(2.0 * lg) as usize;
    let used = basis.elements.len() * copies;
    if used >= n {
        return Err(Error::Construction(format!(
            "pk_lower at n = {n}: {} basis copies leave no ones",
            used
        )));
    }
    let mut w = Vec::with_capacity(n);
    for &b in &basis.elements {
        w.extend(std::iter::repeat_n(b as i64, copies));
    }
    w.resize(n, 1);
    parity_fix(
        &named(w, Family::PkLower)
            .with_param("k", k)
            .with_param("g", g as usize)
            .with_param("copies", copies)
            .with_param("basis", basis.elements.as_slice())
            .with_param("eps", eps.to_string()),
    )
}

/// `n - g` ones followed by `1, 2, …, g`, with no parity adjustment.
pub fn p1_sharp_with_g(n: usize, g: usize) -> Result<WeightSequence> {
    if g == 0 || g >= n {
        return Err(Error::Construction(format!(
            "p1_sharp needs 1 <= g < n, got g = {g}, n = {n}"
        )));
    }
    let mut w = vec![1i64; n - g];
    w.extend(1..=g as i64);
    Ok(named(w, Family::P1Sharp).with_param("g", g))
}

/// [`p1_sharp_with_g`] at the `g` closest to `(εn)^{1/3}` whose total sum is
/// even (ties go to the smaller `g`).
pub fn p1_sharp(n: usize, eps: Ratio<u64>) -> Result<WeightSequence> {
    require_len(Family::P1Sharp, n, 3)?;
    let target = (ratio_f64(eps) * n as f64).cbrt();
    let even = |g: usize| (n - g + g * (g + 1) / 2) % 2 == 0;
    let base = target.floor() as usize;
    let g = (base.saturating_sub(2)..=base + 3)
        .filter(|&g| g >= 1 && g < n && even(g))
        .min_by(|&x, &y| {
            let dx = (x as f64 - target).abs();
            let dy = (y as f64 - target).abs();
            dx.total_cmp(&dy).then(x.cmp(&y))
        })
        .ok_or_else(|| Error::Construction(format!("p1_sharp at n = {n} has no admissible g")))?;
    Ok(p1_sharp_with_g(n, g)?.with_param("eps", eps.to_string()))
}

pub(crate) fn ratio_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

const GUARD: f64 = 1e-12;

/// `⌈x⌉`, treating values within a relative `1e-12` of an integer as that integer.
pub(crate) fn ceil_guarded(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= GUARD * x.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

pub(crate) fn floor_guarded(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= GUARD * x.abs().max(1.0) {
        r
    } else {
        x.floor()
    }
}

/// How a certificate was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Layered,
    Harmonic,
    Exact,
}

/// Explicit flips taking `ξ` to the fiber of `achieved_target`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlipCertificate {
    pub flips: IndexSet,
    #[serde(with = "serde_int")]
    pub achieved_target: BigInt,
    pub strategy: Strategy,
    /// Size bound the construction promises when it succeeds.
    pub budget: usize,
}

/// Why a constructive flip procedure gave up.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CertificateFailure {
    /// `|X|` (or a partial sum) started too far from zero.
    TooFar {
        #[serde(with = "serde_int")]
        magnitude: BigInt,
        limit: String,
    },
    /// The power-of-two layer cannot bring `|X|` within range.
    Unreachable {
        #[serde(with = "serde_int")]
        remaining: BigInt,
    },
    /// No unused copy of `value` carries the needed sign.
    MissingCopy { value: u64, plus: bool },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum CertificateOutcome {
    Success(FlipCertificate),
    Failure(CertificateFailure),
}

impl CertificateOutcome {
    pub fn certificate(&self) -> Option<&FlipCertificate> {
        match self {
            CertificateOutcome::Success(c) => Some(c),
            CertificateOutcome::Failure(_) => None,
        }
    }

    pub fn is_success(&self) -> bool {
        self.certificate().is_some()
    }
}

/// Applies `flips` and checks that `X` lands on `target`.
pub(crate) fn seal(
    a: &WeightSequence,
    xi: &SignVector,
    flips: Vec<usize>,
    target: BigInt,
    strategy: Strategy,
    budget: usize,
) -> Result<CertificateOutcome> {
    let flips = IndexSet::new(flips, a.len())?;
    let after = a.evaluate(&xi.with_flips(&flips)?)?;
    if after != target {
        return Err(Error::Construction(format!(
            "{strategy:?} certificate reached {after} instead of {target}"
        )));
    }
    Ok(CertificateOutcome::Success(FlipCertificate {
        flips,
        achieved_target: target,
        strategy,
        budget,
    }))
}

/// Unused positions of a given sign inside one contiguous block.
#[derive(Clone, Debug, Default)]
pub(crate) struct BlockCursor {
    used: [usize; 2],
}

impl BlockCursor {
    pub fn take(&mut self, xi: &SignVector, start: usize, end: usize, plus: bool) -> Option<usize> {
        let slot = &mut self.used[plus as usize];
        let pos = xi.positions_with_sign(start, end, plus).nth(*slot)?;
        *slot += 1;
        Some(pos)
    }
}

pub(crate) fn need_param_int(a: &WeightSequence, key: &str) -> Result<i64> {
    a.param_int(key)
        .ok_or_else(|| Error::Misuse(format!("sequence lacks the {key:?} parameter")))
}

pub(crate) fn need_param_list<'a>(a: &'a WeightSequence, key: &str) -> Result<&'a [i64]> {
    a.param_list(key)
        .ok_or_else(|| Error::Misuse(format!("sequence lacks the {key:?} parameter")))
}

impl From<Ratio<u64>> for Param {
    fn from(v: Ratio<u64>) -> Self {
        Param::Text(v.to_string())
    }
}
