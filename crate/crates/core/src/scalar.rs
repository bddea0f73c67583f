//! Exact integer scalars used by the generic algorithm kernels.
//!
//! Weight sequences whose absolute sum fits comfortably in a machine word run
//! on `i64`; everything else falls back to [`BigInt`].

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

pub trait Scalar: Signed + Clone + Ord + Hash + Debug + Display + Send + Sync + 'static {
    fn from_i64(v: i64) -> Self;
    fn from_big(v: &BigInt) -> Option<Self>;
    fn to_big(&self) -> BigInt;
    fn to_f64_lossy(&self) -> f64;
}

impl Scalar for i64 {
    #[inline]
    fn from_i64(v: i64) -> Self {
        v
    }
    #[inline]
    fn from_big(v: &BigInt) -> Option<Self> {
        v.to_i64()
    }
    #[inline]
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
    #[inline]
    fn to_f64_lossy(&self) -> f64 {
        *self as f64
    }
}

impl Scalar for BigInt {
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn from_big(v: &BigInt) -> Option<Self> {
        Some(v.clone())
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(if self.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        })
    }
}

/// Serde helpers rendering big integers as JSON numbers when they fit in an
/// `i64` and as decimal strings otherwise.
pub mod serde_int {
    use num_bigint::BigInt;
    use num_traits::ToPrimitive;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    pub(crate) enum Repr {
        Int(i64),
        Text(String),
    }

    impl Repr {
        pub(crate) fn from_big(v: &BigInt) -> Self {
            match v.to_i64() {
                Some(i) => Repr::Int(i),
                None => Repr::Text(v.to_string()),
            }
        }

        pub(crate) fn into_big<E: serde::de::Error>(self) -> Result<BigInt, E> {
            match self {
                Repr::Int(i) => Ok(BigInt::from(i)),
                Repr::Text(s) => s.trim().parse().map_err(E::custom),
            }
        }
    }

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        Repr::from_big(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        Repr::deserialize(d)?.into_big()
    }

    pub mod vec {
        use super::Repr;
        use num_bigint::BigInt;
        use serde::{Deserialize, Deserializer, Serialize, Serializer};

        pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
            v.iter()
                .map(Repr::from_big)
                .collect::<Vec<_>>()
                .serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
            Vec::<Repr>::deserialize(d)?
                .into_iter()
                .map(Repr::into_big)
                .collect()
        }
    }
}

/// Serde helper rendering `Ratio<u64>` as `"p/q"`.
pub mod serde_ratio {
    use num_rational::Ratio;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Ratio<u64>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", v.numer(), v.denom()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Ratio<u64>, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(serde::de::Error::custom)
    }

    pub fn parse(s: &str) -> Result<Ratio<u64>, String> {
        let (p, q) = match s.split_once('/') {
            Some((p, q)) => (p.trim(), q.trim()),
            None => (s.trim(), "1"),
        };
        let p: u64 = p.parse().map_err(|e| format!("bad numerator {p:?}: {e}"))?;
        let q: u64 = q
            .parse()
            .map_err(|e| format!("bad denominator {q:?}: {e}"))?;
        if q == 0 {
            return Err("zero denominator".into());
        }
        Ok(Ratio::new(p, q))
    }
}
