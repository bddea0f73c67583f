//! Two planted additive bases, a short run of powers of two, and ones.
//!
//! Blocks, in index order:
//!
//! * `I`: `copies_i` copies of each `b` in an order-`h` basis `B` of `[n1]`,
//! * `J`: `copies_j` copies of `n1·b'` for each `b'` in an order-`h'` basis `B'` of `[n2]`,
//! * `K`: `m, 2m, …, 2^{r-1} m` with `m = n1·n2`,
//! * `L`: ones, the last one turned into a 2 if the total is odd.

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::{
    ceil_guarded, need_param_int, need_param_list, ratio_f64, seal, CertificateFailure,
    CertificateOutcome, Family, Strategy,
};
use crate::basis::{build_basis, BasisRepresenter};
use crate::error::{Error, Result};
use crate::sequence::{parity_fix, SignVector, WeightSequence};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayeredParams {
    pub h: u32,
    pub h_prime: u32,
    pub r: u32,
    pub n1: u64,
    pub n2: u64,
    pub copies_i: usize,
    pub copies_j: usize,
}

impl LayeredParams {
    pub fn m(&self) -> u64 {
        self.n1 * self.n2
    }

    pub fn budget(&self) -> usize {
        (self.h + self.h_prime + self.r) as usize
    }
}

/// Parameters at length `n` (logarithms base 2):
/// `h = ⌈log_{3-ε} log n⌉`, `h' = ⌈log_{3-ε} log log n⌉`,
/// `r = ⌈log((log log n)²)⌉`, `n1 = ⌈n / log² n⌉`,
/// `n2 = ⌈log² n / (log log n)²⌉`, `copies_i = ⌈log n⌉`,
/// `copies_j = ⌈log((log n)²)⌉`.
pub fn layered_params(n: usize, eps: Ratio<u64>) -> Result<LayeredParams> {
    let lg = (n as f64).log2();
    let llg = lg.log2();
    let lllg = llg.log2();
    if n < 4 || lllg <= 0.0 {
        return Err(Error::Construction(format!(
            "layered needs log log log n > 0 (n > 16), got n = {n}"
        )));
    }
    let base = (3.0 - ratio_f64(eps)).ln();
    Ok(LayeredParams {
        h: ceil_guarded(lg.ln() / base) as u32,
        h_prime: ceil_guarded(llg.ln() / base) as u32,
        r: ceil_guarded(2.0 * lllg) as u32,
        n1: ceil_guarded(n as f64 / (lg * lg)) as u64,
        n2: ceil_guarded((lg * lg) / (llg * llg)) as u64,
        copies_i: ceil_guarded(lg) as usize,
        copies_j: ceil_guarded(2.0 * llg) as usize,
    })
}

pub fn layered(n: usize, eps: Ratio<u64>) -> Result<WeightSequence> {
    let p = layered_params(n, eps)?;
    Ok(layered_with_params(n, &p)?.with_param("eps", eps))
}

/// Builds the block layout for explicit parameters; useful at lengths too
/// small for [`layered_params`].
pub fn layered_with_params(n: usize, p: &LayeredParams) -> Result<WeightSequence> {
    if p.h == 0 || p.h_prime == 0 || p.n1 == 0 || p.n2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "degenerate layered parameters {p:?}"
        )));
    }
    let b = build_basis(p.h, p.n1)?;
    let bp = build_basis(p.h_prime, p.n2)?;
    let i_len = b.elements.len() * p.copies_i;
    let j_len = bp.elements.len() * p.copies_j;
    let k_len = p.r as usize;
    let used = i_len + j_len + k_len;
    if used >= n {
        return Err(Error::Construction(format!(
            "layered at n = {n}: blocks I, J, K take {used} entries, leaving no ones"
        )));
    }
    let m = p.m();
    if p.r >= 62 || m.checked_shl(p.r).is_none_or(|top| top > 1 << 61) {
        return Err(Error::Construction(format!(
            "layered power layer overflows at n = {n}"
        )));
    }

    let mut w: Vec<i64> = Vec::with_capacity(n);
    for &v in &b.elements {
        w.extend(std::iter::repeat_n(v as i64, p.copies_i));
    }
    for &v in &bp.elements {
        w.extend(std::iter::repeat_n((p.n1 * v) as i64, p.copies_j));
    }
    w.extend((0..p.r).map(|j| (m << j) as i64));
    w.resize(n, 1);

    let a = WeightSequence::from_i64s(&w)?
        .with_name(Family::Layered.as_str())
        .with_param("h", p.h)
        .with_param("h_prime", p.h_prime)
        .with_param("r", p.r)
        .with_param("n1", p.n1 as usize)
        .with_param("n2", p.n2 as usize)
        .with_param("m", m as usize)
        .with_param("copies_i", p.copies_i)
        .with_param("copies_j", p.copies_j)
        .with_param("i_start", 0usize)
        .with_param("i_len", i_len)
        .with_param("j_start", i_len)
        .with_param("j_len", j_len)
        .with_param("k_start", i_len + j_len)
        .with_param("k_len", k_len)
        .with_param("l_start", used)
        .with_param("l_len", n - used)
        .with_param("basis_b", b.elements.as_slice())
        .with_param("basis_b_prime", bp.elements.as_slice());
    parity_fix(&a)
}

/// Flip procedure for layered sequences, with the bases prepared once.
#[derive(Clone, Debug)]
pub struct LayeredCertifier<'a> {
    a: &'a WeightSequence,
    p: LayeredParams,
    m: i128,
    basis_b: Vec<u64>,
    basis_bp: Vec<u64>,
    rep_b: BasisRepresenter,
    rep_bp: BasisRepresenter,
    j_start: usize,
    k_start: usize,
}

fn as_u64s(v: &[i64]) -> Vec<u64> {
    v.iter().map(|&x| x as u64).collect()
}

impl<'a> LayeredCertifier<'a> {
    pub fn new(a: &'a WeightSequence) -> Result<Self> {
        let int = |k: &str| need_param_int(a, k);
        let p = LayeredParams {
            h: int("h")? as u32,
            h_prime: int("h_prime")? as u32,
            r: int("r")? as u32,
            n1: int("n1")? as u64,
            n2: int("n2")? as u64,
            copies_i: int("copies_i")? as usize,
            copies_j: int("copies_j")? as usize,
        };
        let basis_b = as_u64s(need_param_list(a, "basis_b")?);
        let basis_bp = as_u64s(need_param_list(a, "basis_b_prime")?);
        if a.small().is_none() {
            return Err(Error::Misuse(
                "layered sequence exceeds machine width".into(),
            ));
        }
        Ok(LayeredCertifier {
            a,
            m: p.m() as i128,
            rep_b: BasisRepresenter::from_elements(&basis_b, p.n1),
            rep_bp: BasisRepresenter::from_elements(&basis_bp, p.n2),
            basis_b,
            basis_bp,
            j_start: int("j_start")? as usize,
            k_start: int("k_start")? as usize,
            p,
        })
    }

    pub fn params(&self) -> &LayeredParams {
        &self.p
    }

    /// Flips making `X = 0`, at most `h + h' + r` of them, or the failure event.
    pub fn certify(&self, xi: &SignVector) -> Result<CertificateOutcome> {
        let a = self.a;
        let w = a.small().expect("checked in new");
        let x: i128 = a.evaluate(xi)?.to_i128().expect("fits: weights are small");
        let n = a.len() as i128;
        let budget = self.p.budget();
        if x == 0 {
            return seal(
                a,
                xi,
                Vec::new(),
                BigInt::from(0),
                Strategy::Layered,
                budget,
            );
        }

        let r = self.p.r as usize;
        let k_pos = self.k_start..self.k_start + r;
        let x_k: i128 = k_pos
            .clone()
            .map(|i| w[i] as i128 * xi.sign(i) as i128)
            .sum();
        let x_ijl = x - x_k;
        if x_ijl.abs() > 2 * n {
            return Ok(CertificateOutcome::Failure(CertificateFailure::TooFar {
                magnitude: BigInt::from(x_ijl.abs()),
                limit: format!("2n = {}", 2 * n),
            }));
        }

        // Step 1: choose the signs on K.
        let current_mask: u64 = k_pos
            .clone()
            .enumerate()
            .filter(|&(_, i)| xi.is_plus(i))
            .fold(0, |acc, (j, _)| acc | 1 << j);
        let mut best: Option<(u32, i128, u64)> = None;
        let mut closest = i128::MAX;
        for mask in 0u64..1 << r {
            let v: i128 = (0..r)
                .map(|j| {
                    let s = if mask >> j & 1 == 1 { 1 } else { -1 };
                    s * (self.m << j)
                })
                .sum();
            let total = (x_ijl + v).abs();
            closest = closest.min(total);
            if total <= 2 * self.m {
                let key = ((mask ^ current_mask).count_ones(), total, mask);
                if best.is_none_or(|b| key < b) {
                    best = Some(key);
                }
            }
        }
        let Some((_, _, mask)) = best else {
            return Ok(CertificateOutcome::Failure(
                CertificateFailure::Unreachable {
                    remaining: BigInt::from(closest),
                },
            ));
        };
        let mut flips: Vec<usize> = (0..r)
            .filter(|&j| (mask ^ current_mask) >> j & 1 == 1)
            .map(|j| self.k_start + j)
            .collect();
        let mut x = x_ijl
            + (0..r)
                .map(|j| {
                    if mask >> j & 1 == 1 {
                        self.m << j
                    } else {
                        -(self.m << j)
                    }
                })
                .sum::<i128>();

        // Step 2: bring |X| below 2·n1 with copies of n1·b' in J.
        if x != 0 {
            let n1 = self.p.n1 as i128;
            let t = x.abs() / 2;
            let q = (t + n1 - 1) / n1;
            let rep = self.rep_bp.represent(q as u64).ok_or_else(|| {
                Error::Construction(format!("{q} is not covered by the basis B'"))
            })?;
            let plus = x > 0;
            for b in rep {
                let idx = self
                    .basis_bp
                    .binary_search(&b)
                    .expect("representation uses basis elements");
                let start = self.j_start + idx * self.p.copies_j;
                match xi
                    .positions_with_sign(start, start + self.p.copies_j, plus)
                    .next()
                {
                    Some(pos) => flips.push(pos),
                    None => {
                        return Ok(CertificateOutcome::Failure(
                            CertificateFailure::MissingCopy {
                                value: self.p.n1 * b,
                                plus,
                            },
                        ))
                    }
                }
            }
            x -= if plus { 2 * n1 * q } else { -2 * n1 * q };
        }

        // Step 3: finish with at most h elements of B in I.
        if x != 0 {
            let t = (x.abs() / 2) as u64;
            let rep = self
                .rep_b
                .represent(t)
                .ok_or_else(|| Error::Construction(format!("{t} is not covered by the basis B")))?;
            let plus = x > 0;
            for b in rep {
                let idx = self
                    .basis_b
                    .binary_search(&b)
                    .expect("representation uses basis elements");
                let start = idx * self.p.copies_i;
                match xi
                    .positions_with_sign(start, start + self.p.copies_i, plus)
                    .next()
                {
                    Some(pos) => flips.push(pos),
                    None => {
                        return Ok(CertificateOutcome::Failure(
                            CertificateFailure::MissingCopy { value: b, plus },
                        ))
                    }
                }
            }
        }
        seal(a, xi, flips, BigInt::from(0), Strategy::Layered, budget)
    }
}

pub fn layered_certificate(a: &WeightSequence, xi: &SignVector) -> Result<CertificateOutcome> {
    LayeredCertifier::new(a)?.certify(xi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::default_epsilon;
    use crate::solver::fiber_distances;
    use num_traits::Zero;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small() -> WeightSequence {
        let p = LayeredParams {
            h: 1,
            h_prime: 1,
            r: 2,
            n1: 3,
            n2: 2,
            copies_i: 2,
            copies_j: 2,
        };
        layered_with_params(18, &p).unwrap()
    }

    #[test]
    fn million_parameters() {
        let p = layered_params(1_000_000, default_epsilon()).unwrap();
        assert_eq!((p.h, p.h_prime, p.r), (3, 2, 5));
        assert_eq!((p.n1, p.n2), (2518, 22));
        assert_eq!((p.copies_i, p.copies_j), (20, 9));
    }

    #[test]
    fn refuses_tiny_lengths() {
        assert!(matches!(
            layered(16, default_epsilon()),
            Err(Error::Construction(_))
        ));
        assert_eq!(layered(100, default_epsilon()).unwrap().len(), 100);
    }

    #[test]
    fn small_layout() {
        let a = small();
        assert_eq!(
            a.small().unwrap(),
            &[1, 1, 2, 2, 3, 3, 3, 3, 6, 6, 6, 12, 1, 1, 1, 1, 1, 1]
        );
        assert!((a.total_sum() % 2u32).is_zero());
        assert_eq!(a.param_int("l_start"), Some(12));
    }

    #[test]
    fn missing_params_is_misuse() {
        let a = WeightSequence::from_i64s(&[1, 1]).unwrap();
        let xi = SignVector::all_plus(2);
        assert!(matches!(
            layered_certificate(&a, &xi),
            Err(Error::Misuse(_))
        ));
    }

    #[test]
    fn zero_sum_needs_no_flips() {
        let a = small();
        let xi: SignVector = "+-+-+-+-+-+-++++++".parse().unwrap();
        assert_eq!(a.evaluate(&xi).unwrap(), BigInt::zero());
        let out = layered_certificate(&a, &xi).unwrap();
        assert!(out.certificate().unwrap().flips.is_empty());
    }

    #[test]
    fn exhaustive_small_instance() {
        let a = small();
        let n = a.len();
        let exact = fiber_distances(&a, &BigInt::zero()).unwrap();
        let cert = LayeredCertifier::new(&a).unwrap();
        let (mut ok, mut missing) = (0, 0);
        for v in 0..1u64 << n {
            let xi = SignVector::from_vertex(v, n);
            match cert.certify(&xi).unwrap() {
                CertificateOutcome::Success(c) => {
                    ok += 1;
                    assert!(c.flips.len() <= cert.params().budget());
                    assert!(c.flips.len() as u32 >= exact.get(v).unwrap());
                }
                CertificateOutcome::Failure(CertificateFailure::MissingCopy { value, plus }) => {
                    missing += 1;
                    let w = a.small().unwrap();
                    let block_uniform = |start: usize, len: usize| {
                        (start..start + len).all(|i| w[i] == value as i64 && xi.is_plus(i) != plus)
                    };
                    let found = (0..12).step_by(2).any(|s| block_uniform(s, 2));
                    assert!(found, "vertex {v}");
                }
                CertificateOutcome::Failure(_) => {}
            }
        }
        assert!(ok > 0 && missing > 0);
    }

    #[test]
    fn million_random_signs() {
        let a = layered(1_000_000, default_epsilon()).unwrap();
        let cert = LayeredCertifier::new(&a).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut ok = 0;
        for _ in 0..20 {
            let words: Vec<u64> = (0..a.len().div_ceil(64)).map(|_| rng.random()).collect();
            let xi = SignVector::from_words(words, a.len());
            if let CertificateOutcome::Success(c) = cert.certify(&xi).unwrap() {
                assert!(c.flips.len() <= 10);
                ok += 1;
            }
        }
        assert!(ok >= 18);
    }
}
