//! Fully resolved command inputs. A `Request` is what a run record echoes,
//! so executing it again reproduces the record's outputs.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use resilience_core::basis::{
    build_basis, lemma_bound_holds, optimal_basis_bruteforce, AdditiveBasis,
};
use resilience_core::families::{
    generate, harmonic_certificate, layered_certificate, CertificateFailure, CertificateOutcome,
    Family, FamilySpec, Strategy,
};
use resilience_core::scalar::serde_int;
use resilience_core::solver::{
    hypercube_profile, qk_exact, resilience_bounded, resilience_dp, BoundedOutcome,
};
use resilience_core::stats::rng::sign_vector;
use resilience_core::stats::{
    berry_esseen_check, estimate_resilience_prob, max_atom_probability, sweep, AtomProbability,
    BerryEsseenStats, Mode, SweepConfig,
};
use resilience_core::{Error, Resilience, SignVector, WeightSequence};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum WeightInput {
    Inline {
        sequence: WeightSequence,
        #[serde(with = "serde_int")]
        scale: BigInt,
    },
    Family {
        spec: FamilySpec,
    },
}

impl WeightInput {
    pub fn resolve(&self) -> Result<WeightSequence, CliError> {
        match self {
            WeightInput::Inline { sequence, .. } => Ok(sequence.clone()),
            WeightInput::Family { spec } => Ok(generate(spec)?),
        }
    }
}

/// Where the sign vector of a certificate comes from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Signs {
    Explicit { signs: String },
    Sampled { seed: u64, index: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Request {
    Resilience {
        weights: WeightInput,
        signs: String,
        #[serde(with = "serde_int")]
        x: BigInt,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kmax: Option<usize>,
    },
    Profile {
        weights: WeightInput,
        #[serde(with = "serde_int")]
        x: BigInt,
    },
    Qk {
        weights: WeightInput,
        k: usize,
        /// Empty means every atom of `X`.
        #[serde(default, with = "serde_int::vec")]
        candidates: Vec<BigInt>,
    },
    Basis {
        order: u32,
        range: u64,
        optimal: bool,
    },
    Construct {
        spec: FamilySpec,
    },
    Certify {
        spec: FamilySpec,
        signs: Signs,
    },
    Estimate {
        weights: WeightInput,
        #[serde(with = "serde_int")]
        x: BigInt,
        k: usize,
        samples: u64,
        seed: u64,
    },
    Sweep {
        config: SweepConfig,
    },
    Bestats {
        weights: WeightInput,
        mode: Mode,
    },
}

/// CSV rendering of an output.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn row(mut self, cells: Vec<String>) -> Self {
        self.rows.push(cells);
        self
    }
}

pub struct Output {
    pub value: Value,
    pub table: Table,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("outputs serialize")
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

fn parse_signs(s: &str) -> Result<SignVector, CliError> {
    s.parse()
        .map_err(|e| CliError::Usage(format!("signs must be a string over {{+,-}}: {e}")))
}

#[derive(Serialize)]
struct ResilienceOut {
    algorithm: &'static str,
    #[serde(with = "serde_int")]
    x: BigInt,
    #[serde(with = "serde_int")]
    current_sum: BigInt,
    /// `None` when a bounded search gave up.
    value: Option<Resilience>,
    /// 1-based positions.
    witness: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exceeds: Option<usize>,
}

#[derive(Serialize)]
struct BasisOut {
    method: &'static str,
    basis: AdditiveBasis,
    verified: bool,
    lemma_bound_holds: bool,
}

#[derive(Serialize)]
struct ConstructOut {
    n: usize,
    #[serde(with = "serde_int")]
    total_sum: BigInt,
    sequence: WeightSequence,
}

#[derive(Serialize)]
struct CertifyOut {
    family: Family,
    #[serde(with = "serde_int")]
    sum_before: BigInt,
    success: bool,
    strategy: Option<Strategy>,
    /// 1-based positions.
    flips: Option<Vec<usize>>,
    budget: Option<usize>,
    failure: Option<CertificateFailure>,
}

#[derive(Serialize)]
struct BestatsOut {
    berry_esseen: BerryEsseenStats,
    max_atom: AtomProbability,
}

impl Request {
    pub fn name(&self) -> &'static str {
        match self {
            Request::Resilience { .. } => "resilience",
            Request::Profile { .. } => "profile",
            Request::Qk { .. } => "qk",
            Request::Basis { .. } => "basis",
            Request::Construct { .. } => "construct",
            Request::Certify { .. } => "certify",
            Request::Estimate { .. } => "estimate",
            Request::Sweep { .. } => "sweep",
            Request::Bestats { .. } => "bestats",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Request::Estimate { seed, .. } => Some(*seed),
            Request::Sweep { config } => Some(config.seed),
            Request::Bestats {
                mode: Mode::MonteCarlo { seed, .. },
                ..
            } => Some(*seed),
            Request::Certify {
                signs: Signs::Sampled { seed, .. },
                ..
            } => Some(*seed),
            _ => None,
        }
    }

    pub fn execute(&self) -> Result<Output, CliError> {
        match self {
            Request::Resilience {
                weights,
                signs,
                x,
                kmax,
            } => {
                let a = weights.resolve()?;
                let xi = parse_signs(signs)?;
                let current_sum = a.evaluate(&xi)?;
                let exact = match kmax {
                    Some(_) => None,
                    None => match resilience_dp(&a, &xi, x) {
                        Ok(r) => Some(r),
                        Err(Error::Resource { .. }) => None,
                        Err(e) => return Err(e.into()),
                    },
                };
                let out = match exact {
                    Some(r) => ResilienceOut {
                        algorithm: "dp",
                        x: x.clone(),
                        current_sum,
                        value: Some(r.value),
                        witness: r.witness.map(|w| w.one_based()),
                        exceeds: None,
                    },
                    None => {
                        let k = kmax.unwrap_or(a.len());
                        let (value, witness, exceeds) = match resilience_bounded(&a, &xi, x, k)? {
                            BoundedOutcome::Found(r) => {
                                (Some(r.value), r.witness.map(|w| w.one_based()), None)
                            }
                            BoundedOutcome::Exceeded(k) => (None, None, Some(k)),
                        };
                        ResilienceOut {
                            algorithm: "bounded",
                            x: x.clone(),
                            current_sum,
                            value,
                            witness,
                            exceeds,
                        }
                    }
                };
                let table =
                    Table::new(&["x", "current_sum", "value", "witness", "algorithm"]).row(vec![
                        out.x.to_string(),
                        out.current_sum.to_string(),
                        match (&out.value, out.exceeds) {
                            (Some(v), _) => v.to_string(),
                            (None, Some(k)) => format!(">{k}"),
                            (None, None) => String::new(),
                        },
                        out.witness.as_deref().map(join).unwrap_or_default(),
                        out.algorithm.to_string(),
                    ]);
                Ok(Output {
                    value: to_value(&out),
                    table,
                })
            }
            Request::Profile { weights, x } => {
                let p = hypercube_profile(&weights.resolve()?, x)?;
                let mut table = Table::new(&["distance", "count"]);
                for (d, c) in &p.counts {
                    table = table.row(vec![d.to_string(), c.to_string()]);
                }
                Ok(Output {
                    value: to_value(&p),
                    table,
                })
            }
            Request::Qk {
                weights,
                k,
                candidates,
            } => {
                let a = weights.resolve()?;
                let cands = (!candidates.is_empty()).then_some(candidates.as_slice());
                let q = qk_exact(&a, *k, cands)?;
                let table =
                    Table::new(&["k", "n", "value", "ball_size", "argmax", "ties"]).row(vec![
                        q.k.to_string(),
                        q.n.to_string(),
                        q.value.to_string(),
                        q.ball_size.to_string(),
                        q.argmax.to_string(),
                        q.ties.to_string(),
                    ]);
                Ok(Output {
                    value: to_value(&q),
                    table,
                })
            }
            Request::Basis {
                order,
                range,
                optimal,
            } => {
                let (method, basis) = if *optimal {
                    ("bruteforce", optimal_basis_bruteforce(*order, *range)?)
                } else {
                    ("recursive", build_basis(*order, *range)?)
                };
                let out = BasisOut {
                    method,
                    verified: basis.verify(),
                    lemma_bound_holds: lemma_bound_holds(&basis),
                    basis,
                };
                let table = Table::new(&[
                    "order",
                    "range",
                    "size",
                    "sum_of_squares",
                    "elements",
                    "verified",
                ])
                .row(vec![
                    out.basis.order.to_string(),
                    out.basis.range.to_string(),
                    out.basis.elements.len().to_string(),
                    out.basis.sum_of_squares.to_string(),
                    join(&out.basis.elements),
                    out.verified.to_string(),
                ]);
                Ok(Output {
                    value: to_value(&out),
                    table,
                })
            }
            Request::Construct { spec } => {
                let a = generate(spec)?;
                let mut table = Table::new(&["index", "weight"]);
                for (i, w) in a.weights().iter().enumerate() {
                    table = table.row(vec![(i + 1).to_string(), w.to_string()]);
                }
                let out = ConstructOut {
                    n: a.len(),
                    total_sum: a.total_sum(),
                    sequence: a,
                };
                Ok(Output {
                    value: to_value(&out),
                    table,
                })
            }
            Request::Certify { spec, signs } => {
                let a = generate(spec)?;
                let xi = match signs {
                    Signs::Explicit { signs } => parse_signs(signs)?,
                    Signs::Sampled { seed, index } => sign_vector(*seed, *index, a.len()),
                };
                let sum_before = a.evaluate(&xi)?;
                let outcome = match spec.family {
                    Family::Layered => layered_certificate(&a, &xi)?,
                    Family::JansonSpencer => harmonic_certificate(&a, &xi)?,
                    other => {
                        return Err(CliError::Usage(format!(
                            "no flip certificate for {other}; use layered or janson_spencer"
                        )))
                    }
                };
                let out = match outcome {
                    CertificateOutcome::Success(c) => CertifyOut {
                        family: spec.family,
                        sum_before,
                        success: true,
                        strategy: Some(c.strategy),
                        flips: Some(c.flips.one_based()),
                        budget: Some(c.budget),
                        failure: None,
                    },
                    CertificateOutcome::Failure(f) => CertifyOut {
                        family: spec.family,
                        sum_before,
                        success: false,
                        strategy: None,
                        flips: None,
                        budget: None,
                        failure: Some(f),
                    },
                };
                let table =
                    Table::new(&["family", "sum_before", "success", "size", "budget", "flips"])
                        .row(vec![
                            out.family.to_string(),
                            out.sum_before.to_string(),
                            out.success.to_string(),
                            opt(&out.flips.as_ref().map(Vec::len)),
                            opt(&out.budget),
                            out.flips.as_deref().map(join).unwrap_or_default(),
                        ]);
                Ok(Output {
                    value: to_value(&out),
                    table,
                })
            }
            Request::Estimate {
                weights,
                x,
                k,
                samples,
                seed,
            } => {
                let r = estimate_resilience_prob(&weights.resolve()?, x, *k, *samples, *seed)?;
                let table = Table::new(&[
                    "x", "k", "estimate", "hits", "samples", "ci_low", "ci_high", "seed",
                ])
                .row(vec![
                    r.x.to_string(),
                    r.k.to_string(),
                    r.estimate.to_string(),
                    r.hits.to_string(),
                    r.samples.to_string(),
                    r.ci_low.to_string(),
                    r.ci_high.to_string(),
                    r.seed.to_string(),
                ]);
                Ok(Output {
                    value: to_value(&r),
                    table,
                })
            }
            Request::Sweep { config } => {
                let r = sweep(config)?;
                let mut table = Table::new(&[
                    "n",
                    "estimate",
                    "hits",
                    "ci_low",
                    "ci_high",
                    "samples",
                    "seed",
                    "wall_time_ms",
                    "error",
                ]);
                for row in &r.rows {
                    table = table.row(vec![
                        row.n.to_string(),
                        (*row.estimate.numer() as f64 / *row.estimate.denom() as f64).to_string(),
                        row.hits.to_string(),
                        row.ci_low.to_string(),
                        row.ci_high.to_string(),
                        row.samples.to_string(),
                        row.seed.to_string(),
                        row.wall_time_ms.to_string(),
                        opt(&row.error),
                    ]);
                }
                Ok(Output {
                    value: to_value(&r),
                    table,
                })
            }
            Request::Bestats { weights, mode } => {
                let a = weights.resolve()?;
                let out = BestatsOut {
                    berry_esseen: berry_esseen_check(&a, *mode)?,
                    max_atom: max_atom_probability(&a, *mode)?,
                };
                let s = &out.berry_esseen;
                let table =
                    Table::new(&["sigma", "rho", "kolmogorov_distance", "ratio", "max_atom"]).row(
                        vec![
                            s.sigma.to_string(),
                            s.rho.to_string(),
                            s.kolmogorov_distance.to_string(),
                            s.ratio.to_string(),
                            out.max_atom.value().to_string(),
                        ],
                    );
                Ok(Output {
                    value: to_value(&out),
                    table,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inline(w: &[i64]) -> WeightInput {
        WeightInput::Inline {
            sequence: WeightSequence::from_i64s(w).unwrap(),
            scale: BigInt::from(1),
        }
    }

    #[test]
    fn requests_round_trip_through_json() {
        let reqs = [
            Request::Resilience {
                weights: inline(&[1, 1, 1, 1]),
                signs: "++++".into(),
                x: BigInt::from(0),
                kmax: None,
            },
            Request::Qk {
                weights: inline(&[1, 2]),
                k: 1,
                candidates: vec![BigInt::from(3)],
            },
            Request::Certify {
                spec: FamilySpec::new(Family::Layered, 1000),
                signs: Signs::Sampled { seed: 1, index: 2 },
            },
            Request::Bestats {
                weights: WeightInput::Family {
                    spec: FamilySpec::new(Family::Ones, 8),
                },
                mode: Mode::MonteCarlo {
                    samples: 10,
                    seed: 3,
                },
            },
        ];
        for r in reqs {
            let text = serde_json::to_string(&r).unwrap();
            let back: Request = serde_json::from_str(&text).unwrap();
            assert_eq!(back, r);
        }
    }

    #[test]
    fn ones_at_zero() {
        let out = Request::Resilience {
            weights: inline(&[1, 1, 1, 1]),
            signs: "++++".into(),
            x: BigInt::from(0),
            kmax: None,
        }
        .execute()
        .unwrap();
        assert_eq!(out.value["value"], 2);
        assert_eq!(out.value["witness"], serde_json::json!([1, 2]));
        assert_eq!(out.table.rows[0][2], "2");
    }

    #[test]
    fn unreachable_renders_inf() {
        let out = Request::Resilience {
            weights: inline(&[1, 2, 4]),
            signs: "+++".into(),
            x: BigInt::from(6),
            kmax: None,
        }
        .execute()
        .unwrap();
        assert_eq!(out.value["value"], "inf");
        assert_eq!(out.table.rows[0][2], "inf");
    }

    #[test]
    fn bounded_reports_exceeded() {
        let out = Request::Resilience {
            weights: inline(&[1, 1, 1, 1, 1, 1]),
            signs: "++++++".into(),
            x: BigInt::from(0),
            kmax: Some(2),
        }
        .execute()
        .unwrap();
        assert_eq!(out.value["algorithm"], "bounded");
        assert_eq!(out.value["exceeds"], 2);
        assert_eq!(out.table.rows[0][2], ">2");
    }
}
