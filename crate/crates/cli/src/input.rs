//! Weights files and argument grammars.
//!
//! A weights file is either whitespace-separated numbers (`#` starts a
//! comment; `p/q` rationals allowed) or a JSON document
//! `{"name": .., "weights": [..], "params": {..}}`. Rationals are scaled by
//! the LCM of their denominators; the scale is echoed in the run record.

use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use resilience_core::WeightSequence;

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq)]
pub struct ParsedWeights {
    pub sequence: WeightSequence,
    /// Every input value was multiplied by this.
    pub scale: BigInt,
}

pub fn parse_weights(text: &str) -> Result<ParsedWeights, CliError> {
    if text.trim_start().starts_with('{') {
        let sequence: WeightSequence = serde_json::from_str(text).map_err(|e| CliError::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        return Ok(ParsedWeights {
            sequence,
            scale: BigInt::one(),
        });
    }
    let mut values: Vec<BigRational> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("");
        for tok in body.split_whitespace() {
            let r = BigRational::from_str(tok).map_err(|_| CliError::Parse {
                line: i + 1,
                message: format!("not an integer or p/q rational: {tok:?}"),
            })?;
            if r.is_zero() {
                return Err(CliError::Parse {
                    line: i + 1,
                    message: "weights must be nonzero".into(),
                });
            }
            values.push(r);
        }
    }
    if values.is_empty() {
        return Err(CliError::Parse {
            line: text.lines().count().max(1),
            message: "no weights found".into(),
        });
    }
    let scale = values
        .iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let weights = values.iter().map(|r| (r * &scale).to_integer()).collect();
    Ok(ParsedWeights {
        sequence: WeightSequence::new(weights)?,
        scale,
    })
}

/// `start:end:xF` (geometric), `start:end:+S` (arithmetic) or `n1,n2,...`.
pub fn parse_grid(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = |why: &str| CliError::Usage(format!("bad n grid {s:?}: {why}"));
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| bad("expected an integer"))
    };
    if s.contains(',') || !s.contains(':') {
        return s.split(',').map(num).collect();
    }
    let parts: Vec<&str> = s.split(':').collect();
    let [start, end, step] = parts[..] else {
        return Err(bad("expected start:end:step"));
    };
    let (start, end) = (num(start)?, num(end)?);
    let mut grid = Vec::new();
    let mut n = start;
    if let Some(f) = step.strip_prefix('x') {
        let f = num(f)?;
        if f < 2 || start == 0 {
            return Err(bad("geometric steps need factor >= 2 and start >= 1"));
        }
        while n <= end {
            grid.push(n);
            n = n.checked_mul(f).ok_or_else(|| bad("overflow"))?;
        }
    } else {
        let d = num(step.strip_prefix('+').unwrap_or(step))?;
        if d == 0 {
            return Err(bad("step must be positive"));
        }
        while n <= end {
            grid.push(n);
            n += d;
        }
    }
    Ok(grid)
}

/// Comma-separated integers.
pub fn parse_int_list(s: &str) -> Result<Vec<BigInt>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("not an integer: {t:?}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_and_commented() {
        let p = parse_weights("1 2\n# note\n -3 4 # tail\n").unwrap();
        assert_eq!(
            p.sequence,
            WeightSequence::from_i64s(&[1, 2, -3, 4]).unwrap()
        );
        assert_eq!(p.scale, BigInt::one());
    }

    #[test]
    fn rationals_are_scaled() {
        let p = parse_weights("1/2 1/3\n2").unwrap();
        assert_eq!(p.scale, BigInt::from(6));
        assert_eq!(p.sequence, WeightSequence::from_i64s(&[3, 2, 12]).unwrap());
    }

    #[test]
    fn errors_carry_line_numbers() {
        match parse_weights("1 2\n3 x\n") {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match parse_weights("1\n\n0\n") {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(parse_weights("# nothing\n").is_err());
    }

    #[test]
    fn json_document() {
        let p =
            parse_weights(r#"{"name": "t", "weights": [1, 2, "99999999999999999999"]}"#).unwrap();
        assert_eq!(p.sequence.name(), Some("t"));
        assert_eq!(p.sequence.len(), 3);
        assert!(matches!(
            parse_weights("{\n\"weights\": [1,\n 0]}"),
            Err(CliError::Parse { .. })
        ));
        match parse_weights("{\n\"weights\": [1,\n ]}") {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("4096:131072:x2").unwrap().len(), 6);
        assert_eq!(parse_grid("10:40:+10").unwrap(), vec![10, 20, 30, 40]);
        assert_eq!(parse_grid("5,7,9").unwrap(), vec![5, 7, 9]);
        assert!(parse_grid("1:2:x1").is_err());
        assert!(parse_grid("1:2").is_err());
    }
}
