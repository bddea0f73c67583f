use std::time::Instant;

use num_bigint::BigInt;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::estimate::estimate_resilience_prob;
use super::rng::mix;
use crate::error::{Error, Result};
use crate::families::{generate, FamilySpec};
use crate::scalar::{serde_int, serde_ratio};

/// Fewest surviving rows a slope fit accepts.
pub const MIN_FIT_ROWS: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Family to sweep; its `n` is replaced by each grid point.
    pub template: FamilySpec,
    pub k: usize,
    #[serde(with = "serde_int")]
    pub x: BigInt,
    pub n_grid: Vec<usize>,
    pub samples: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    #[serde(with = "serde_ratio")]
    pub estimate: Ratio<u64>,
    pub hits: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub samples: u64,
    /// Seed actually used for this row.
    pub seed: u64,
    pub wall_time_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Least-squares line through `(ln n, ln estimate)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub fitted_slope: f64,
    pub fitted_intercept: f64,
    pub slope_stderr: f64,
    pub fit_points: usize,
    pub warnings: Vec<String>,
}

impl SweepResult {
    /// Copy with wall times zeroed, for byte-level comparisons across runs.
    pub fn without_timing(&self) -> SweepResult {
        let mut out = self.clone();
        for row in &mut out.rows {
            row.wall_time_ms = 0;
        }
        out
    }
}

/// Ordinary least squares on `(x, y)` pairs.
pub fn fit_line(points: &[(f64, f64)]) -> Result<LogLogFit> {
    let m = points.len();
    if m < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {m}")));
    }
    let mf = m as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / mf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / mf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    Ok(LogLogFit {
        slope,
        intercept,
        slope_stderr: (rss / (mf - 2.0) / sxx).sqrt(),
        points: m,
    })
}

/// Estimates `Pr[R_x <= k]` at each grid length and fits the log-log slope.
pub fn sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    if cfg.n_grid.len() < MIN_FIT_ROWS {
        return Err(Error::InvalidParameter(format!(
            "n grid needs at least {MIN_FIT_ROWS} points, got {}",
            cfg.n_grid.len()
        )));
    }
    if cfg.n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "n grid must be strictly increasing".into(),
        ));
    }
    let mut rows = Vec::with_capacity(cfg.n_grid.len());
    let mut warnings = Vec::new();
    for &n in &cfg.n_grid {
        let seed = mix(cfg.seed, n as u64);
        let started = Instant::now();
        let spec = FamilySpec {
            n,
            ..cfg.template.clone()
        };
        let outcome = generate(&spec)
            .and_then(|a| estimate_resilience_prob(&a, &cfg.x, cfg.k, cfg.samples, seed));
        let wall_time_ms = started.elapsed().as_millis() as u64;
        rows.push(match outcome {
            Ok(r) => SweepRow {
                n,
                estimate: r.estimate,
                hits: r.hits,
                ci_low: r.ci_low,
                ci_high: r.ci_high,
                samples: r.samples,
                seed,
                wall_time_ms,
                error: None,
            },
            Err(e) => {
                warnings.push(format!("n = {n}: row failed: {e}"));
                SweepRow {
                    n,
                    estimate: Ratio::from_integer(0),
                    hits: 0,
                    ci_low: 0.0,
                    ci_high: 0.0,
                    samples: 0,
                    seed,
                    wall_time_ms,
                    error: Some(e.to_string()),
                }
            }
        });
    }

    let mut points = Vec::new();
    for row in rows.iter().filter(|r| r.error.is_none()) {
        if row.hits == 0 {
            warnings.push(format!(
                "n = {}: zero estimate excluded from the fit (biases the slope)",
                row.n
            ));
        } else {
            let p = row.hits as f64 / row.samples as f64;
            points.push(((row.n as f64).ln(), p.ln()));
        }
    }
    if points.len() < MIN_FIT_ROWS {
        return Err(Error::Fit(format!(
            "{} usable rows, need {MIN_FIT_ROWS}: {}",
            points.len(),
            warnings.join("; ")
        )));
    }
    let fit = fit_line(&points)?;
    Ok(SweepResult {
        rows,
        fitted_slope: fit.slope,
        fitted_intercept: fit.intercept,
        slope_stderr: fit.slope_stderr,
        fit_points: fit.points,
        warnings,
    })
}
