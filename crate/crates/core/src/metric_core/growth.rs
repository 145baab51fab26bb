use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use super::covering::{covering_number, CoverCount, CoverOptions};
use super::system::FiniteMetricSystem;
use crate::error::{Error, Result};
use crate::stats::{least_squares, upper_half};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RateMethod {
    #[default]
    SlopeFit,
    LastRatio,
    FeketeMin,
}

/// Whether the counts behind a series were exact, bracketed or a mix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CountingTag {
    Exact,
    Bracket,
    Mixed,
}

/// `log #(X, ρ_n, ε)` at one `n`, as a bracket (equal ends when exact).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthPoint {
    pub n: usize,
    pub log_lower: f64,
    pub log_upper: f64,
    pub exact: bool,
}

impl GrowthPoint {
    pub fn exact(n: usize, log_count: f64) -> Self {
        GrowthPoint {
            n,
            log_lower: log_count,
            log_upper: log_count,
            exact: true,
        }
    }

    pub fn from_count(n: usize, c: &CoverCount) -> Self {
        GrowthPoint {
            n,
            log_lower: c.log_lower(),
            log_upper: c.log_upper(),
            exact: c.is_exact(),
        }
    }

    pub fn log_mid(&self) -> f64 {
        0.5 * (self.log_lower + self.log_upper)
    }
}

/// Finite-n growth of covering numbers at one scale and its extrapolations.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthSeries {
    pub eps: f64,
    pub per_n: Vec<GrowthPoint>,
    /// The estimator selected by `method`, clamped at 0.
    pub rate: f64,
    /// Slope fits through the lower and upper log-counts.
    pub rate_bracket: (f64, f64),
    pub slope_fit: f64,
    pub slope_residual: f64,
    pub last_ratio: f64,
    /// `min_n (1/n) log #`, from upper bounds.
    pub fekete_min: f64,
    pub method: RateMethod,
    pub counting: CountingTag,
}

impl GrowthSeries {
    pub fn log_counts(&self) -> Vec<(usize, f64)> {
        self.per_n.iter().map(|p| (p.n, p.log_mid())).collect()
    }

    pub fn bracket_width(&self) -> f64 {
        (self.rate_bracket.1 - self.rate_bracket.0).abs()
    }
}

/// Builds a growth series from per-n log-counts.
///
/// Counts are nondecreasing in `n`, so lower bounds are propagated forward and
/// upper bounds backward before fitting.
pub fn growth_from_counts(eps: f64, mut per_n: Vec<GrowthPoint>, method: RateMethod) -> Result<GrowthSeries> {
    if per_n.is_empty() {
        return Err(Error::domain("growth series needs at least one n"));
    }
    if per_n.windows(2).any(|w| w[1].n <= w[0].n) || per_n[0].n == 0 {
        return Err(Error::domain("n values must be positive and strictly increasing"));
    }
    for k in 1..per_n.len() {
        if per_n[k].log_lower < per_n[k - 1].log_lower {
            per_n[k].log_lower = per_n[k - 1].log_lower;
        }
    }
    for k in (0..per_n.len() - 1).rev() {
        if per_n[k].log_upper > per_n[k + 1].log_upper {
            per_n[k].log_upper = per_n[k + 1].log_upper;
        }
    }
    for p in per_n.iter_mut() {
        if p.log_lower > p.log_upper + 1e-12 {
            return Err(Error::Invariant(format!(
                "count bracket inverted at n={}: {} > {}",
                p.n, p.log_lower, p.log_upper
            )));
        }
        if p.log_lower >= p.log_upper {
            p.log_upper = p.log_lower;
        }
    }
    let counting = if per_n.iter().all(|p| p.exact) {
        CountingTag::Exact
    } else if per_n.iter().any(|p| p.exact) {
        CountingTag::Mixed
    } else {
        CountingTag::Bracket
    };
    let fit = upper_half(per_n.len());
    let xs: Vec<f64> = per_n[fit.clone()].iter().map(|p| p.n as f64).collect();
    let slope_of = |f: &dyn Fn(&GrowthPoint) -> f64| {
        let ys: Vec<f64> = per_n[fit.clone()].iter().map(f).collect();
        least_squares(&xs, &ys)
    };
    let (slope_fit, _, slope_residual) = slope_of(&|p| p.log_mid());
    let (lo, _, _) = slope_of(&|p| p.log_lower);
    let (hi, _, _) = slope_of(&|p| p.log_upper);
    let last_ratio = match per_n.len() {
        1 => per_n[0].log_mid() / per_n[0].n as f64,
        k => {
            let (a, b) = (&per_n[k - 2], &per_n[k - 1]);
            (b.log_mid() - a.log_mid()) / (b.n - a.n) as f64
        }
    };
    let fekete_min = per_n
        .iter()
        .map(|p| p.log_upper / p.n as f64)
        .fold(f64::INFINITY, f64::min);
    let chosen = match method {
        RateMethod::SlopeFit => slope_fit,
        RateMethod::LastRatio => last_ratio,
        RateMethod::FeketeMin => fekete_min,
    };
    Ok(GrowthSeries {
        eps,
        per_n,
        rate: chosen.max(0.0),
        rate_bracket: (lo.min(hi).max(0.0), lo.max(hi).max(0.0)),
        slope_fit,
        slope_residual,
        last_ratio,
        fekete_min,
        method,
        counting,
    })
}

/// `log #(X, ρ_n, ε)` for each `n` in the range and the rate extrapolations.
pub fn growth_rate(
    sys: &FiniteMetricSystem,
    eps: f64,
    n_range: RangeInclusive<usize>,
    opts: &CoverOptions,
    method: RateMethod,
) -> Result<GrowthSeries> {
    if !(eps > 0.0) {
        return Err(Error::domain(format!("eps must be positive, got {eps}")));
    }
    if n_range.is_empty() || *n_range.start() == 0 {
        return Err(Error::domain("n range must be nonempty and start at 1 or above"));
    }
    let mut per_n = Vec::new();
    for n in n_range {
        let c = covering_number(&sys.bowen(n)?, eps, opts)?;
        per_n.push(GrowthPoint::from_count(n, &c));
    }
    growth_from_counts(eps, per_n, method)
}

#[derive(Debug, Clone, Serialize)]
pub struct TameRow {
    pub eps: f64,
    pub delta: f64,
    pub log_count: f64,
    /// `ε^δ · log #(X, ρ, ε)`.
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TameVerdict {
    pub delta: f64,
    pub trends_to_zero: bool,
    pub label: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TameTable {
    pub rows: Vec<TameRow>,
    pub verdicts: Vec<TameVerdict>,
}

/// Tabulates `ε^δ log #(X, ρ, ε)` and reports whether each δ-row is visibly
/// decreasing toward 0 over the finest half of the ε grid. Diagnostic only.
///
/// `counts` holds `(ε, log #)` pairs; they are sorted by decreasing ε.
pub fn tame_growth_diagnostic(counts: &[(f64, f64)], deltas: &[f64]) -> Result<TameTable> {
    if counts.is_empty() {
        return Err(Error::domain("tame growth diagnostic needs at least one scale"));
    }
    if counts.iter().any(|&(e, l)| !(e > 0.0) || !(l >= 0.0)) {
        return Err(Error::domain("scales must be positive and log-counts nonnegative"));
    }
    let mut grid = counts.to_vec();
    grid.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    for &delta in deltas {
        if !(delta >= 0.0) {
            return Err(Error::domain(format!("delta must be nonnegative, got {delta}")));
        }
        let vals: Vec<f64> = grid.iter().map(|&(e, l)| e.powf(delta) * l).collect();
        for (&(eps, log_count), &value) in grid.iter().zip(&vals) {
            rows.push(TameRow {
                eps,
                delta,
                log_count,
                value,
            });
        }
        let tail = &vals[upper_half(vals.len())];
        let all_zero = tail.iter().all(|&v| v == 0.0);
        let nonincreasing = tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
        let first = tail[0];
        let last = tail[tail.len() - 1];
        let trends_to_zero = all_zero || (nonincreasing && last < first);
        let label = if trends_to_zero {
            format!("decreasing toward 0 at delta={delta}")
        } else {
            format!("not visibly decreasing at delta={delta}")
        };
        verdicts.push(TameVerdict {
            delta,
            trends_to_zero,
            label,
        });
    }
    Ok(TameTable { rows, verdicts })
}
