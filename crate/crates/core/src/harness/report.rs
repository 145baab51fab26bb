use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::{least_squares, upper_half};

/// Which dimension-like limit a [`DimensionEstimate`] approximates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DimensionKind {
    Mdim,
    Mrid,
    InfoDimRate,
    RateDistortion,
    Mbke,
}

/// Per-scale values of a quantity and its growth against `log(1/ε)`.
#[derive(Debug, Clone, Serialize)]
pub struct DimensionEstimate {
    pub label: DimensionKind,
    /// Strictly decreasing.
    pub eps_grid: Vec<f64>,
    /// Unnormalized values (S(ε), inf h, R(ε), ...).
    pub values: Vec<f64>,
    /// `values[i] / log(1/ε_i)` (NaN where `ε >= 1`).
    pub ratios: Vec<f64>,
    /// Least-squares slope of value against `log(1/ε)`.
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    /// Ratio at the smallest ε.
    pub last_ratio: f64,
    /// Max and min ratio over the finest half of the grid.
    pub ratio_upper: f64,
    pub ratio_lower: f64,
    /// Indices `i` where `values[i+1] < values[i]` although ε decreased.
    pub monotonicity_violations: Vec<usize>,
}

impl DimensionEstimate {
    pub fn new(label: DimensionKind, eps_grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if eps_grid.len() != values.len() || eps_grid.is_empty() {
            return Err(Error::domain("eps grid and values must be nonempty and of equal length"));
        }
        if eps_grid.windows(2).any(|w| w[1] >= w[0]) || eps_grid.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::domain("eps grid must be positive and strictly decreasing"));
        }
        let xs: Vec<f64> = eps_grid.iter().map(|e| (1.0 / e).ln()).collect();
        let (slope, intercept, residual) = least_squares(&xs, &values);
        let ratios: Vec<f64> = values
            .iter()
            .zip(&xs)
            .map(|(v, x)| if *x > 0.0 { v / x } else { f64::NAN })
            .collect();
        let top = &ratios[upper_half(ratios.len())];
        let finite = top.iter().copied().filter(|r| r.is_finite());
        let ratio_upper = finite.clone().fold(f64::NAN, f64::max);
        let ratio_lower = finite.fold(f64::NAN, f64::min);
        let monotonicity_violations = values
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[1] < w[0] - 1e-12)
            .map(|(i, _)| i)
            .collect();
        Ok(DimensionEstimate {
            label,
            last_ratio: *ratios.last().unwrap(),
            eps_grid,
            values,
            ratios,
            slope,
            intercept,
            residual,
            ratio_upper,
            ratio_lower,
            monotonicity_violations,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails,
    WeakenedCheckHolds,
    EvidenceOnly,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::WeakenedCheckHolds => "weakened-check-holds",
            Verdict::EvidenceOnly => "evidence-only",
        }
    }
}

/// How a number in a report was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Exact,
    Upper,
    Lower,
    Estimate,
}

/// One row of a verification table: `lhs <= rhs + tol`.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub key: String,
    pub lhs: f64,
    pub lhs_provenance: Provenance,
    pub rhs: f64,
    pub rhs_provenance: Provenance,
    pub tol: f64,
    pub satisfied: bool,
}

impl CheckRow {
    pub fn new(key: impl Into<String>, lhs: (f64, Provenance), rhs: (f64, Provenance), tol: f64) -> Self {
        CheckRow {
            key: key.into(),
            lhs: lhs.0,
            lhs_provenance: lhs.1,
            rhs: rhs.0,
            rhs_provenance: rhs.1,
            tol,
            satisfied: lhs.0 <= rhs.0 + tol,
        }
    }

    /// A `≤` row is sound when the left side is exact or an upper bound and
    /// the right side is exact or a lower bound.
    pub fn is_sound(&self) -> bool {
        matches!(self.lhs_provenance, Provenance::Exact | Provenance::Upper)
            && matches!(self.rhs_provenance, Provenance::Exact | Provenance::Lower)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub claim: String,
    pub rows: Vec<CheckRow>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl VerificationReport {
    /// Verdict from the rows: any violated row fails; all satisfied and sound
    /// rows hold; satisfied rows with an unsound bound are demoted to
    /// weakened. An empty table is evidence only.
    pub fn from_rows(claim: impl Into<String>, rows: Vec<CheckRow>, notes: Vec<String>) -> Self {
        let verdict = if rows.is_empty() {
            Verdict::EvidenceOnly
        } else if rows.iter().any(|r| !r.satisfied) {
            Verdict::Fails
        } else if rows.iter().all(|r| r.is_sound()) {
            Verdict::Holds
        } else {
            Verdict::WeakenedCheckHolds
        };
        VerificationReport {
            claim: claim.into(),
            rows,
            verdict,
            notes,
        }
    }

    pub fn evidence(claim: impl Into<String>, rows: Vec<CheckRow>, notes: Vec<String>) -> Self {
        VerificationReport {
            claim: claim.into(),
            rows,
            verdict: Verdict::EvidenceOnly,
            notes,
        }
    }

    pub fn demote_to_weakened(&mut self) {
        if self.verdict == Verdict::Holds {
            self.verdict = Verdict::WeakenedCheckHolds;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_log_inverse() {
        let eps: Vec<f64> = (2..=6).map(|k| 2f64.powi(-k)).collect();
        let vals: Vec<f64> = eps.iter().map(|e| (1.0 / e).ln()).collect();
        let d = DimensionEstimate::new(DimensionKind::Mdim, eps, vals).unwrap();
        assert!((d.slope - 1.0).abs() < 1e-12);
        assert!((d.last_ratio - 1.0).abs() < 1e-12);
        assert!(d.monotonicity_violations.is_empty());
    }

    #[test]
    fn rejects_increasing_grid() {
        assert!(DimensionEstimate::new(DimensionKind::Mdim, vec![0.1, 0.2], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn verdict_soundness() {
        let ok = CheckRow::new("a", (1.0, Provenance::Exact), (1.0, Provenance::Lower), 0.0);
        let weak = CheckRow::new("b", (1.0, Provenance::Lower), (2.0, Provenance::Exact), 0.0);
        let bad = CheckRow::new("c", (3.0, Provenance::Exact), (2.0, Provenance::Exact), 0.0);
        assert_eq!(VerificationReport::from_rows("x", vec![ok.clone()], vec![]).verdict, Verdict::Holds);
        assert_eq!(
            VerificationReport::from_rows("x", vec![ok.clone(), weak], vec![]).verdict,
            Verdict::WeakenedCheckHolds
        );
        assert_eq!(VerificationReport::from_rows("x", vec![ok, bad], vec![]).verdict, Verdict::Fails);
    }
}
