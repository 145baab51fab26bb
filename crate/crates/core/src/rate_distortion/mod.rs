//! L^p rate-distortion and distortion-rate functions of block sources.
//!
//! Rates are mutual informations per symbol in nats. The distortion
//! constraint is `E (1/n) Σ d(X_k, Y_k)^p <= ε^p`; the distortion-rate
//! function reports the p-th root of the optimal expected cost.

mod ba;
mod curve;

pub use ba::{blahut_arimoto, blahut_arimoto_from, mutual_information, BaResult, DistortionProblem};
pub use curve::{CurvePoint, DistortionValue, RDCurve, RateValue, RdOptions, RdSolver};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::{CheckRow, DimensionEstimate, DimensionKind, Provenance, VerificationReport};
use crate::measures::{ergodic_components, MeasureSpec, DEFAULT_BLOCK_BUDGET};

/// Solver for the `n`-block problem of `mu` with the support reproduction alphabet.
pub fn rd_solver(mu: &MeasureSpec, n: usize, p: f64) -> Result<RdSolver> {
    let prob = DistortionProblem::from_measure(mu, n, p, false, DEFAULT_BLOCK_BUDGET)?;
    RdSolver::new(prob, RdOptions::default())
}

/// Swept curve of the `n`-block problem.
pub fn rd_curve(mu: &MeasureSpec, n: usize, p: f64) -> Result<RDCurve> {
    Ok(rd_solver(mu, n, p)?.curve)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RdValue {
    pub eps: f64,
    pub n: usize,
    pub rate: f64,
    pub lower: f64,
    pub upper: f64,
}

fn rd_value_with(solver: &RdSolver, diam: f64, eps: f64) -> Result<RdValue> {
    if !(eps > 0.0) {
        return Err(Error::domain(format!("eps must be positive, got {eps}")));
    }
    let n = solver.prob.n;
    if eps >= diam {
        return Ok(RdValue {
            eps,
            n,
            rate: 0.0,
            lower: 0.0,
            upper: 0.0,
        });
    }
    let v = solver.rate_at(eps.powf(solver.prob.p))?;
    Ok(RdValue {
        eps,
        n,
        rate: v.rate,
        lower: v.lower,
        upper: v.upper,
    })
}

/// `R̃_{μ,p}(n, ε)`.
pub fn rd_value(mu: &MeasureSpec, n: usize, p: f64, eps: f64) -> Result<RdValue> {
    let diam = mu.alphabet().diameter();
    if eps >= diam && eps > 0.0 {
        return Ok(RdValue {
            eps,
            n,
            rate: 0.0,
            lower: 0.0,
            upper: 0.0,
        });
    }
    rd_value_with(&rd_solver(mu, n, p)?, diam, eps)
}

#[derive(Debug, Clone, Serialize)]
pub struct RdLimit {
    /// Minimum over the computed block lengths (an upper bound on the limit).
    pub value: f64,
    pub per_n: Vec<RdValue>,
    pub running_min: Vec<f64>,
}

/// `R̃_{μ,p}(n, ε)` along `n_range` and its running minimum.
pub fn rd_limit_estimate(mu: &MeasureSpec, p: f64, eps: f64, n_range: std::ops::RangeInclusive<usize>) -> Result<RdLimit> {
    if n_range.is_empty() || *n_range.start() == 0 {
        return Err(Error::domain("n range must be nonempty and start at 1 or above"));
    }
    let mut per_n = Vec::new();
    let mut running_min = Vec::new();
    let mut best = f64::INFINITY;
    for n in n_range {
        let v = rd_value(mu, n, p, eps)?;
        best = best.min(v.rate);
        per_n.push(v);
        running_min.push(best);
    }
    Ok(RdLimit {
        value: best,
        per_n,
        running_min,
    })
}

/// `D_{μ,p}(R, n)`: the p-th root of the least expected cost at rate `rate`.
pub fn distortion_rate(mu: &MeasureSpec, n: usize, p: f64, rate: f64) -> Result<f64> {
    if !(rate >= 0.0) {
        return Err(Error::domain(format!("rate budget must be nonnegative, got {rate}")));
    }
    let s = rd_solver(mu, n, p)?;
    Ok(s.distortion_at(rate)?.distortion.powf(1.0 / p))
}

/// Largest violation of discrete convexity of `ys` over `xs`
/// (`y_i` above the chord through its neighbours).
pub fn convexity_violation(xs: &[f64], ys: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 1..xs.len().saturating_sub(1) {
        let (x0, x1, x2) = (xs[i - 1], xs[i], xs[i + 1]);
        if x2 == x0 {
            continue;
        }
        let t = (x1 - x0) / (x2 - x0);
        let chord = ys[i - 1] + t * (ys[i + 1] - ys[i - 1]);
        worst = worst.max(ys[i] - chord);
    }
    worst
}

/// Largest increase between consecutive values (0 for nonincreasing data).
pub fn monotonicity_violation(ys: &[f64]) -> f64 {
    ys.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct InverseRow {
    pub rate: f64,
    /// `D_{μ,p}(R, n)`.
    pub distortion: f64,
    /// `D^p`, the optimal expected cost.
    pub cost: f64,
    /// `R̃_{μ,p}(n, D(R))`.
    pub rate_back: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InverseCheck {
    pub rows: Vec<InverseRow>,
    pub report: VerificationReport,
}

/// Composes the distortion-rate and rate-distortion functions on a grid of
/// rates in `(0, H/n)` and checks `|R̃(D(R)) - R| <= tol` together with
/// monotonicity and convexity of both curves on the grid. Convexity is
/// checked on the cost scale `D^p`; the p-th root need not be convex.
pub fn inverse_consistency_check(mu: &MeasureSpec, n: usize, p: f64, grid: usize, tol: f64) -> Result<InverseCheck> {
    let solver = rd_solver(mu, n, p)?;
    let r_max = solver.max_rate();
    let mut rows = Vec::new();
    for k in 1..=grid {
        let rate = r_max * k as f64 / (grid + 1) as f64;
        let dv = solver.distortion_at(rate)?;
        if dv.distortion <= 0.0 {
            continue;
        }
        let back = solver.rate_at(dv.distortion)?;
        rows.push(InverseRow {
            rate,
            distortion: dv.distortion.powf(1.0 / p),
            cost: dv.distortion,
            rate_back: back.rate,
            residual: (back.rate - rate).abs(),
        });
    }
    let mut checks: Vec<CheckRow> = rows
        .iter()
        .map(|r| {
            CheckRow::new(
                format!("inverse at R={:.6}", r.rate),
                (r.residual, Provenance::Estimate),
                (0.0, Provenance::Exact),
                tol,
            )
        })
        .collect();
    let rs: Vec<f64> = rows.iter().map(|r| r.rate).collect();
    let ds: Vec<f64> = rows.iter().map(|r| r.cost).collect();
    let (d_sorted, r_sorted): (Vec<f64>, Vec<f64>) = {
        let mut pairs: Vec<(f64, f64)> = ds.iter().copied().zip(rs.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs.into_iter().unzip()
    };
    if !rows.is_empty() {
        for (key, v) in [
            ("D(R) nonincreasing", monotonicity_violation(&ds)),
            ("D^p(R) convex", convexity_violation(&rs, &ds)),
            ("R(D) nonincreasing", monotonicity_violation(&r_sorted)),
            ("R(D^p) convex", convexity_violation(&d_sorted, &r_sorted)),
        ] {
            checks.push(CheckRow::new(key, (v, Provenance::Estimate), (0.0, Provenance::Exact), 1e-8));
        }
    }
    let notes = vec![format!("n={n}, p={p}, solver estimates; vacuous when the grid is empty")];
    let report = if rows.is_empty() {
        VerificationReport::evidence("distortion-rate inverse", checks, notes)
    } else {
        VerificationReport::from_rows("distortion-rate inverse", checks, notes)
    };
    Ok(InverseCheck { rows, report })
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionRow {
    pub rate: f64,
    pub mixture: f64,
    pub components: Vec<f64>,
    pub weighted: f64,
}

/// Finite-n surrogate of `D_μ(R) <= Σ_i w_i D_{μ_i}(R)` over the ergodic
/// components of a mixture or reducible Markov measure.
pub fn decomposition_inequality_check(
    mu: &MeasureSpec,
    n: usize,
    p: f64,
    r_grid: &[f64],
    tol: f64,
) -> Result<(Vec<DecompositionRow>, VerificationReport)> {
    let comps = ergodic_components(mu)?;
    let mix = rd_solver(mu, n, p)?;
    let solvers: Vec<(f64, RdSolver)> = comps
        .iter()
        .map(|(w, c)| Ok((*w, rd_solver(c, n, p)?)))
        .collect::<Result<_>>()?;
    let root = |v: f64| v.max(0.0).powf(1.0 / p);
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for &r in r_grid {
        let lhs = root(mix.distortion_at(r)?.distortion);
        let components: Vec<f64> = solvers
            .iter()
            .map(|(_, s)| Ok(root(s.distortion_at(r)?.distortion)))
            .collect::<Result<_>>()?;
        let weighted: f64 = solvers.iter().zip(&components).map(|((w, _), d)| w * d).sum();
        checks.push(CheckRow::new(
            format!("R={r:.6}"),
            (lhs, Provenance::Upper),
            (weighted, Provenance::Upper),
            tol,
        ));
        rows.push(DecompositionRow {
            rate: r,
            mixture: lhs,
            components,
            weighted,
        });
    }
    let notes = vec![format!(
        "finite-n surrogate (n={n}, p={p}) of the ergodic-decomposition inequality with constant rate allocation"
    )];
    Ok((rows, VerificationReport::from_rows("ergodic decomposition inequality", checks, notes)))
}

#[derive(Debug, Clone, Serialize)]
pub struct DominanceRow {
    pub distortion: f64,
    pub mixture: f64,
    pub components: Vec<f64>,
    pub dominating: usize,
}

/// At each distortion level, the mixture rate against the largest ergodic
/// component rate, naming the component that attains it.
pub fn ergodic_dominance_experiment(
    mu: &MeasureSpec,
    p: f64,
    d_grid: &[f64],
    n: usize,
    tol: f64,
) -> Result<(Vec<DominanceRow>, VerificationReport)> {
    let comps = ergodic_components(mu)?;
    let diam = mu.alphabet().diameter();
    let mix = rd_solver(mu, n, p)?;
    let solvers: Vec<RdSolver> = comps.iter().map(|(_, c)| rd_solver(c, n, p)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for &d in d_grid {
        let lhs = rd_value_with(&mix, diam, d)?.rate;
        let components: Vec<f64> = solvers
            .iter()
            .map(|s| Ok(rd_value_with(s, diam, d)?.rate))
            .collect::<Result<_>>()?;
        let (dominating, best) = components
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        checks.push(CheckRow::new(
            format!("D={d:.6} (component {dominating})"),
            (lhs, Provenance::Estimate),
            (best, Provenance::Estimate),
            tol,
        ));
        rows.push(DominanceRow {
            distortion: d,
            mixture: lhs,
            components,
            dominating,
        });
    }
    let notes = vec![format!("finite-n surrogate (n={n}, p={p}); rates are solver estimates")];
    Ok((rows, VerificationReport::from_rows("ergodic dominance", checks, notes)))
}

/// `R̃_{μ,p}(n, ε)` against `log(1/ε)`.
pub fn rd_dimension(mu: &MeasureSpec, p: f64, eps_grid: &[f64], n: usize) -> Result<DimensionEstimate> {
    let diam = mu.alphabet().diameter();
    let solver = rd_solver(mu, n, p)?;
    let values = eps_grid
        .iter()
        .map(|&e| Ok(rd_value_with(&solver, diam, e)?.rate))
        .collect::<Result<Vec<_>>>()?;
    DimensionEstimate::new(DimensionKind::RateDistortion, eps_grid.to_vec(), values)
}
