//! Bowen-ball measures and Brin–Katok local entropy on windowed shifts.
//!
//! A point of the shift is represented by a word on the coordinates
//! `[-W, horizon + W)`; index `W` is coordinate 0. Ball membership uses the
//! product metric truncated to that window, whose error is at most the tail
//! bound `diam(A) · 2^{1-W}`.

use serde::Serialize;

use crate::entropy::{inf_entropy_small_partitions, PartitionFamily};
use crate::error::{Error, Result};
use crate::harness::{CheckRow, Provenance, VerificationReport};
use crate::measures::{
    closed_form_entropy_rate, cylinder_mass, ergodic_components, is_ergodic, sample_orbit_stream, visit_blocks_pruned,
    MeasureSpec, DEFAULT_BLOCK_BUDGET,
};
use crate::shift_systems::ShiftWindowSystem;
use crate::{par, stats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BallMode {
    ExactCylinder,
    Enumerated,
    Sampled,
}

impl BallMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            BallMode::ExactCylinder => "exact_cylinder",
            BallMode::Enumerated => "enumerated",
            BallMode::Sampled => "sampled",
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, BallMode::Sampled)
    }
}

/// How to evaluate a ball measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BallMethod {
    /// Cylinder mass below the alphabet gap, enumeration otherwise.
    Auto,
    Enumerated { budget: usize },
    Sampled { samples: usize, seed: u64 },
}

/// `μ(B_n(x, ε))` with a bracket from the window truncation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BallMeasure {
    /// Reported value; equals `upper`.
    pub measure: f64,
    pub lower: f64,
    pub upper: f64,
    pub mode: BallMode,
}

fn check_ball_args(mu: &MeasureSpec, sys: &ShiftWindowSystem, center: &[u8], n: usize, eps: f64) -> Result<()> {
    if !(eps > 0.0) {
        return Err(Error::domain(format!("eps must be positive, got {eps}")));
    }
    if n == 0 || n > sys.horizon {
        return Err(Error::domain(format!("n must lie in 1..={}, got {n}", sys.horizon)));
    }
    if mu.symbol_count() != sys.alphabet.len() {
        return Err(Error::domain("measure and system use different alphabets"));
    }
    if center.len() < n + 2 * sys.window {
        return Err(Error::domain("center word is shorter than the window"));
    }
    if center.iter().any(|&s| s as usize >= sys.alphabet.len()) {
        return Err(Error::domain("center uses a symbol outside the alphabet"));
    }
    Ok(())
}

/// Truncated `ρ_n` weights: `w[i][k] = 2^{-|i - (W + k)|}`.
fn bowen_weights(window: usize, n: usize) -> Vec<Vec<f64>> {
    (0..n + 2 * window)
        .map(|i| (0..n).map(|k| 0.5f64.powi(i.abs_diff(window + k) as i32)).collect())
        .collect()
}

fn truncated_bowen(sym: &[f64], w: &[Vec<f64>], x: &[u8], y: &[u8]) -> f64 {
    let n = w[0].len();
    (0..n)
        .map(|k| {
            x.iter()
                .zip(y)
                .enumerate()
                .map(|(i, (&a, &b))| (sym[a as usize] - sym[b as usize]).abs() * w[i][k])
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Measure of the Bowen ball `{y : ρ_n(x, y) < ε}` around `center`.
pub fn bowen_ball_measure(
    mu: &MeasureSpec,
    sys: &ShiftWindowSystem,
    center: &[u8],
    n: usize,
    eps: f64,
    method: BallMethod,
) -> Result<BallMeasure> {
    check_ball_args(mu, sys, center, n, eps)?;
    let wdw = sys.window;
    let len = n + 2 * wdw;
    let x = &center[..len];
    let tail = sys.tail_bound();
    let diam = sys.alphabet.diameter();
    // sup of the product metric is 3 diam(A)
    if eps > 3.0 * diam {
        return Ok(BallMeasure {
            measure: 1.0,
            lower: 1.0,
            upper: 1.0,
            mode: BallMode::ExactCylinder,
        });
    }
    let sym = sys.alphabet.symbols();
    match method {
        BallMethod::Auto if eps < sys.alphabet.gap() - tail => {
            let upper = cylinder_mass(mu, &x[wdw..wdw + n])?;
            let lower = if tail < eps { cylinder_mass(mu, x)? } else { 0.0 };
            Ok(BallMeasure {
                measure: upper,
                lower,
                upper,
                mode: BallMode::ExactCylinder,
            })
        }
        BallMethod::Auto | BallMethod::Enumerated { .. } => {
            let budget = match method {
                BallMethod::Enumerated { budget } => budget,
                _ => DEFAULT_BLOCK_BUDGET,
            };
            let w = bowen_weights(wdw, n);
            // partial[d][k]: weighted distance over the first d coordinates
            let partial = std::cell::RefCell::new(vec![vec![0.0; n]; len + 1]);
            let (mut upper, mut lower) = (0.0, 0.0);
            visit_blocks_pruned(
                mu,
                len,
                budget,
                |prefix| {
                    let d = prefix.len() - 1;
                    let gap = (sym[x[d] as usize] - sym[prefix[d]]).abs();
                    let mut rows = partial.borrow_mut();
                    let (head, tail_rows) = rows.split_at_mut(d + 1);
                    let mut worst: f64 = 0.0;
                    for k in 0..n {
                        tail_rows[0][k] = head[d][k] + gap * w[d][k];
                        worst = worst.max(tail_rows[0][k]);
                    }
                    worst < eps
                },
                |_, mass| {
                    let dist = partial.borrow()[len].iter().copied().fold(0.0, f64::max);
                    upper += mass;
                    if dist + tail < eps {
                        lower += mass;
                    }
                },
            )?;
            Ok(BallMeasure {
                measure: upper,
                lower,
                upper,
                mode: BallMode::Enumerated,
            })
        }
        BallMethod::Sampled { samples, seed } => {
            if samples == 0 {
                return Err(Error::domain("sampled mode needs at least one sample"));
            }
            let ys: Vec<u64> = (0..samples as u64).collect();
            let w = bowen_weights(wdw, n);
            let dists = par::map(&ys, |&s| -> Result<f64> {
                let y = sample_orbit_stream(mu, len, seed, s)?;
                Ok(truncated_bowen(sym, &w, x, &y))
            });
            let (mut inside, mut inner) = (0usize, 0usize);
            for d in dists {
                let d: f64 = d?;
                inside += (d < eps) as usize;
                inner += (d + tail < eps) as usize;
            }
            let upper = inside as f64 / samples as f64;
            Ok(BallMeasure {
                measure: upper,
                lower: inner as f64 / samples as f64,
                upper,
                mode: BallMode::Sampled,
            })
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BallDecaySeries {
    pub center: Vec<u8>,
    pub eps: f64,
    /// `(n, -(1/n) log μ(B_n))`.
    pub per_n: Vec<(usize, f64)>,
    pub log_measure: Vec<f64>,
    pub log_lower: Vec<f64>,
    /// Slope of `-log μ(B_n)` against `n` over the upper half of the range.
    pub hbk_estimate: f64,
    pub mode: BallMode,
}

/// Slope of `-log μ(B_n)` over the upper half of the n range (the single
/// ratio when the range has one point).
fn decay_slope(ns: &[usize], log_measure: &[f64]) -> f64 {
    if ns.len() == 1 {
        return -log_measure[0] / ns[0] as f64;
    }
    let mut idx = stats::upper_half(ns.len());
    if idx.len() < 2 {
        idx = ns.len() - 2..ns.len();
    }
    let xs: Vec<f64> = idx.clone().map(|i| ns[i] as f64).collect();
    let ys: Vec<f64> = idx.map(|i| -log_measure[i]).collect();
    stats::least_squares(&xs, &ys).0
}

/// Ball measures around one center along `n_range`.
pub fn ball_series(
    mu: &MeasureSpec,
    sys: &ShiftWindowSystem,
    center: &[u8],
    eps: f64,
    n_range: std::ops::RangeInclusive<usize>,
    method: BallMethod,
) -> Result<BallDecaySeries> {
    if n_range.is_empty() || *n_range.start() == 0 {
        return Err(Error::domain("n range must be nonempty and start at 1 or above"));
    }
    let ns: Vec<usize> = n_range.collect();
    let mut log_measure = Vec::with_capacity(ns.len());
    let mut log_lower = Vec::with_capacity(ns.len());
    let mut mode = BallMode::ExactCylinder;
    for &n in &ns {
        let b = bowen_ball_measure(mu, sys, center, n, eps, method)?;
        if b.measure <= 0.0 {
            return Err(Error::Invariant(format!("ball around its own center has zero mass at n={n}")));
        }
        if b.mode != BallMode::ExactCylinder {
            mode = b.mode;
        }
        log_measure.push(b.measure.ln());
        log_lower.push(b.lower.ln());
    }
    if mode.is_exact() && log_measure.windows(2).any(|w| w[1] > w[0] + 1e-12) {
        return Err(Error::Invariant("ball measures grew with n".into()));
    }
    let per_n = ns.iter().zip(&log_measure).map(|(&n, &l)| (n, -l / n as f64)).collect();
    Ok(BallDecaySeries {
        center: center.to_vec(),
        eps,
        per_n,
        hbk_estimate: decay_slope(&ns, &log_measure).max(0.0),
        log_measure,
        log_lower,
        mode,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BrinKatok {
    /// Mean of the per-center estimates.
    pub hbk: f64,
    pub median: f64,
    /// Max minus min across centers.
    pub spread: f64,
    pub series: Vec<BallDecaySeries>,
}

impl BrinKatok {
    pub fn all_exact(&self) -> bool {
        self.series.iter().all(|s| s.mode.is_exact())
    }
}

/// Brin–Katok local entropy of an ergodic measure from `centers` sampled
/// centers (center `c` uses stream `c` of `seed`).
pub fn brin_katok_estimate(
    mu: &MeasureSpec,
    sys: &ShiftWindowSystem,
    eps: f64,
    n_range: std::ops::RangeInclusive<usize>,
    centers: usize,
    seed: u64,
    method: BallMethod,
) -> Result<BrinKatok> {
    if !is_ergodic(mu)? {
        return Err(Error::Unsupported(
            "measure is not ergodic; use brin_katok_per_component".into(),
        ));
    }
    if centers < 3 {
        return Err(Error::domain("at least 3 centers are required"));
    }
    let len = sys.word_len();
    let ids: Vec<u64> = (0..centers as u64).collect();
    let series = par::map(&ids, |&c| {
        let x = sample_orbit_stream(mu, len, seed, c)?;
        ball_series(mu, sys, &x, eps, n_range.clone(), method)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = series.iter().map(|s| s.hbk_estimate).collect();
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(BrinKatok {
        hbk: values.iter().sum::<f64>() / values.len() as f64,
        median: stats::median(&values),
        spread: hi - lo,
        series,
    })
}

/// Estimates per ergodic component, with the component weights.
pub fn brin_katok_per_component(
    mu: &MeasureSpec,
    sys: &ShiftWindowSystem,
    eps: f64,
    n_range: std::ops::RangeInclusive<usize>,
    centers: usize,
    seed: u64,
    method: BallMethod,
) -> Result<Vec<(f64, BrinKatok)>> {
    ergodic_components(mu)?
        .into_iter()
        .map(|(w, c)| Ok((w, brin_katok_estimate(&c, sys, eps, n_range.clone(), centers, seed, method)?)))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct BkPartitionCheck {
    pub hbk: BrinKatok,
    /// Right side: family infimum, or the entropy rate when certified minimal.
    pub inf_entropy: f64,
    pub report: VerificationReport,
}

/// `h^BK(ε) <= inf_{diam P < ε} h(P) + tol`.
///
/// Below the alphabet gap every partition of diameter `< ε` refines the
/// time-zero partition, so the infimum equals the entropy rate; that value is
/// then used as an exact right side when a closed form exists.
#[allow(clippy::too_many_arguments)]
pub fn bk_partition_check(
    mu: &MeasureSpec,
    sys: &ShiftWindowSystem,
    eps: f64,
    family: &PartitionFamily,
    n_max: usize,
    centers: usize,
    seed: u64,
    tol: f64,
) -> Result<BkPartitionCheck> {
    let n_hi = n_max.min(sys.horizon);
    let hbk = brin_katok_estimate(mu, sys, eps, 1..=n_hi, centers, seed, BallMethod::Auto)?;
    let strict = PartitionFamily {
        strict: true,
        ..*family
    };
    let inf = inf_entropy_small_partitions(mu, eps, &strict, n_max)?;
    let mut notes = vec![format!(
        "eps={eps}, n<={n_hi}, {centers} centers, family minimum over {} candidates ({})",
        inf.candidates, inf.argmin.label
    )];
    let certified = eps <= sys.alphabet.gap() && inf.includes_point_partition;
    let (rhs, rhs_prov) = match closed_form_entropy_rate(mu) {
        Some(h) if certified => {
            notes.push("right side is the entropy rate: eps is at most the alphabet gap".into());
            (h, Provenance::Exact)
        }
        _ => (inf.value, Provenance::Upper),
    };
    let lhs_prov = if hbk.all_exact() {
        Provenance::Exact
    } else {
        Provenance::Estimate
    };
    notes.push("left side is the finite-n decay slope of exactly computed ball measures".into());
    let row = CheckRow::new("h_BK <= inf h(P)", (hbk.hbk, lhs_prov), (rhs, rhs_prov), tol);
    let report = VerificationReport::from_rows("Brin-Katok entropy below small-partition entropy", vec![row], notes);
    Ok(BkPartitionCheck {
        hbk,
        inf_entropy: rhs,
        report,
    })
}

/// ε₀ proxy: `min(d_min / 2, ε*)`, where `ε*` is the largest grid scale below
/// 1 from which on (towards 0) every `S(ε) / log(1/ε)` lies within `δ/2` of
/// `mdim_est`. Returns 0 when no grid scale qualifies.
pub fn eps0_proxy(d_min: f64, delta: f64, mdim_est: f64, s_values: &[(f64, f64)]) -> f64 {
    let mut pts: Vec<(f64, f64)> = s_values.iter().copied().filter(|&(e, _)| e > 0.0 && e < 1.0).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = 0.0;
    for &(e, s) in &pts {
        if (s / (1.0 / e).ln() - mdim_est).abs() <= delta / 2.0 + 1e-12 {
            best = e;
        } else {
            break;
        }
    }
    (d_min / 2.0).min(best)
}

#[derive(Debug, Clone, Serialize)]
pub struct BallBoundCheck {
    pub eps: f64,
    pub delta: f64,
    pub mdim_est: f64,
    pub eps0: f64,
    pub inside_proxy: bool,
    /// The bound held at every center and every n.
    pub holds_everywhere: bool,
    pub first_failure: Vec<Option<usize>>,
    pub series: Vec<BallDecaySeries>,
    pub report: VerificationReport,
}

/// Evidence for `μ(B_n(x, ε)) >= ε^{n (mdim + δ)}` at sampled centers,
/// compared in log form.
#[allow(clippy::too_many_arguments)]
pub fn ball_bound_check(
    mu: &MeasureSpec,
    sys: &ShiftWindowSystem,
    eps: f64,
    delta: f64,
    mdim_est: f64,
    eps0: f64,
    n_range: std::ops::RangeInclusive<usize>,
    centers: usize,
    seed: u64,
) -> Result<BallBoundCheck> {
    if !(delta > 0.0) {
        return Err(Error::domain("delta must be positive"));
    }
    let bk = brin_katok_estimate(mu, sys, eps, n_range.clone(), centers, seed, BallMethod::Auto)?;
    let ns: Vec<usize> = n_range.collect();
    let mut rows = Vec::new();
    let mut first_failure = Vec::new();
    for (c, s) in bk.series.iter().enumerate() {
        let mut first = None;
        for (i, &n) in ns.iter().enumerate() {
            let bound = n as f64 * (mdim_est + delta) * eps.ln();
            let row = CheckRow::new(
                format!("center {c}, n={n}"),
                (bound, Provenance::Exact),
                (s.log_measure[i], Provenance::Upper),
                0.0,
            );
            if !row.satisfied && first.is_none() {
                first = Some(n);
            }
            rows.push(row);
        }
        first_failure.push(first);
    }
    let inside = eps < eps0;
    let holds_everywhere = first_failure.iter().all(Option::is_none);
    let mut notes = vec![
        "empirical evidence: the threshold and the exceptional null set are not controlled".to_string(),
        format!("eps0 proxy {eps0}; rows compare log values"),
    ];
    if !inside {
        notes.push(format!(
            "eps={eps} is outside the eps0 proxy for delta={delta}; the bound is not expected to hold"
        ));
    }
    Ok(BallBoundCheck {
        eps,
        delta,
        mdim_est,
        eps0,
        inside_proxy: inside,
        holds_everywhere,
        first_failure,
        series: bk.series,
        report: VerificationReport::evidence("ball measure lower bound", rows, notes),
    })
}
