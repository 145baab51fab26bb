use serde::{Deserialize, Serialize};

use super::report::{CheckRow, DimensionEstimate, DimensionKind, Provenance, VerificationReport};
use crate::entropy::{inf_entropy_small_partitions, PartitionFamily};
use crate::error::{Error, Result};
use crate::local_entropy::{brin_katok_estimate, BallMethod};
use crate::measures::{closed_form_entropy_rate, MeasureKind, MeasureSpec};
use crate::metric_core::{
    cover_join_count, growth_rate, lebesgue_cover, CoverOptions, FiniteMetricSystem, GrowthSeries, RateMethod,
};
use crate::shift_systems::{
    build_rotation, golden_mean, tail_bound, window_for_tail, Alphabet, ShiftWindowSystem, DEFAULT_WORD_BUDGET,
};

/// A system, or a resolution-indexed family of systems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SystemSpec {
    /// Full shift over `⌈1/ε⌉` evenly spaced symbols of `[0,1]` at scale ε.
    UnitFullShift {
        #[serde(default)]
        window: Option<usize>,
    },
    FullShift {
        #[serde(default)]
        m: Option<usize>,
        #[serde(default)]
        symbols: Option<Vec<f64>>,
        #[serde(default)]
        window: Option<usize>,
    },
    Sft {
        adjacency: Vec<Vec<u8>>,
        #[serde(default)]
        symbols: Option<Vec<f64>>,
        #[serde(default)]
        window: Option<usize>,
    },
    GoldenMean {
        #[serde(default)]
        window: Option<usize>,
    },
    Rotation {
        p: i64,
        q: usize,
    },
}

/// `⌈1/ε⌉`, at least 2.
pub fn unit_resolution(eps: f64) -> usize {
    ((1.0 / eps) - 1e-9).ceil().max(2.0) as usize
}

impl SystemSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SystemSpec::UnitFullShift { .. } => "unit_full_shift",
            SystemSpec::FullShift { .. } => "full_shift",
            SystemSpec::Sft { .. } => "sft",
            SystemSpec::GoldenMean { .. } => "golden_mean",
            SystemSpec::Rotation { .. } => "rotation",
        }
    }

    /// The member of a resolution-indexed family used at scale `eps`; other
    /// specs are returned unchanged.
    pub fn fixed_at(&self, eps: f64) -> SystemSpec {
        match self {
            SystemSpec::UnitFullShift { window } => SystemSpec::FullShift {
                m: Some(unit_resolution(eps)),
                symbols: None,
                window: *window,
            },
            other => other.clone(),
        }
    }

    pub fn is_shift(&self) -> bool {
        !matches!(self, SystemSpec::Rotation { .. })
    }

    /// Alphabet used at scale `eps`.
    pub fn alphabet_at(&self, eps: f64) -> Result<Alphabet> {
        match self {
            SystemSpec::UnitFullShift { .. } => Alphabet::evenly_spaced(unit_resolution(eps)),
            SystemSpec::FullShift { m, symbols, .. } => match (m, symbols) {
                (_, Some(s)) => Alphabet::new(s.clone()),
                (Some(m), None) => Alphabet::evenly_spaced(*m),
                (None, None) => Err(Error::Config("full_shift needs `m` or `symbols`".into())),
            },
            SystemSpec::Sft { adjacency, symbols, .. } => match symbols {
                Some(s) => Alphabet::new(s.clone()),
                None => Alphabet::evenly_spaced(adjacency.len()),
            },
            SystemSpec::GoldenMean { .. } => Alphabet::evenly_spaced(2),
            SystemSpec::Rotation { .. } => Err(Error::Config("a rotation has no shift alphabet".into())),
        }
    }

    fn window(&self) -> Option<usize> {
        match self {
            SystemSpec::UnitFullShift { window }
            | SystemSpec::FullShift { window, .. }
            | SystemSpec::Sft { window, .. }
            | SystemSpec::GoldenMean { window } => *window,
            SystemSpec::Rotation { .. } => None,
        }
    }

    /// Windowed shift at scale `eps` with horizon `horizon`. Without an
    /// explicit window, `W` is the smallest with tail bound `<= tail_target`.
    pub fn shift_with_tail(&self, eps: f64, horizon: usize, tail_target: f64) -> Result<ShiftWindowSystem> {
        let alphabet = self.alphabet_at(eps)?;
        let window = match self.window() {
            Some(w) => w,
            None => window_for_tail(&alphabet, tail_target),
        };
        match self {
            SystemSpec::Sft { adjacency, .. } => ShiftWindowSystem::sft(adjacency.clone(), alphabet, window, horizon),
            SystemSpec::GoldenMean { .. } => ShiftWindowSystem::sft(golden_mean(), alphabet, window, horizon),
            _ => Ok(ShiftWindowSystem::full(alphabet, window, horizon)),
        }
    }

    /// Windowed shift at scale `eps` with tail bound `<= eps/4`.
    pub fn shift_at(&self, eps: f64, horizon: usize) -> Result<ShiftWindowSystem> {
        let sys = self.shift_with_tail(eps, horizon, eps / 4.0)?;
        if sys.tail_bound() > eps / 4.0 + 1e-15 {
            return Err(Error::Config(format!(
                "window {} has tail bound {} above eps/4 = {}",
                sys.window,
                sys.tail_bound(),
                eps / 4.0
            )));
        }
        Ok(sys)
    }

    /// Windowed shift for ball measures at scale `eps`: tail bound at most
    /// `eps/4` and, below the gap, small enough for the cylinder mode.
    pub fn ball_shift_at(&self, eps: f64, horizon: usize) -> Result<ShiftWindowSystem> {
        let alphabet = self.alphabet_at(eps)?;
        let mut target = eps / 4.0;
        if alphabet.gap() > eps {
            target = target.min(0.5 * (alphabet.gap() - eps));
        }
        self.shift_with_tail(eps, horizon, target)
    }

    /// Enumerated finite system for exact covering work.
    pub fn build_finite(&self, eps: f64, window: usize, horizon: usize) -> Result<FiniteMetricSystem> {
        match self {
            SystemSpec::Rotation { p, q } => build_rotation(*p, *q),
            _ => {
                let alphabet = self.alphabet_at(eps)?;
                let sys = match self {
                    SystemSpec::Sft { adjacency, .. } => {
                        ShiftWindowSystem::sft(adjacency.clone(), alphabet, window, horizon)?
                    }
                    SystemSpec::GoldenMean { .. } => ShiftWindowSystem::sft(golden_mean(), alphabet, window, horizon)?,
                    _ => ShiftWindowSystem::full(alphabet, window, horizon),
                };
                sys.build(DEFAULT_WORD_BUDGET)
            }
        }
    }
}

/// Aligns a configured measure with the alphabet used at one scale. Uniform
/// Bernoulli measures are resized to the alphabet; anything else must match.
pub fn measure_for(mu: &MeasureSpec, alphabet: &Alphabet) -> Result<MeasureSpec> {
    if mu.symbol_count() == alphabet.len() {
        return mu.clone().with_alphabet(alphabet);
    }
    if let MeasureKind::Bernoulli { probs } = &mu.kind {
        if probs.iter().all(|&p| (p - probs[0]).abs() < 1e-15) {
            let m = alphabet.len();
            return MeasureSpec::bernoulli(vec![1.0 / m as f64; m])?.with_alphabet(alphabet);
        }
    }
    Err(Error::Config(format!(
        "measure has {} symbols but the system alphabet has {}",
        mu.symbol_count(),
        alphabet.len()
    )))
}

/// `S(ε)` for one scale: structural value where available plus the
/// finite-n growth series.
#[derive(Debug, Clone, Serialize)]
pub struct ScaleGrowth {
    pub eps: f64,
    pub series: GrowthSeries,
    /// Exact rate of the two-sided shift below the alphabet gap.
    pub structural: Option<f64>,
    pub window: Option<usize>,
    pub symbols: Option<usize>,
}

impl ScaleGrowth {
    /// Best lower value on `S(ε)` and its provenance.
    pub fn lower(&self) -> (f64, Provenance) {
        match self.structural {
            Some(s) => (s, Provenance::Exact),
            None => (self.series.rate_bracket.0, Provenance::Estimate),
        }
    }

    /// Best upper value on `S(ε)` and its provenance.
    pub fn upper(&self) -> (f64, Provenance) {
        match self.structural {
            Some(s) => (s, Provenance::Exact),
            None => (self.series.rate_bracket.1, Provenance::Estimate),
        }
    }

    /// Bracket width relative to the rate (0 when both vanish).
    pub fn relative_width(&self) -> f64 {
        let w = self.series.bracket_width();
        if w == 0.0 {
            0.0
        } else {
            w / self.series.rate.max(1e-300)
        }
    }
}

pub fn scale_growth(
    spec: &SystemSpec,
    eps: f64,
    n_range: std::ops::RangeInclusive<usize>,
    method: RateMethod,
) -> Result<ScaleGrowth> {
    let hi = *n_range.end();
    match spec {
        SystemSpec::Rotation { .. } => {
            let sys = spec.build_finite(eps, 0, 0)?;
            let series = growth_rate(&sys, eps, n_range, &CoverOptions::default(), method)?;
            Ok(ScaleGrowth {
                eps,
                series,
                structural: None,
                window: None,
                symbols: None,
            })
        }
        _ => {
            let sys = spec.shift_at(eps, hi)?;
            let series = sys.growth(eps, n_range, method)?;
            Ok(ScaleGrowth {
                eps,
                series,
                structural: sys.structural_rate(eps),
                window: Some(sys.window),
                symbols: Some(sys.alphabet.len()),
            })
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MdimEstimate {
    /// From the finite-n growth series.
    pub estimate: DimensionEstimate,
    /// From the exact rates, when every scale is below its alphabet gap.
    pub structural: Option<DimensionEstimate>,
    pub scales: Vec<ScaleGrowth>,
    pub max_relative_width: f64,
}

/// `S(ε)` per scale and its slope against `log(1/ε)`.
pub fn mdim_estimate(
    spec: &SystemSpec,
    eps_grid: &[f64],
    n_range: std::ops::RangeInclusive<usize>,
    method: RateMethod,
) -> Result<MdimEstimate> {
    let scales: Vec<ScaleGrowth> = crate::par::map(eps_grid, |&e| scale_growth(spec, e, n_range.clone(), method))
        .into_iter()
        .collect::<Result<_>>()?;
    let values: Vec<f64> = scales.iter().map(|s| s.series.rate).collect();
    let max_relative_width = scales.iter().map(ScaleGrowth::relative_width).fold(0.0, f64::max);
    let structural = match scales.iter().map(|s| s.structural).collect::<Option<Vec<f64>>>() {
        Some(v) => Some(DimensionEstimate::new(DimensionKind::Mdim, eps_grid.to_vec(), v)?),
        None => None,
    };
    Ok(MdimEstimate {
        estimate: DimensionEstimate::new(DimensionKind::Mdim, eps_grid.to_vec(), values)?,
        structural,
        scales,
        max_relative_width,
    })
}

/// Family infimum for one measure, replaced by the entropy rate when the
/// scale is at most the alphabet gap (then every admissible partition refines
/// the time-zero partition, so the infimum is the entropy rate).
#[derive(Debug, Clone, Serialize)]
pub struct MeasureInf {
    pub measure: usize,
    pub eps: f64,
    pub family_value: f64,
    pub argmin: String,
    pub value: f64,
    pub provenance: Provenance,
}

pub fn certified_inf(
    mu: &MeasureSpec,
    index: usize,
    eps: f64,
    family: &PartitionFamily,
    n_max: usize,
) -> Result<MeasureInf> {
    let inf = inf_entropy_small_partitions(mu, eps, family, n_max)?;
    let certified = eps <= mu.alphabet().gap() && inf.includes_point_partition;
    let (value, provenance) = match closed_form_entropy_rate(mu) {
        Some(h) if certified => (h, Provenance::Exact),
        _ => (inf.value, Provenance::Upper),
    };
    Ok(MeasureInf {
        measure: index,
        eps,
        family_value: inf.value,
        argmin: inf.argmin.label.clone(),
        value,
        provenance,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct JoinRow {
    pub n: usize,
    pub log_lower: f64,
    pub log_upper: f64,
    pub exact: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VpChain {
    pub eps: f64,
    pub left: VerificationReport,
    pub right: VerificationReport,
    pub infs_at_eps: Vec<MeasureInf>,
    pub infs_at_eighth: Vec<MeasureInf>,
    pub s_eps: ScaleGrowth,
    pub s_quarter: ScaleGrowth,
    /// `log N(U^n)` for the Lebesgue cover of a small enumerated window.
    pub joins: Vec<JoinRow>,
    pub notes: Vec<String>,
}

/// Both inequality chains between partition entropies and `S` at one scale.
///
/// Left: each measure's infimum over partitions of diameter `<= ε` is at most
/// `S(ε/4)`. Right: `S(ε)` is at most the largest infimum at `ε/8` among the
/// configured measures, which is a lower bound on the supremum.
#[allow(clippy::too_many_arguments)]
pub fn vp_chain_check(
    spec: &SystemSpec,
    measures: &[MeasureSpec],
    eps: f64,
    family: &PartitionFamily,
    n_range: std::ops::RangeInclusive<usize>,
    n_max_entropy: usize,
    tol: f64,
) -> Result<VpChain> {
    if measures.is_empty() {
        return Err(Error::Config("at least one measure is required".into()));
    }
    if !spec.is_shift() {
        return Err(Error::Config("the chain check runs on shift systems".into()));
    }
    let spec = &spec.fixed_at(eps);
    let alphabet = spec.alphabet_at(eps)?;
    let mus: Vec<MeasureSpec> = measures.iter().map(|m| measure_for(m, &alphabet)).collect::<Result<_>>()?;
    let s_quarter = scale_growth(spec, eps / 4.0, n_range.clone(), RateMethod::SlopeFit)?;
    let s_eps = scale_growth(spec, eps, n_range, RateMethod::SlopeFit)?;
    let mut infs_at_eps = Vec::new();
    let mut infs_at_eighth = Vec::new();
    for (i, mu) in mus.iter().enumerate() {
        infs_at_eps.push(certified_inf(mu, i, eps, family, n_max_entropy)?);
        infs_at_eighth.push(certified_inf(mu, i, eps / 8.0, family, n_max_entropy)?);
    }
    let (sq, sq_prov) = s_quarter.lower();
    let left_rows: Vec<CheckRow> = infs_at_eps
        .iter()
        .map(|m| {
            CheckRow::new(
                format!("measure {}: inf h(P), diam<={eps} vs S({})", m.measure, eps / 4.0),
                (m.value, m.provenance),
                (sq, sq_prov),
                tol,
            )
        })
        .collect();
    let best = infs_at_eighth
        .iter()
        .max_by(|a, b| a.value.total_cmp(&b.value))
        .expect("nonempty");
    let rhs_prov = match best.provenance {
        Provenance::Exact => Provenance::Lower,
        _ => Provenance::Estimate,
    };
    let right_rows = vec![CheckRow::new(
        format!("S({eps}) vs max inf h(P), diam<={}", eps / 8.0),
        s_eps.upper(),
        (best.value, rhs_prov),
        tol,
    )];
    let mut notes = vec![format!(
        "S from structural brackets over n={}..={}",
        s_eps.series.per_n[0].n,
        s_eps.series.per_n.last().unwrap().n
    )];
    let joins = match join_rows(spec, eps) {
        Ok(rows) => rows,
        Err(e) => {
            notes.push(format!("cover join table skipped: {e}"));
            Vec::new()
        }
    };
    let left = VerificationReport::from_rows("left chain: sup inf h(P) <= S(eps/4)", left_rows, notes.clone());
    let right = VerificationReport::from_rows("right chain: S(eps) <= sup inf h(P) at eps/8", right_rows, notes.clone());
    Ok(VpChain {
        eps,
        left,
        right,
        infs_at_eps,
        infs_at_eighth,
        s_eps,
        s_quarter,
        joins,
        notes,
    })
}

/// Join counts of the Lebesgue cover on a small window (W=1, horizon 3).
fn join_rows(spec: &SystemSpec, eps: f64) -> Result<Vec<JoinRow>> {
    let sys = spec.build_finite(eps, 1, 3)?;
    let cover = lebesgue_cover(&sys, eps)?;
    (1..=3)
        .map(|n| {
            let j = cover_join_count(&sys, &cover, n, &CoverOptions::default())?;
            Ok(JoinRow {
                n,
                log_lower: (j.lower as f64).ln(),
                log_upper: (j.upper as f64).ln(),
                exact: j.exact,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct MbkeRow {
    pub eps: f64,
    pub symbols: usize,
    pub window: usize,
    /// Largest Brin–Katok estimate over the measures.
    pub hbk: f64,
    pub spread: f64,
    pub all_exact: bool,
    pub s_eps: f64,
    pub s_quarter: f64,
    pub mbke_ratio: f64,
    pub mdim_ratio: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MbkeEstimate {
    pub estimate: DimensionEstimate,
    pub mdim: DimensionEstimate,
    pub rows: Vec<MbkeRow>,
    /// `h^BK(ε) <= S(ε/4)` per scale.
    pub report: VerificationReport,
    /// Gap table; never asserted.
    pub gap_report: VerificationReport,
}

/// Brin–Katok entropies per scale against the covering growth.
#[allow(clippy::too_many_arguments)]
pub fn mbke_estimate(
    spec: &SystemSpec,
    measures: &[MeasureSpec],
    eps_grid: &[f64],
    n_range: std::ops::RangeInclusive<usize>,
    centers: usize,
    seed: u64,
    tol: f64,
) -> Result<MbkeEstimate> {
    if measures.is_empty() {
        return Err(Error::Config("at least one measure is required".into()));
    }
    if !spec.is_shift() {
        return Err(Error::Config("Brin-Katok estimates run on shift systems".into()));
    }
    let hi = *n_range.end();
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for &eps in eps_grid {
        let spec = &spec.fixed_at(eps);
        let sys = spec.ball_shift_at(eps, hi)?;
        let mut hbk = f64::NEG_INFINITY;
        let mut spread = 0.0;
        let mut all_exact = true;
        for mu in measures {
            let mu = measure_for(mu, &sys.alphabet)?;
            let bk = brin_katok_estimate(&mu, &sys, eps, n_range.clone(), centers, seed, BallMethod::Auto)?;
            all_exact &= bk.all_exact();
            if bk.hbk > hbk {
                hbk = bk.hbk;
                spread = bk.spread;
            }
        }
        let sq = scale_growth(spec, eps / 4.0, n_range.clone(), RateMethod::SlopeFit)?;
        let se = scale_growth(spec, eps, n_range.clone(), RateMethod::SlopeFit)?;
        let lhs_prov = if all_exact {
            Provenance::Exact
        } else {
            Provenance::Estimate
        };
        checks.push(CheckRow::new(
            format!("eps={eps}: h_BK <= S(eps/4)"),
            (hbk, lhs_prov),
            sq.lower(),
            tol,
        ));
        let log_inv = (1.0 / eps).ln();
        let s_eps = se.series.rate;
        rows.push(MbkeRow {
            eps,
            symbols: sys.alphabet.len(),
            window: sys.window,
            hbk,
            spread,
            all_exact,
            s_eps,
            s_quarter: sq.lower().0,
            mbke_ratio: hbk / log_inv,
            mdim_ratio: s_eps / log_inv,
            gap: (s_eps - hbk) / log_inv,
        });
    }
    let estimate = DimensionEstimate::new(
        DimensionKind::Mbke,
        eps_grid.to_vec(),
        rows.iter().map(|r| r.hbk).collect(),
    )?;
    let mdim = DimensionEstimate::new(
        DimensionKind::Mdim,
        eps_grid.to_vec(),
        rows.iter().map(|r| r.s_eps).collect(),
    )?;
    let notes = vec![format!("{centers} centers, seed {seed}, measures maximized over the configured list")];
    let report = VerificationReport::from_rows("h_BK(eps) <= S(eps/4)", checks, notes);
    let gap_rows = rows
        .iter()
        .map(|r| {
            CheckRow::new(
                format!("eps={}: mBKe ratio vs mdim ratio", r.eps),
                (r.mbke_ratio, Provenance::Estimate),
                (r.mdim_ratio, Provenance::Estimate),
                tol,
            )
        })
        .collect();
    let gap_report = VerificationReport::evidence(
        "gap between mdim and mBKe",
        gap_rows,
        vec![format!(
            "slopes: mdim {:.6}, mBKe {:.6}; equality is not asserted",
            mdim.slope, estimate.slope
        )],
    );
    Ok(MbkeEstimate {
        estimate,
        mdim,
        rows,
        report,
        gap_report,
    })
}

/// Tail bound of the window chosen for ball measures at `eps`.
pub fn ball_tail(spec: &SystemSpec, eps: f64) -> Result<f64> {
    let sys = spec.ball_shift_at(eps, 1)?;
    Ok(tail_bound(&sys.alphabet, sys.window))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Verdict;
    use crate::measures::parry;

    #[test]
    fn unit_resolution_rule() {
        assert_eq!(unit_resolution(0.25), 4);
        assert_eq!(unit_resolution(0.1), 10);
        assert_eq!(unit_resolution(0.3), 4);
        assert_eq!(unit_resolution(0.9), 2);
    }

    #[test]
    fn rotation_has_zero_rate() {
        let spec = SystemSpec::Rotation { p: 1, q: 8 };
        let eps: Vec<f64> = (2..=4).map(|k| 2f64.powi(-k)).collect();
        let m = mdim_estimate(&spec, &eps, 1..=4, RateMethod::SlopeFit).unwrap();
        assert!(m.estimate.slope.abs() < 1e-12);
    }

    #[test]
    fn fixed_two_shift_slope_vanishes() {
        let spec = SystemSpec::FullShift {
            m: Some(2),
            symbols: None,
            window: None,
        };
        let eps: Vec<f64> = (2..=5).map(|k| 2f64.powi(-k)).collect();
        let m = mdim_estimate(&spec, &eps, 1..=6, RateMethod::SlopeFit).unwrap();
        for s in &m.scales {
            assert_eq!(s.structural, Some(2f64.ln()));
        }
        assert!(m.estimate.slope.abs() < 0.05, "{}", m.estimate.slope);
    }

    #[test]
    fn chains_on_two_shift_and_golden_mean() {
        let two = SystemSpec::FullShift {
            m: Some(2),
            symbols: None,
            window: None,
        };
        let bern = MeasureSpec::bernoulli(vec![0.5, 0.5]).unwrap();
        let c = vp_chain_check(&two, &[bern], 0.4, &PartitionFamily::default(), 1..=8, 8, 1e-9).unwrap();
        assert_eq!(c.left.verdict, Verdict::Holds, "{:?}", c.left);
        assert_eq!(c.right.verdict, Verdict::Holds, "{:?}", c.right);
        assert!(!c.joins.is_empty());
        let gm = SystemSpec::GoldenMean { window: None };
        let p = parry(&golden_mean()).unwrap();
        let c = vp_chain_check(&gm, &[p], 0.4, &PartitionFamily::default(), 1..=8, 8, 1e-9).unwrap();
        assert_eq!(c.left.verdict, Verdict::Holds, "{:?}", c.left);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((c.infs_at_eps[0].value - phi.ln()).abs() < 1e-12);
    }

    #[test]
    fn mbke_on_two_shift() {
        let two = SystemSpec::FullShift {
            m: Some(2),
            symbols: None,
            window: None,
        };
        let bern = MeasureSpec::bernoulli(vec![0.5, 0.5]).unwrap();
        let eps = [0.4, 0.2, 0.1];
        let m = mbke_estimate(&two, &[bern], &eps, 1..=8, 5, 3, 1e-9).unwrap();
        assert_eq!(m.report.verdict, Verdict::Holds);
        assert!(m.estimate.slope.abs() < 1e-9);
        assert_eq!(m.gap_report.verdict, Verdict::EvidenceOnly);
    }
}
