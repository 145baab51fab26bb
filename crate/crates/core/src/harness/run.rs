use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::experiments::{mbke_estimate, mdim_estimate, measure_for, scale_growth, vp_chain_check, SystemSpec};
use super::report::{CheckRow, Provenance, Verdict, VerificationReport};
use crate::entropy::{dynamical_entropy, grid_partition, info_dim_rate, mrid_estimate, Partition, PartitionFamily};
use crate::error::{Error, Result};
use crate::local_entropy::{
    ball_bound_check, brin_katok_per_component, eps0_proxy, bk_partition_check, BallDecaySeries, BrinKatok,
};
use crate::measures::{is_ergodic, MeasureSpec};
use crate::metric_core::{
    covering_number, lebesgue_cover, sandwich_check, tame_growth_diagnostic, Cover, CoverOptions, RateMethod,
};
use crate::rate_distortion::{
    decomposition_inequality_check, ergodic_dominance_experiment, inverse_consistency_check, rd_curve, rd_dimension,
};

pub const EXPERIMENTS: &[&str] = &[
    "cover",
    "growth",
    "sandwich",
    "mdim",
    "entropy",
    "mrid",
    "idr",
    "rd_curve",
    "rd_dim",
    "rd_checks",
    "brin_katok",
    "ball_bound",
    "vp_check",
    "mbke",
    "tame",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Nats,
    Bits,
}

impl Units {
    /// Converts a quantity in nats.
    pub fn of(self, nats: f64) -> f64 {
        match self {
            Units::Nats => nats,
            Units::Bits => nats / LN_2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Units::Nats => "nats",
            Units::Bits => "bits",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub inverse: f64,
    pub decomposition: f64,
    pub dominance: f64,
    pub bk_partition: f64,
    pub chain: f64,
    pub mbke: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            inverse: 1e-3,
            decomposition: 1e-6,
            dominance: 1e-3,
            bk_partition: 1e-2,
            chain: 1e-9,
            mbke: 1e-9,
        }
    }
}

/// Experiment-specific knobs. Unused fields are ignored by other experiments.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Window of enumerated shift systems (cover, sandwich). Default 1.
    pub window: Option<usize>,
    /// Horizon of enumerated shift systems. Default: top of `n_range`.
    pub horizon: Option<usize>,
    /// "lebesgue" (default) or "cylinder".
    pub cover: Option<String>,
    pub rate_method: Option<RateMethod>,
    /// "points" (default), "single" or "grid:m".
    pub partition: Option<String>,
    /// Block length for entropy estimates. Default: top of `n_range`.
    pub n_max: Option<usize>,
    pub m_grid: Vec<usize>,
    /// Block length for rate-distortion. Default 1.
    pub block_len: Option<usize>,
    /// Points of the inverse-consistency rate grid. Default 10.
    pub grid: Option<usize>,
    pub rates: Vec<f64>,
    pub distortions: Vec<f64>,
    /// Ball centers. Default 101 for entropy estimates, 5 for ball bounds.
    pub centers: Option<usize>,
    pub delta: Option<f64>,
    pub mdim_est: Option<f64>,
    pub deltas: Vec<f64>,
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub experiment: String,
    #[serde(default)]
    pub system: Option<SystemSpec>,
    #[serde(default)]
    pub measures: Vec<MeasureSpec>,
    #[serde(default)]
    pub eps_grid: Vec<f64>,
    #[serde(default)]
    pub n_range: Option<[usize; 2]>,
    #[serde(default = "default_p")]
    pub p: f64,
    /// "default", "grids_only" or "strict".
    #[serde(default)]
    pub family: Option<String>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub units: Units,
    #[serde(default)]
    pub params: Params,
}

fn default_p() -> f64 {
    1.0
}

impl Config {
    pub fn new(experiment: impl Into<String>) -> Self {
        Config {
            experiment: experiment.into(),
            system: None,
            measures: Vec::new(),
            eps_grid: Vec::new(),
            n_range: None,
            p: 1.0,
            family: None,
            seeds: Vec::new(),
            tolerances: Tolerances::default(),
            output_dir: None,
            units: Units::Nats,
            params: Params::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::Config(format!("line {}, column {}: {e}", e.line(), e.column()))
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Canonical experiment name (`rd-curve` and `rd_curve` are the same).
    pub fn experiment_name(&self) -> Result<&'static str> {
        let name = self.experiment.replace('-', "_");
        EXPERIMENTS
            .iter()
            .copied()
            .find(|e| *e == name)
            .ok_or_else(|| {
                Error::Config(format!(
                    "experiment: unknown name {:?}; expected one of {}",
                    self.experiment,
                    EXPERIMENTS.join(", ")
                ))
            })
    }

    fn system(&self) -> Result<&SystemSpec> {
        self.system.as_ref().ok_or_else(|| Error::Config("system: required".into()))
    }

    fn measures(&self) -> Result<Vec<MeasureSpec>> {
        if self.measures.is_empty() {
            return Err(Error::Config("measures: at least one measure is required".into()));
        }
        self.measures
            .iter()
            .enumerate()
            .map(|(i, m)| {
                m.clone()
                    .validated()
                    .map_err(|e| Error::Config(format!("measures[{i}]: {e}")))
            })
            .collect()
    }

    fn eps(&self) -> Result<&[f64]> {
        if self.eps_grid.is_empty() {
            return Err(Error::Config("eps_grid: at least one scale is required".into()));
        }
        if let Some(e) = self.eps_grid.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(Error::Config(format!("eps_grid: scales must be positive, got {e}")));
        }
        Ok(&self.eps_grid)
    }

    /// Scales sorted strictly decreasing, as regressions require.
    fn eps_decreasing(&self) -> Result<Vec<f64>> {
        let mut g = self.eps()?.to_vec();
        g.sort_by(|a, b| b.total_cmp(a));
        g.dedup();
        Ok(g)
    }

    fn range(&self, default: [usize; 2]) -> Result<std::ops::RangeInclusive<usize>> {
        let [lo, hi] = self.n_range.unwrap_or(default);
        if lo == 0 || lo > hi {
            return Err(Error::Config(format!("n_range: need 1 <= lo <= hi, got [{lo}, {hi}]")));
        }
        Ok(lo..=hi)
    }

    fn seed(&self) -> u64 {
        self.seeds.first().copied().unwrap_or(0)
    }

    fn family(&self) -> Result<PartitionFamily> {
        match self.family.as_deref().unwrap_or("default") {
            "default" => Ok(PartitionFamily::default()),
            "grids_only" => Ok(PartitionFamily::grids_only()),
            "strict" => Ok(PartitionFamily {
                strict: true,
                ..PartitionFamily::default()
            }),
            other => Err(Error::Config(format!(
                "family: unknown name {other:?}; expected default, grids_only or strict"
            ))),
        }
    }

    fn partition(&self, mu: &MeasureSpec) -> Result<Partition> {
        let a = mu.alphabet();
        match self.params.partition.as_deref().unwrap_or("points") {
            "points" => Ok(Partition::points(&a)),
            "single" => Ok(Partition::single(&a)),
            s => match s.strip_prefix("grid:").and_then(|m| m.parse::<usize>().ok()) {
                Some(m) => grid_partition(&a, m),
                None => Err(Error::Config(format!(
                    "params.partition: expected points, single or grid:<m>, got {s:?}"
                ))),
            },
        }
    }

    fn centers(&self, default: usize) -> usize {
        self.params.centers.unwrap_or(default)
    }
}

/// A CSV table: fixed header, rows already formatted.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, header: &[&'static str]) -> Self {
        Table {
            name: name.into(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Result of one experiment, before anything is written.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub experiment: &'static str,
    pub units: Units,
    pub summary: Value,
    pub tables: Vec<Table>,
    pub reports: Vec<VerificationReport>,
    /// Human-readable summary lines.
    pub lines: Vec<String>,
}

impl Outcome {
    fn new(experiment: &'static str, units: Units) -> Self {
        Outcome {
            experiment,
            units,
            summary: Value::Null,
            tables: Vec::new(),
            reports: Vec::new(),
            lines: Vec::new(),
        }
    }

    pub fn has_failure(&self) -> bool {
        self.reports.iter().any(|r| r.verdict == Verdict::Fails)
    }

    pub fn exit_code(&self) -> i32 {
        if self.has_failure() {
            1
        } else {
            0
        }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Report body without the timestamp line.
    pub fn report_text(&self) -> String {
        let mut s = format!("experiment: {}\nunits: {}\n\n", self.experiment, self.units.as_str());
        for l in &self.lines {
            s.push_str(l);
            s.push('\n');
        }
        for r in &self.reports {
            s.push_str(&format!("\n[{}] {}\n", r.verdict.as_str(), r.claim));
            for row in &r.rows {
                s.push_str(&format!(
                    "  {}: {} ({:?}) <= {} ({:?}) + {} -> {}\n",
                    row.key,
                    row.lhs,
                    row.lhs_provenance,
                    row.rhs,
                    row.rhs_provenance,
                    row.tol,
                    if row.satisfied { "ok" } else { "VIOLATED" }
                ));
            }
            for n in &r.notes {
                s.push_str(&format!("  note: {n}\n"));
            }
        }
        s
    }

    pub fn summary_json(&self) -> Result<String> {
        let reports: Vec<Value> = self
            .reports
            .iter()
            .map(serde_json::to_value)
            .collect::<std::result::Result<_, _>>()?;
        let verdicts: BTreeMap<String, &str> = self
            .reports
            .iter()
            .map(|r| (r.claim.clone(), r.verdict.as_str()))
            .collect();
        let doc = json!({
            "experiment": self.experiment,
            "units": self.units.as_str(),
            "summary": self.summary,
            "verdicts": verdicts,
            "reports": reports,
            "tables": self.tables.iter().map(|t| format!("tables/{}.csv", t.name)).collect::<Vec<_>>(),
        });
        Ok(serde_json::to_string_pretty(&doc)? + "\n")
    }

    /// Writes `summary.json`, `tables/*.csv` and `report.txt`. Only the first
    /// line of `report.txt` depends on the clock.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir.join("tables"))?;
        for t in &self.tables {
            std::fs::write(dir.join("tables").join(format!("{}.csv", t.name)), t.to_csv()?)?;
        }
        std::fs::write(dir.join("summary.json"), self.summary_json()?)?;
        let ts = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        std::fs::write(
            dir.join("report.txt"),
            format!("generated_at_unix: {ts}\n{}", self.report_text()),
        )?;
        Ok(())
    }
}

/// Exit code for an error: 3 for exhausted budgets, 2 otherwise.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Resource { .. } => 3,
        _ => 2,
    }
}

/// Runs the configured experiment and, when `output_dir` is set, writes the
/// artifact directory.
pub fn run_experiment(cfg: &Config) -> Result<Outcome> {
    let out = compute(cfg)?;
    if let Some(dir) = &cfg.output_dir {
        out.write(dir)?;
    }
    Ok(out)
}

/// Runs the configured experiment without writing anything.
pub fn compute(cfg: &Config) -> Result<Outcome> {
    let name = cfg.experiment_name()?;
    if !(cfg.p >= 1.0 && cfg.p.is_finite()) {
        return Err(Error::Config(format!("p: must be at least 1, got {}", cfg.p)));
    }
    let mut out = Outcome::new(name, cfg.units);
    match name {
        "cover" => run_cover(cfg, &mut out)?,
        "growth" => run_growth(cfg, &mut out)?,
        "sandwich" => run_sandwich(cfg, &mut out)?,
        "mdim" => run_mdim(cfg, &mut out)?,
        "entropy" => run_entropy(cfg, &mut out)?,
        "mrid" => run_mrid(cfg, &mut out)?,
        "idr" => run_idr(cfg, &mut out)?,
        "rd_curve" => run_rd_curve(cfg, &mut out)?,
        "rd_dim" => run_rd_dim(cfg, &mut out)?,
        "rd_checks" => run_rd_checks(cfg, &mut out)?,
        "brin_katok" => run_brin_katok(cfg, &mut out)?,
        "ball_bound" => run_ball_bound(cfg, &mut out)?,
        "vp_check" => run_vp(cfg, &mut out)?,
        "mbke" => run_mbke(cfg, &mut out)?,
        "tame" => run_tame(cfg, &mut out)?,
        _ => unreachable!("names come from EXPERIMENTS"),
    }
    Ok(out)
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn run_cover(cfg: &Config, out: &mut Outcome) -> Result<()> {
    let spec = cfg.system()?;
    let range = cfg.range([1, 1])?;
    let window = cfg.params.window.unwrap_or(1);
    let horizon = cfg.params.horizon.unwrap_or(*range.end());
    let opts = CoverOptions::default();
    let mut t = Table::new("cover", &["eps", "n", "lower", "upper", "method"]);
    let mut rows = Vec::new();
    for &eps in cfg.eps()? {
        let sys = spec.fixed_at(eps).build_finite(eps, window, horizon)?;
        for n in range.clone() {
            let c = covering_number(&sys.bowen(n)?, eps, &opts)?;
            let shown = match c.value() {
                Some(v) => format!("{v} (exact)"),
                None => format!("in [{}, {}]", c.lower, c.upper),
            };
            out.lines.push(format!("#(X, rho_{n}, {eps}) = {shown}  [{}, {} points]", sys.label(), sys.points()));
            t.push(vec![
                num(eps),
                n.to_string(),
                c.lower.to_string(),
                c.upper.to_string(),
                if c.is_exact() { "exact" } else { "bracket" }.into(),
            ]);
            rows.push(json!({"eps": eps, "n": n, "lower": c.lower, "upper": c.upper, "exact": c.is_exact()}));
        }
    }
    out.tables.push(t);
    out.summary = json!({ "system": spec, "counts": rows });
    Ok(())
}

fn run_growth(cfg: &Config, out: &mut Outcome) -> Result<()> {
    let spec = cfg.system()?;
    let range = cfg.range([1, 6])?;
    let method = cfg.params.rate_method.unwrap_or_default();
    let u = cfg.units;
    let mut counts = Table::new("growth", &["eps", "n", "log_lower", "log_upper", "exact"]);
    let mut rates = Table::new(
        "rates",
        &["eps", "rate", "rate_lower", "rate_upper", "slope_residual", "last_ratio", "fekete_min", "structural"],
    );
    let mut summary = Vec::new();
    for &eps in cfg.eps()? {
        let g = scale_growth(spec, eps, range.clone(), method)?;
        let s = &g.series;
        for p in &s.per_n {
            counts.push(vec![num(eps), p.n.to_string(), num(u.of(p.log_lower)), num(u.of(p.log_upper)), p.exact.to_string()]);
        }
        rates.push(vec![
            num(eps),
            num(u.of(s.rate)),
            num(u.of(s.rate_bracket.0)),
            num(u.of(s.rate_bracket.1)),
            num(s.slope_residual),
            num(u.of(s.last_ratio)),
            num(u.of(s.fekete_min)),
            opt(g.structural.map(|v| u.of(v))),
        ]);
        out.lines.push(match g.structural {
            Some(v) => format!("S({eps}) = {:.6} (exact; finite-n fit {:.6})", u.of(v), u.of(s.rate)),
            None => format!(
                "S({eps}) ~ {:.6} (fit bracket [{:.6}, {:.6}])",
                u.of(s.rate),
                u.of(s.rate_bracket.0),
                u.of(s.rate_bracket.1)
            ),
        });
        summary.push(serde_json::to_value(&g)?);
    }
    out.tables.push(counts);
    out.tables.push(rates);
    out.summary = json!({ "system": spec, "scales": summary });
    Ok(())
}

fn run_sandwich(cfg: &Config, out: &mut Outcome) -> Result<()> {
    let spec = cfg.system()?;
    let range = cfg.range([1, 4])?;
    let n_max = *range.end();
    let window = cfg.params.window.unwrap_or(1);
    let horizon = cfg.params.horizon.unwrap_or(n_max);
    let kind = cfg.params.cover.as_deref().unwrap_or("lebesgue");
    let mut t = Table::new(
        "sandwich",
        &["eps", "n", "diam_lower", "diam_upper", "join_lower", "join_upper", "leb_lower", "leb_upper", "left", "right"],
    );
    let mut summary = Vec::new();
    for &eps in cfg.eps()? {
        let sys = spec.fixed_at(eps).build_finite(eps, window, horizon)?;
        let cover = match kind {
            "lebesgue" => lebesgue_cover(&sys, eps)?,
            "cylinder" => {
                let words = sys
                    .words()
                    .ok_or_else(|| Error::Config("params.cover: cylinder covers need a shift system".into()))?;
                Cover::from_labels(sys.points(), |i| words.word(i)[words.origin()] as usize)
            }
            other => {
                return Err(Error::Config(format!(
                    "params.cover: expected lebesgue or cylinder, got {other:?}"
                )))
            }
        };
        let r = sandwich_check(&sys, &cover, n_max, &CoverOptions::default(), 1 << 17)?;
        if let Some(why) = &r.skipped {
            out.lines.push(format!("eps={eps}: {why}"));
        }
        let mut rows = Vec::new();
        for row in r.rows.iter().filter(|row| range.contains(&row.n)) {
            let (d, j, l) = (&row.count_at_diam, &row.join, &row.count_at_leb);
            t.push(vec![
                num(eps),
                row.n.to_string(),
                d.lower.to_string(),
                d.upper.to_string(),
                j.lower.to_string(),
                j.upper.to_string(),
                l.lower.to_string(),
                l.upper.to_string(),
                row.left_holds.to_string(),
                row.right_holds.to_string(),
            ]);
            let prov = |exact: bool, dir: Provenance| if exact { Provenance::Exact } else { dir };
            rows.push(CheckRow::new(
                format!("eps={eps} n={} #(diam U) <= N(U^n)", row.n),
                (d.upper as f64, prov(d.is_exact(), Provenance::Upper)),
                (j.lower as f64, prov(j.exact, Provenance::Lower)),
                0.0,
            ));
            rows.push(CheckRow::new(
                format!("eps={eps} n={} N(U^n) <= #(Leb U)", row.n),
                (j.upper as f64, prov(j.exact, Provenance::Upper)),
                (l.lower as f64, prov(l.is_exact(), Provenance::Lower)),
                0.0,
            ));
        }
        out.lines.push(format!(
            "eps={eps}: {} sets, diam U = {}, Leb U = {}, exact = {}",
            cover.len(),
            r.diam,
            r.lebesgue,
            r.all_exact
        ));
        let notes = r.skipped.iter().cloned().collect();
        out.reports.push(VerificationReport::from_rows(
            format!("cover sandwich at eps={eps} ({kind} cover)"),
            rows,
            notes,
        ));
        summary.push(json!({"eps": eps, "diam": r.diam, "lebesgue": r.lebesgue, "sets": cover.len(), "all_exact": r.all_exact}));
    }
    out.tables.push(t);
    out.summary = json!({ "system": spec, "cover": kind, "scales": summary });
    Ok(())
}

fn run_mdim(cfg: &Config, out: &mut Outcome) -> Result<()> {
    let spec = cfg.system()?;
    let range = cfg.range([1, 8])?;
    let grid = cfg.eps_decreasing()?;
    let u = cfg.units;
    let est = mdim_estimate(spec, &grid, range, cfg.params.rate_method.unwrap_or_default())?;
    let mut t = Table::new(
        "mdim",
        &["eps", "symbols", "window", "rate", "rate_lower", "rate_upper", "relative_width", "structural", "ratio"],
    );
    for (i, s) in est.scales.iter().enumerate() {
        t.push(vec![
            num(s.eps),
            s.symbols.map(|m| m.to_string()).unwrap_or_default(),
            s.window.map(|w| w.to_string()).unwrap_or_default(),
            num(u.of(s.series.rate)),
            num(u.of(s.series.rate_bracket.0)),
            num(u.of(s.series.rate_bracket.1)),
            num(s.relative_width()),
            opt(s.structural.map(|v| u.of(v))),
            num(est.estimate.ratios[i]),
        ]);
    }
    out.lines.push(format!(
        "mdim slope (finite-n) = {:.6}, residual {:.3e}, max relative bracket width {:.4}",
        est.estimate.slope, est.estimate.residual, est.max_relative_width
    ));
    if let Some(s) = &est.structural {
        out.lines.push(format!("mdim slope (exact rates) = {:.6}", s.slope));
    }
    out.tables.push(t);
    out.summary = json!({
        "system": spec,
        "slope": est.estimate.slope,
        "structural_slope": est.structural.as_ref().map(|s| s.slope),
        "max_relative_width": est.max_relative_width,
        "estimate": est.estimate,
        "structural": est.structural,
    });
    Ok(())
}

fn run_entropy(cfg: &Config, out: &mut Outcome) -> Result<()> {
    let measures = cfg.measures()?;
    let n_max = cfg.params.n_max.unwrap_or(*cfg.range([1, 8])?.end());
    let u = cfg.units;
    let mut t = Table::new("entropy", &["measure", "n", "block_entropy"]);
    let mut summary = Vec::new();
    for (i, mu) in measures.iter().enumerate() {
        let p = cfg.partition(mu)?;
        let e = dynamical_entropy(mu, &p, n_max)?;
        for &(n, h) in &e.block_entropies {
            t.push(vec![i.to_string(), n.to_string(), num(u.of(h))]);
        }
        out.lines.push(format!(
            "measure {i}, partition {}: h = {:.12} (conditional), {:.12} (H_n/n){}",
            p.label,
            u.of(e.conditional),
            u.of(e.ratio),
            e.closed_form.map(|c| format!(", closed form {:.12}", u.of(c))).unwrap_or_default()
        ));
        summary.push(json!({
            "measure": i,
            "partition": p.label,
            "conditional": u.of(e.conditional),
            "ratio": u.of(e.ratio),
            "closed_form": e.closed_form.map(|c| u.of(c)),
            "closed_form_error": e.closed_form_error.map(|c| u.of(c)),
        }));
    }
    out.tables.push(t);
    out.summary = json!({ "measures": summary });
    Ok(())
}

fn run_mrid(cfg: &Config, out: &mut Outcome) -> Result<()> {
    let measures = cfg.measures()?;
    let grid = cfg.eps_decreasing()?;
    let family = cfg.family()?;
    let n_max = cfg.params.n_max.unwrap_or(*cfg.range([1, 6])?.end());
    let u = cfg.units;
    let mut t = Table::new("mrid", &["measure", "eps", "inf_entropy", "ratio"]);
    let mut summary = Vec::new();
    for (i, mu) in measures.iter().enumerate() {
        let d = mrid_estimate(mu, &grid, &family, n_max)?;
        for k in 0..d.eps_grid.len() {
            t.push(vec![i.to_string(), num(d.eps_grid[k]), num(u.of(d.values[k])), num(d.ratios[k])]);
        }
        out.lines.push(format!("measure {i}: MRID slope = {:.6}, last ratio {:.6}", d.slope, d.last_ratio));
        summary.push(serde_json::to_value(&d)?);
    }
    out.tables.push(t);
    out.summary = json!({ "measures": summary });
    Ok(())
}

fn run_idr(cfg: &Config, out: &mut Outcome) -> Result<()> {
    let measures = cfg.measures()?;
    let m_grid = if cfg.params.m_grid.is_empty() {
        vec![2, 4, 8, 16]
    } else {
        cfg.params.m_grid.clone()
    };
    let n_max = cfg.params.n_max.unwrap_or(*cfg.range([1, 4])?.end());
    let u = cfg.units;
    let mut t = Table::new("idr", &["measure", "m", "entropy", "ratio"]);
    let mut summary = Vec::new();
    for (i, mu) in measures.iter().enumerate() {
        let r = info_dim_rate(mu, &m_grid, n_max)?;
        for row in &r.rows {
            t.push(vec![i.to_string(), row.m.to_string(), num(u.of(row.entropy)), num(row.ratio)]);
        }
        out.lines.push(format!(
            "measure {i}: h(P_m)/log m in [{:.12}, {:.12}] over the finest half",
            r.lower, r.upper
        ));
        summary.push(json!({"measure": i, "lower": r.lower, "upper": r.upper}));
    }
    out.tables.push(t);
    out.summary = json!({ "measures": summary });
    Ok(())
}

fn run_rd_curve(cfg: &Config, out: &mut Outcome) -> Result<()> {
    let measures = cfg.measures()?;
    let n = cfg.params.block_len.unwrap_or(1);
    let u = cfg.units;
    let mut t = Table::new("rd_curve", &["measure", "beta", "cost", "distortion", "rate", "iterations", "converged"]);
    let mut summary = Vec::new();
    for (i, mu) in measures.iter().enumerate() {
        let c = rd_curve(mu, n, cfg.p)?;
        for pt in &c.points {
            t.push(vec![
                i.to_string(),
                num(pt.beta),
                num(pt.d),
                num(pt.d.powf(1.0 / cfg.p)),
                num(u.of(pt.r)),
                pt.iters.to_string(),
                pt.converged.to_string(),
            ]);
        }
        out.lines.push(format!(
            "measure {i}: {} curve points at block length {n}, rate range [0, {:.6}]",
            c.points.len(),
            u.of(c.points.iter().map(|p| p.r).fold(0.0, f64::max))
        ));
        summary.push(json!({"measure": i, "n": n, "p": cfg.p, "points": c.points.len()}));
    }
    out.tables.push(t);
    out.summary = json!({ "measures": summary });
    Ok(())
}

fn run_rd_dim(cfg: &Config, out: &mut Outcome) -> Result<()> {
    let measures = cfg.measures()?;
    let grid = cfg.eps_decreasing()?;
    let n = cfg.params.block_len.unwrap_or(1);
    let u = cfg.units;
    let mut t = Table::new("rd_dim", &["measure", "eps", "rate", "ratio"]);
    let mut summary = Vec::new();
    for (i, mu) in measures.iter().enumerate() {
        let d = rd_dimension(mu, cfg.p, &grid, n)?;
        for k in 0..d.eps_grid.len() {
            t.push(vec![i.to_string(), num(d.eps_grid[k]), num(u.of(d.values[k])), num(d.ratios[k])]);
        }
        out.lines.push(format!("measure {i}: rate-distortion dimension slope = {:.6}", d.slope));
        summary.push(serde_json::to_value(&d)?);
    }
    out.tables.push(t);
    out.summary = json!({ "measures": summary });
    Ok(())
}

fn run_rd_checks(cfg: &Config, out: &mut Outcome) -> Result<()> {
    let measures = cfg.measures()?;
    let n = cfg.params.block_len.unwrap_or(1);
    let tol = cfg.tolerances;
    let u = cfg.units;
    let mut inv = Table::new("inverse", &["measure", "rate", "distortion", "cost", "rate_back", "residual"]);
    let mut dec = Table::new("decomposition", &["measure", "rate", "mixture", "weighted", "components"]);
    let mut dom = Table::new("dominance", &["measure", "distortion", "mixture", "components", "dominating"]);
    let joined = |v: &[f64], f: &dyn Fn(f64) -> f64| v.iter().map(|x| num(f(*x))).collect::<Vec<_>>().join(";");
    for (i, mu) in measures.iter().enumerate() {
        let c = inverse_consistency_check(mu, n, cfg.p, cfg.params.grid.unwrap_or(10), tol.inverse)?;
        for r in &c.rows {
            inv.push(vec![
                i.to_string(),
                num(u.of(r.rate)),
                num(r.distortion),
                num(r.cost),
                num(u.of(r.rate_back)),
                num(u.of(r.residual)),
            ]);
        }
        let mut report = c.report;
        report.claim = format!("measure {i}: {}", report.claim);
        out.reports.push(report);
        if is_ergodic(mu)? {
            continue;
        }
        let rates = if cfg.params.rates.is_empty() {
            (1..=8).map(|k| 0.05 * k as f64).collect()
        } else {
            cfg.params.rates.clone()
        };
        let (rows, mut report) = decomposition_inequality_check(mu, n, cfg.p, &rates, tol.decomposition)?;
        for r in &rows {
            dec.push(vec![
                i.to_string(),
                num(u.of(r.rate)),
                num(r.mixture),
                num(r.weighted),
                joined(&r.components, &|x| x),
            ]);
        }
        report.claim = format!("measure {i}: {}", report.claim);
        out.reports.push(report);
        let dists = if cfg.params.distortions.is_empty() {
            (1..=8).map(|k| 0.03 * k as f64).collect()
        } else {
            cfg.params.distortions.clone()
        };
        let (rows, mut report) = ergodic_dominance_experiment(mu, cfg.p, &dists, n, tol.dominance)?;
        for r in &rows {
            dom.push(vec![
                i.to_string(),
                num(r.distortion),
                num(u.of(r.mixture)),
                joined(&r.components, &|x| u.of(x)),
                r.dominating.to_string(),
            ]);
        }
        report.claim = format!("measure {i}: {}", report.claim);
        out.reports.push(report);
    }
    for r in &out.reports {
        out.lines.push(format!("{}: {}", r.claim, r.verdict.as_str()));
    }
    out.tables.extend([inv, dec, dom]);
    out.summary = json!({ "n": n, "p": cfg.p });
    Ok(())
}

fn push_series(t: &mut Table, eps: f64, measure: &str, bk: &BrinKatok, u: Units) {
    for (c, s) in bk.series.iter().enumerate() {
        push_one_series(t, eps, measure, c, s, u);
    }
}

fn push_one_series(t: &mut Table, eps: f64, measure: &str, center: usize, s: &BallDecaySeries, _u: Units) {
    for (k, &(n, _)) in s.per_n.iter().enumerate() {
        t.push(vec![
            num(eps),
            measure.to_string(),
            center.to_string(),
            n.to_string(),
            num(s.log_measure[k]),
            num(s.log_lower[k]),
            s.mode.as_str().into(),
        ]);
    }
}

const SERIES_HEADER: &[&str] = &["eps", "measure", "center_id", "n", "log_ball_measure", "log_ball_lower", "mode"];

fn run_brin_katok(cfg: &Config, out: &mut Outcome) -> Result<()> {
    let spec = cfg.system()?;
    if !spec.is_shift() {
        return Err(Error::Config("system: Brin-Katok estimates run on shift systems".into()));
    }
    let measures = cfg.measures()?;
    let range = cfg.range([1, 12])?;
    let family = cfg.family()?;
    let centers = cfg.centers(101);
    let u = cfg.units;
    let mut series = Table::new("bk_series", SERIES_HEADER);
    let mut est = Table::new("brin_katok", &["eps", "measure", "hbk", "spread", "all_exact", "inf_entropy"]);
    let mut summary = Vec::new();
    for &eps in cfg.eps()? {
        let fixed = spec.fixed_at(eps);
        let sys = fixed.ball_shift_at(eps, *range.end())?;
        for (i, mu) in measures.iter().enumerate() {
            let mu = measure_for(mu, &sys.alphabet)?;
            if is_ergodic(&mu)? {
                let c = bk_partition_check(&mu, &sys, eps, &family, *range.end(), centers, cfg.seed(), cfg.tolerances.bk_partition)?;
                push_series(&mut series, eps, &i.to_string(), &c.hbk, u);
                est.push(vec![
                    num(eps),
                    i.to_string(),
                    num(u.of(c.hbk.hbk)),
                    num(u.of(c.hbk.spread)),
                    c.hbk.all_exact().to_string(),
                    num(u.of(c.inf_entropy)),
                ]);
                out.lines.push(format!(
                    "eps={eps} measure {i}: h_BK = {:.9} (spread {:.3e}), inf entropy {:.9}",
                    u.of(c.hbk.hbk),
                    u.of(c.hbk.spread),
                    u.of(c.inf_entropy)
                ));
                summary.push(json!({"eps": eps, "measure": i, "hbk": u.of(c.hbk.hbk), "inf_entropy": u.of(c.inf_entropy)}));
                let mut report = c.report;
                report.claim = format!("eps={eps} measure {i}: {}", report.claim);
                out.reports.push(report);
            } else {
                // Per-component tables only; nothing is asserted for the mixture.
                let parts = brin_katok_per_component(
                    &mu,
                    &sys,
                    eps,
                    range.clone(),
                    centers,
                    cfg.seed(),
                    crate::local_entropy::BallMethod::Auto,
                )?;
                for (k, (w, bk)) in parts.iter().enumerate() {
                    let label = format!("{i}.{k}");
                    push_series(&mut series, eps, &label, bk, u);
                    est.push(vec![num(eps), label.clone(), num(u.of(bk.hbk)), num(u.of(bk.spread)), bk.all_exact().to_string(), String::new()]);
                    out.lines.push(format!("eps={eps} measure {i} component {k} (weight {w}): h_BK = {:.9}", u.of(bk.hbk)));
                    summary.push(json!({"eps": eps, "measure": label, "weight": w, "hbk": u.of(bk.hbk)}));
                }
            }
        }
    }
    out.tables.push(est);
    out.tables.push(series);
    out.summary = json!({ "system": spec, "centers": centers, "estimates": summary });
    Ok(())
}

/// `S` at dyadic scales for the system used at `eps`, for the ε0 proxy.
fn dyadic_rates(spec: &SystemSpec) -> Result<Vec<(f64, f64)>> {
    (1..=10)
        .map(|k| {
            let e = 2f64.powi(-k);
            let sys = spec.shift_at(e, 1)?;
            let s = match sys.structural_rate(e) {
                Some(s) => s,
                None => scale_growth(spec, e, 1..=4, RateMethod::SlopeFit)?.series.rate,
            };
            Ok((e, s))
        })
        .collect()
}

fn run_ball_bound(cfg: &Config, out: &mut Outcome) -> Result<()> {
    let spec = cfg.system()?;
    if !spec.is_shift() {
        return Err(Error::Config("system: ball bounds run on shift systems".into()));
    }
    let measures = cfg.measures()?;
    let range = cfg.range([1, 20])?;
    let delta = cfg
        .params
        .delta
        .ok_or_else(|| Error::Config("params.delta: required".into()))?;
    let mdim_est = cfg.params.mdim_est.unwrap_or(0.0);
    let centers = cfg.centers(5);
    let mut t = Table::new(
        "ball_bound",
        &["eps", "center_id", "n", "log_ball_measure", "log_bound", "satisfied"],
    );
    let mut series = Table::new("bk_series", SERIES_HEADER);
    let mut summary = Vec::new();
    for &eps in cfg.eps()? {
        let fixed = spec.fixed_at(eps);
        let sys = fixed.ball_shift_at(eps, *range.end())?;
        let mu = measure_for(&measures[0], &sys.alphabet)?;
        let eps0 = eps0_proxy(sys.alphabet.gap(), delta, mdim_est, &dyadic_rates(&fixed)?);
        let c = ball_bound_check(&mu, &sys, eps, delta, mdim_est, eps0, range.clone(), centers, cfg.seed())?;
        for (k, s) in c.series.iter().enumerate() {
            push_one_series(&mut series, eps, "0", k, s, cfg.units);
            for (j, &(n, _)) in s.per_n.iter().enumerate() {
                let bound = n as f64 * (mdim_est + delta) * eps.ln();
                t.push(vec![
                    num(eps),
                    k.to_string(),
                    n.to_string(),
                    num(s.log_measure[j]),
                    num(bound),
                    (bound <= s.log_measure[j]).to_string(),
                ]);
            }
        }
        out.lines.push(format!(
            "eps={eps} delta={delta}: eps0 proxy {eps0}, {} the proxy; bound {} at every sampled center and n",
            if c.inside_proxy { "inside" } else { "outside" },
            if c.holds_everywhere { "holds" } else { "does not hold" },
        ));
        summary.push(json!({
            "eps": eps,
            "delta": delta,
            "mdim_est": mdim_est,
            "eps0": eps0,
            "inside_proxy": c.inside_proxy,
            "holds_everywhere": c.holds_everywhere,
            "first_failure": c.first_failure,
        }));
        let mut report = c.report;
        report.claim = format!("eps={eps} delta={delta}: {}", report.claim);
        out.reports.push(report);
    }
    out.tables.push(t);
    out.tables.push(series);
    out.summary = json!({ "system": spec, "scales": summary });
    Ok(())
}

fn run_vp(cfg: &Config, out: &mut Outcome) -> Result<()> {
    let spec = cfg.system()?;
    let measures = cfg.measures()?;
    let range = cfg.range([1, 6])?;
    let family = cfg.family()?;
    let n_max = cfg.params.n_max.unwrap_or(8);
    let u = cfg.units;
    let mut infs = Table::new("vp_infs", &["eps", "scale", "measure", "family_value", "value", "provenance", "argmin"]);
    let mut growth = Table::new("vp_growth", &["eps", "scale", "rate_lower", "rate_upper", "structural"]);
    let mut joins = Table::new("vp_joins", &["eps", "n", "log_lower", "log_upper", "exact"]);
    let mut summary = Vec::new();
    for &eps in cfg.eps()? {
        let c = vp_chain_check(spec, &measures, eps, &family, range.clone(), n_max, cfg.tolerances.chain)?;
        for (scale, list) in [(eps, &c.infs_at_eps), (eps / 8.0, &c.infs_at_eighth)] {
            for m in list {
                infs.push(vec![
                    num(eps),
                    num(scale),
                    m.measure.to_string(),
                    num(u.of(m.family_value)),
                    num(u.of(m.value)),
                    format!("{:?}", m.provenance).to_lowercase(),
                    m.argmin.clone(),
                ]);
            }
        }
        for g in [&c.s_eps, &c.s_quarter] {
            growth.push(vec![
                num(eps),
                num(g.eps),
                num(u.of(g.lower().0)),
                num(u.of(g.upper().0)),
                opt(g.structural.map(|v| u.of(v))),
            ]);
        }
        for j in &c.joins {
            joins.push(vec![num(eps), j.n.to_string(), num(u.of(j.log_lower)), num(u.of(j.log_upper)), j.exact.to_string()]);
        }
        out.lines.push(format!(
            "eps={eps}: left chain {}, right chain {}; S(eps/4) in [{:.9}, {:.9}]",
            c.left.verdict.as_str(),
            c.right.verdict.as_str(),
            u.of(c.s_quarter.lower().0),
            u.of(c.s_quarter.upper().0)
        ));
        for n in &c.notes {
            out.lines.push(format!("  note: {n}"));
        }
        summary.push(json!({
            "eps": eps,
            "left": c.left.verdict.as_str(),
            "right": c.right.verdict.as_str(),
            "notes": c.notes,
        }));
        out.reports.push(c.left);
        out.reports.push(c.right);
    }
    out.tables.extend([infs, growth, joins]);
    out.summary = json!({ "system": spec, "scales": summary });
    Ok(())
}

fn run_mbke(cfg: &Config, out: &mut Outcome) -> Result<()> {
    let spec = cfg.system()?;
    let measures = cfg.measures()?;
    let grid = cfg.eps_decreasing()?;
    let range = cfg.range([1, 12])?;
    let u = cfg.units;
    let e = mbke_estimate(spec, &measures, &grid, range, cfg.centers(101), cfg.seed(), cfg.tolerances.mbke)?;
    let mut t = Table::new(
        "mbke",
        &["eps", "symbols", "window", "hbk", "spread", "all_exact", "s_eps", "s_quarter", "mbke_ratio", "mdim_ratio", "gap"],
    );
    for r in &e.rows {
        t.push(vec![
            num(r.eps),
            r.symbols.to_string(),
            r.window.to_string(),
            num(u.of(r.hbk)),
            num(u.of(r.spread)),
            r.all_exact.to_string(),
            num(u.of(r.s_eps)),
            num(u.of(r.s_quarter)),
            num(r.mbke_ratio),
            num(r.mdim_ratio),
            num(r.gap),
        ]);
    }
    out.lines.push(format!(
        "mBKe slope = {:.6}, mdim slope = {:.6}",
        e.estimate.slope, e.mdim.slope
    ));
    out.tables.push(t);
    out.summary = json!({
        "system": spec,
        "mbke_slope": e.estimate.slope,
        "mdim_slope": e.mdim.slope,
        "estimate": e.estimate,
        "mdim": e.mdim,
    });
    out.reports.push(e.report);
    out.reports.push(e.gap_report);
    Ok(())
}

fn run_tame(cfg: &Config, out: &mut Outcome) -> Result<()> {
    let spec = cfg.system()?;
    let deltas = if cfg.params.deltas.is_empty() {
        vec![0.1, 0.5, 1.0]
    } else {
        cfg.params.deltas.clone()
    };
    let opts = CoverOptions::default();
    let mut counts = Vec::new();
    for &eps in cfg.eps()? {
        let log_count = match spec {
            SystemSpec::Rotation { .. } => {
                let sys = spec.build_finite(eps, 0, 0)?;
                (covering_number(&sys.bowen(1)?, eps, &opts)?.upper as f64).ln()
            }
            _ => {
                let (_, hi) = spec.shift_at(eps, 1)?.covering_bracket(1, eps)?;
                (hi as f64).ln()
            }
        };
        counts.push((eps, log_count));
    }
    let tt = tame_growth_diagnostic(&counts, &deltas)?;
    let mut t = Table::new("tame", &["eps", "delta", "log_count", "value"]);
    for r in &tt.rows {
        t.push(vec![num(r.eps), num(r.delta), num(r.log_count), num(r.value)]);
    }
    for v in &tt.verdicts {
        out.lines.push(format!("delta={}: {}", v.delta, v.label));
    }
    out.tables.push(t);
    out.summary = json!({ "system": spec, "verdicts": tt.verdicts });
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_experiment_is_a_config_error() {
        let e = compute(&Config::new("nope")).unwrap_err();
        assert_eq!(exit_code_for(&e), 2);
    }

    #[test]
    fn empty_measures_on_vp_check() {
        let cfg = Config::from_json(
            r#"{"experiment":"vp_check","system":{"type":"full_shift","m":2},"measures":[],"eps_grid":[0.4]}"#,
        )
        .unwrap();
        assert_eq!(exit_code_for(&compute(&cfg).unwrap_err()), 2);
    }

    #[test]
    fn schema_errors_carry_position() {
        let e = Config::from_json("{\"experiment\": \"cover\", \"bogus\": 1}").unwrap_err();
        assert!(e.to_string().contains("line 1"), "{e}");
    }

    #[test]
    fn rotation_cover() {
        let mut cfg = Config::new("cover");
        cfg.system = Some(SystemSpec::Rotation { p: 1, q: 8 });
        cfg.eps_grid = vec![0.5];
        let out = compute(&cfg).unwrap();
        let t = out.table("cover").unwrap();
        assert_eq!(t.rows[0][2], t.rows[0][3]);
    }
}
