use serde::Serialize;

use super::ba::{blahut_arimoto_from, BaResult, DistortionProblem};
use crate::error::{Error, Result};
use crate::par;

/// Solver settings for curve sweeps and inversions.
#[derive(Debug, Clone, Copy)]
pub struct RdOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Sweep `β ∈ {2^{lo}, 2^{lo + 1/2}, …, 2^{hi}}`.
    pub log2_beta_lo: f64,
    pub log2_beta_hi: f64,
    pub refine_rounds: usize,
    pub bisection_steps: usize,
}

impl Default for RdOptions {
    fn default() -> Self {
        RdOptions {
            tol: 1e-13,
            max_iter: 20_000,
            log2_beta_lo: -6.0,
            log2_beta_hi: 12.0,
            refine_rounds: 3,
            bisection_steps: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    /// Lagrange slope; `0` and `inf` mark the two exact end points.
    pub beta: f64,
    /// `E c(X, Y)` (distortion raised to the power p).
    pub d: f64,
    /// `I(X;Y) / n` in nats per symbol.
    pub r: f64,
    pub iters: usize,
    pub converged: bool,
}

/// Points on the rate-distortion curve of one problem, sorted by `d`
/// increasing with `r` nonincreasing.
#[derive(Debug, Clone, Serialize)]
pub struct RDCurve {
    pub n: usize,
    pub p: f64,
    pub points: Vec<CurvePoint>,
}

impl RDCurve {
    /// Lower convex hull of the points.
    pub fn hull(&self) -> Vec<CurvePoint> {
        let mut hull: Vec<CurvePoint> = Vec::new();
        for &pt in &self.points {
            while hull.len() >= 2 {
                let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                let cross = (b.d - a.d) * (pt.r - a.r) - (b.r - a.r) * (pt.d - a.d);
                if cross <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(pt);
        }
        hull
    }

    /// Piecewise-linear rate on the hull at distortion `d` (an upper bound on
    /// the true curve by convexity, up to solver error).
    pub fn rate_on_hull(&self, d: f64) -> f64 {
        let h = self.hull();
        if d <= h[0].d {
            return h[0].r;
        }
        for w in h.windows(2) {
            if d <= w[1].d {
                let t = (d - w[0].d) / (w[1].d - w[0].d);
                return w[0].r + t * (w[1].r - w[0].r);
            }
        }
        h[h.len() - 1].r
    }

    /// CSV rows: beta, D, R_nats, iters, converged.
    pub fn csv_rows(&self) -> Vec<[String; 5]> {
        self.points
            .iter()
            .map(|p| {
                [
                    format!("{}", p.beta),
                    format!("{:.12e}", p.d),
                    format!("{:.12e}", p.r),
                    p.iters.to_string(),
                    p.converged.to_string(),
                ]
            })
            .collect()
    }
}

/// A problem together with its swept curve, used to invert the curve to
/// solver accuracy.
pub struct RdSolver {
    pub prob: DistortionProblem,
    pub opts: RdOptions,
    pub curve: RDCurve,
    sweep: Vec<BaResult>,
    d0: f64,
    h: f64,
    zero_reachable: bool,
}

/// Rate at a distortion level with a bracket `[lower, upper]`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateValue {
    /// Per-symbol nats.
    pub rate: f64,
    pub lower: f64,
    pub upper: f64,
    pub beta: f64,
}

/// Distortion (`E c`) at a rate budget with a bracket.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DistortionValue {
    pub distortion: f64,
    pub lower: f64,
    pub upper: f64,
    pub beta: f64,
}

impl RdSolver {
    pub fn new(prob: DistortionProblem, opts: RdOptions) -> Result<Self> {
        let (d0, _) = prob.constant_distortion();
        let h = prob.source_entropy();
        let zero_reachable = prob.zero_distortion_reachable();
        let mut betas: Vec<f64> = Vec::new();
        let mut e = opts.log2_beta_lo;
        while e <= opts.log2_beta_hi + 1e-9 {
            betas.push(2f64.powf(e));
            e += 0.5;
        }
        let mut sweep: Vec<BaResult> = par::map(&betas, |&b| blahut_arimoto_from(&prob, b, opts.tol, opts.max_iter, None))
            .into_iter()
            .collect::<Result<_>>()?;
        let span_d = d0.max(1e-300);
        let span_r = h.max(1e-300);
        for _ in 0..opts.refine_rounds {
            let mids: Vec<f64> = sweep
                .windows(2)
                .filter(|w| {
                    (w[0].distortion - w[1].distortion).abs() > 0.02 * span_d
                        || (w[0].rate - w[1].rate).abs() > 0.02 * span_r
                })
                .map(|w| (w[0].beta * w[1].beta).sqrt())
                .collect();
            if mids.is_empty() {
                break;
            }
            let extra: Vec<BaResult> = par::map(&mids, |&b| blahut_arimoto_from(&prob, b, opts.tol, opts.max_iter, None))
                .into_iter()
                .collect::<Result<_>>()?;
            sweep.extend(extra);
            sweep.sort_by(|a, b| a.beta.total_cmp(&b.beta));
        }
        let n = prob.n as f64;
        let mut points = vec![CurvePoint {
            beta: 0.0,
            d: d0,
            r: 0.0,
            iters: 0,
            converged: true,
        }];
        points.extend(sweep.iter().map(|s| CurvePoint {
            beta: s.beta,
            d: s.distortion,
            r: s.rate / n,
            iters: s.iterations,
            converged: s.converged,
        }));
        if zero_reachable {
            points.push(CurvePoint {
                beta: f64::INFINITY,
                d: 0.0,
                r: h / n,
                iters: 0,
                converged: true,
            });
        }
        points.sort_by(|a, b| a.d.total_cmp(&b.d).then(b.r.total_cmp(&a.r)));
        let curve = RDCurve {
            n: prob.n,
            p: prob.p,
            points,
        };
        Ok(RdSolver {
            prob,
            opts,
            curve,
            sweep,
            d0,
            h,
            zero_reachable,
        })
    }

    /// `min_y E c(X, y)`.
    pub fn constant_distortion(&self) -> f64 {
        self.d0
    }

    /// Block entropy per symbol.
    pub fn max_rate(&self) -> f64 {
        self.h / self.prob.n as f64
    }

    fn solve(&self, beta: f64, init: Option<&[f64]>) -> Result<BaResult> {
        blahut_arimoto_from(&self.prob, beta, self.opts.tol, self.opts.max_iter, init)
    }

    /// Bisection on `log β` for `key(β) = target`, where `key` is
    /// nonincreasing (`sign = -1`, distortion) or nondecreasing (`sign = 1`,
    /// rate) in β. Returns the final bracketing solutions.
    fn bracket(&self, target: f64, key: impl Fn(&BaResult) -> f64, increasing: bool) -> Result<(BaResult, BaResult)> {
        let below = |r: &BaResult| if increasing { key(r) <= target } else { key(r) >= target };
        let mut lo: Option<&BaResult> = None;
        let mut hi: Option<&BaResult> = None;
        for s in &self.sweep {
            if below(s) {
                lo = Some(s);
            } else if hi.is_none() {
                hi = Some(s);
            }
        }
        let mut lo = match lo {
            Some(s) => s.clone(),
            None => self.solve(2f64.powf(self.opts.log2_beta_lo - 12.0), None)?,
        };
        let mut hi = match hi {
            Some(s) => s.clone(),
            None => {
                let wide = self.solve(2f64.powf(self.opts.log2_beta_hi + 12.0), Some(&lo.output))?;
                if below(&wide) {
                    return Err(Error::Config(format!(
                        "rate-distortion curve does not reach {target} within the widened beta sweep"
                    )));
                }
                wide
            }
        };
        if !below(&lo) {
            return Err(Error::Config(format!("target {target} lies beyond the small-beta end of the curve")));
        }
        for _ in 0..self.opts.bisection_steps {
            if (hi.beta / lo.beta).ln() < 1e-13 {
                break;
            }
            let mid = (lo.beta * hi.beta).sqrt();
            let s = self.solve(mid, Some(&lo.output))?;
            if below(&s) {
                lo = s;
            } else {
                hi = s;
            }
        }
        Ok((lo, hi))
    }

    /// `R̃(n, ·)` at the cost level `target` (= `ε^p`), per symbol.
    pub fn rate_at(&self, target: f64) -> Result<RateValue> {
        let n = self.prob.n as f64;
        if target >= self.d0 {
            return Ok(RateValue {
                rate: 0.0,
                lower: 0.0,
                upper: 0.0,
                beta: 0.0,
            });
        }
        if target <= 0.0 {
            if !self.zero_reachable {
                return Err(Error::Config("zero distortion is not reachable with this reproduction alphabet".into()));
            }
            let r = self.h / n;
            return Ok(RateValue {
                rate: r,
                lower: r,
                upper: r,
                beta: f64::INFINITY,
            });
        }
        // lo: distortion >= target (smaller beta); hi: distortion < target
        let (lo, hi) = self.bracket(target, |r| r.distortion, false)?;
        let chord = if (lo.distortion - hi.distortion).abs() > 0.0 {
            let t = (lo.distortion - target) / (lo.distortion - hi.distortion);
            lo.rate + t * (hi.rate - lo.rate)
        } else {
            lo.rate.min(hi.rate)
        };
        let tangent = |s: &BaResult| s.rate - s.beta * (target - s.distortion);
        let lower = tangent(&lo).max(tangent(&hi)).min(chord);
        Ok(RateValue {
            rate: chord.max(0.0) / n,
            lower: lower.max(0.0) / n,
            upper: chord.max(0.0) / n,
            beta: (lo.beta * hi.beta).sqrt(),
        })
    }

    /// `E c` of the distortion-rate function at `rate` nats per symbol.
    pub fn distortion_at(&self, rate: f64) -> Result<DistortionValue> {
        let n = self.prob.n as f64;
        let target = rate * n;
        if rate <= 0.0 {
            return Ok(DistortionValue {
                distortion: self.d0,
                lower: self.d0,
                upper: self.d0,
                beta: 0.0,
            });
        }
        if target >= self.h && self.zero_reachable {
            return Ok(DistortionValue {
                distortion: 0.0,
                lower: 0.0,
                upper: 0.0,
                beta: f64::INFINITY,
            });
        }
        // lo: rate <= target (smaller beta); hi: rate > target
        let (lo, hi) = self.bracket(target, |r| r.rate, true)?;
        let chord = if (hi.rate - lo.rate).abs() > 0.0 {
            let t = (target - lo.rate) / (hi.rate - lo.rate);
            lo.distortion + t * (hi.distortion - lo.distortion)
        } else {
            lo.distortion.min(hi.distortion)
        };
        let tangent = |s: &BaResult| s.distortion - (target - s.rate) / s.beta;
        let lower = tangent(&lo).max(tangent(&hi)).min(chord);
        Ok(DistortionValue {
            distortion: chord.max(0.0),
            lower: lower.max(0.0),
            upper: chord.max(0.0),
            beta: (lo.beta * hi.beta).sqrt(),
        })
    }
}
