use fixedbitset::FixedBitSet;
use serde::Serialize;

use super::setcover::{exact_set_cover, greedy_set_cover, maximal_cliques, remove_dominated};
use super::system::Metric;
use crate::error::{Error, Result};
use crate::par;

/// Which sets count as ε-small.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// Sets of diameter at most ε.
    Diameter,
    /// Closed balls of radius ε centred at points of the space.
    Ball,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMethod {
    Exact,
    /// Greedy (or witness) upper bound with a packing lower bound.
    Bracket,
}

#[derive(Debug, Clone, Copy)]
pub struct CoverOptions {
    pub convention: Convention,
    /// Exact search only up to this many points.
    pub exact_max_points: usize,
    /// Exact search only up to this many candidate sets after deduplication.
    pub exact_max_candidates: usize,
    pub node_limit: u64,
    /// Greedy upper bounds are skipped above this many points.
    pub greedy_max_points: usize,
}

impl Default for CoverOptions {
    fn default() -> Self {
        CoverOptions {
            convention: Convention::Diameter,
            exact_max_points: 24,
            exact_max_candidates: 64,
            node_limit: 2_000_000,
            greedy_max_points: 8192,
        }
    }
}

/// Covering number, exact or bracketed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CoverCount {
    pub lower: usize,
    pub upper: usize,
    pub method: CountMethod,
}

impl CoverCount {
    pub fn exact(n: usize) -> Self {
        CoverCount {
            lower: n,
            upper: n,
            method: CountMethod::Exact,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.method == CountMethod::Exact
    }

    /// The exact value, if known.
    pub fn value(&self) -> Option<usize> {
        self.is_exact().then_some(self.lower)
    }

    pub fn log_lower(&self) -> f64 {
        (self.lower as f64).ln()
    }

    pub fn log_upper(&self) -> f64 {
        (self.upper as f64).ln()
    }
}

/// ε-covering number `#(X, ρ, ε)` of the whole space under `metric`.
///
/// Exact (branch and bound over maximal ε-cliques, or over balls) when the
/// instance fits the configured budget; otherwise a bracket of a greedy upper
/// bound and a packing lower bound.
pub fn covering_number<M: Metric>(metric: &M, eps: f64, opts: &CoverOptions) -> Result<CoverCount> {
    covering_number_with_witness(metric, eps, opts, &[])
}

/// Like [`covering_number`], but a candidate cover `witness` may tighten the
/// upper bound. The witness is used only if it covers every point and every
/// set in it is measured to be ε-small.
pub fn covering_number_with_witness<M: Metric>(
    metric: &M,
    eps: f64,
    opts: &CoverOptions,
    witness: &[Vec<usize>],
) -> Result<CoverCount> {
    if !(eps > 0.0) {
        return Err(Error::domain(format!("eps must be positive, got {eps}")));
    }
    let p = metric.size();
    if p == 0 {
        return Ok(CoverCount::exact(0));
    }
    if p == 1 {
        return Ok(CoverCount::exact(1));
    }
    if p <= opts.exact_max_points {
        if let Some(n) = exact_covering(metric, eps, opts) {
            return Ok(CoverCount::exact(n));
        }
    }
    let lower = packing_lower_bound(metric, eps, opts);
    let mut upper = greedy_upper_bound(metric, eps, opts).unwrap_or(p);
    if !witness.is_empty() && witness.len() < upper && witness_is_valid(metric, eps, opts, witness) {
        upper = witness.len();
    }
    if lower == upper {
        return Ok(CoverCount::exact(lower));
    }
    if lower > upper {
        return Err(Error::Invariant(format!(
            "packing bound {lower} exceeds cover bound {upper} at eps={eps}"
        )));
    }
    Ok(CoverCount {
        lower,
        upper,
        method: CountMethod::Bracket,
    })
}

fn candidate_sets<M: Metric>(metric: &M, eps: f64, opts: &CoverOptions) -> Option<Vec<FixedBitSet>> {
    let p = metric.size();
    let adj: Vec<FixedBitSet> = (0..p)
        .map(|i| {
            let mut b = FixedBitSet::with_capacity(p);
            for j in 0..p {
                if j != i && metric.dist(i, j) <= eps {
                    b.insert(j);
                }
            }
            b
        })
        .collect();
    let sets = match opts.convention {
        Convention::Diameter => maximal_cliques(&adj, opts.exact_max_candidates.max(1) * 64)?,
        Convention::Ball => adj
            .into_iter()
            .enumerate()
            .map(|(i, mut b)| {
                b.insert(i);
                b
            })
            .collect(),
    };
    let sets = remove_dominated(sets);
    (sets.len() <= opts.exact_max_candidates).then_some(sets)
}

fn exact_covering<M: Metric>(metric: &M, eps: f64, opts: &CoverOptions) -> Option<usize> {
    let sets = candidate_sets(metric, eps, opts)?;
    exact_set_cover(metric.size(), &sets, opts.node_limit).map(|c| c.len())
}

/// Greedy upper bound on the covering number.
///
/// Small spaces: grow an ε-small set from every uncovered seed (nearest
/// points first) and keep the largest; larger spaces: grow from the lowest
/// uncovered index only. `None` above `greedy_max_points`.
pub fn greedy_upper_bound<M: Metric>(metric: &M, eps: f64, opts: &CoverOptions) -> Option<usize> {
    let p = metric.size();
    if p > opts.greedy_max_points {
        return None;
    }
    if opts.convention == Convention::Ball {
        let balls: Vec<FixedBitSet> = par::map_range(p, |i| {
            let mut b = FixedBitSet::with_capacity(p);
            for j in 0..p {
                if metric.dist(i, j) <= eps {
                    b.insert(j);
                }
            }
            b
        });
        return greedy_set_cover(p, &balls).map(|c| c.len());
    }
    let mut covered = vec![false; p];
    let mut count = 0;
    let thorough = p <= 512;
    while let Some(first) = covered.iter().position(|c| !c) {
        let seeds: Vec<usize> = if thorough {
            (first..p).filter(|&i| !covered[i]).collect()
        } else {
            vec![first]
        };
        let grown = par::map(&seeds, |&s| grow_set(metric, eps, s, &covered, thorough));
        let best = grown
            .into_iter()
            .max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])))
            .expect("at least one seed");
        for &i in &best {
            covered[i] = true;
        }
        count += 1;
    }
    Some(count)
}

fn grow_set<M: Metric>(metric: &M, eps: f64, seed: usize, covered: &[bool], nearest_first: bool) -> Vec<usize> {
    let p = metric.size();
    let mut order: Vec<usize> = (0..p).filter(|&j| !covered[j] && j != seed).collect();
    if nearest_first {
        order.sort_by(|&a, &b| metric.dist(seed, a).total_cmp(&metric.dist(seed, b)).then(a.cmp(&b)));
    }
    let mut set = vec![seed];
    for j in order {
        if metric.dist(seed, j) > eps {
            if nearest_first {
                break;
            }
            continue;
        }
        if set.iter().all(|&k| metric.dist(k, j) <= eps) {
            set.push(j);
        }
    }
    set
}

/// Size of a greedy maximal packing (points pairwise farther than ε, or 2ε
/// for balls). Any ε-small set contains at most one packing point, so this
/// is a lower bound on the covering number.
pub fn packing_lower_bound<M: Metric>(metric: &M, eps: f64, opts: &CoverOptions) -> usize {
    let sep = match opts.convention {
        Convention::Diameter => eps,
        Convention::Ball => 2.0 * eps,
    };
    let mut packing: Vec<usize> = Vec::new();
    for i in 0..metric.size() {
        if packing.iter().all(|&k| metric.dist(k, i) > sep) {
            packing.push(i);
        }
    }
    packing.len()
}

fn witness_is_valid<M: Metric>(metric: &M, eps: f64, opts: &CoverOptions, witness: &[Vec<usize>]) -> bool {
    let p = metric.size();
    let mut seen = vec![false; p];
    for set in witness {
        for &i in set {
            if i >= p {
                return false;
            }
            seen[i] = true;
        }
    }
    if seen.iter().any(|s| !s) {
        return false;
    }
    match opts.convention {
        Convention::Diameter => witness.iter().all(|s| metric.set_diameter(s) <= eps),
        Convention::Ball => witness
            .iter()
            .all(|s| (0..p).any(|c| s.iter().all(|&i| metric.dist(c, i) <= eps))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_core::{DistTable, FiniteMetricSystem};

    fn evenly_spaced(m: usize) -> FiniteMetricSystem {
        FiniteMetricSystem::line((0..m).map(|k| k as f64 / (m - 1) as f64).collect(), "grid").unwrap()
    }

    #[test]
    fn one_point() {
        let s = FiniteMetricSystem::line(vec![0.3], "pt").unwrap();
        assert_eq!(covering_number(&s, 0.01, &CoverOptions::default()).unwrap(), CoverCount::exact(1));
    }

    #[test]
    fn two_points_diameter_convention() {
        let s = FiniteMetricSystem::line(vec![0.0, 1.0], "two").unwrap();
        assert_eq!(covering_number(&s, 1.0, &CoverOptions::default()).unwrap().value(), Some(1));
        assert_eq!(covering_number(&s, 0.999, &CoverOptions::default()).unwrap().value(), Some(2));
    }

    #[test]
    fn evenly_spaced_below_spacing_needs_singletons() {
        for m in 2..=12 {
            let s = evenly_spaced(m);
            let eps = 0.9 / (m - 1) as f64;
            assert_eq!(covering_number(&s, eps, &CoverOptions::default()).unwrap().value(), Some(m));
        }
    }

    #[test]
    fn nonpositive_eps_is_domain_error() {
        let s = evenly_spaced(3);
        assert!(covering_number(&s, 0.0, &CoverOptions::default()).is_err());
        assert!(covering_number(&s, -1.0, &CoverOptions::default()).is_err());
    }

    #[test]
    fn ball_convention_differs_from_diameter() {
        // three collinear points 0, 1, 2: one ball of radius 1 (centre 1) but
        // diameter-1 sets need two
        let s = FiniteMetricSystem::line(vec![0.0, 1.0, 2.0], "three").unwrap();
        let ball = CoverOptions {
            convention: Convention::Ball,
            ..Default::default()
        };
        assert_eq!(covering_number(&s, 1.0, &ball).unwrap().value(), Some(1));
        assert_eq!(covering_number(&s, 1.0, &CoverOptions::default()).unwrap().value(), Some(2));
    }

    #[test]
    fn bracket_mode_on_larger_space() {
        let s = evenly_spaced(200);
        let c = covering_number(&s, 0.1, &CoverOptions::default()).unwrap();
        // 1-D: greedy and packing both hit the optimum of ceil(200 / 20)
        assert_eq!(c.value(), Some(10));
    }

    #[test]
    fn witness_tightens_upper_bound() {
        let opts = CoverOptions {
            exact_max_points: 0,
            greedy_max_points: 0,
            ..Default::default()
        };
        let t = DistTable::from_fn(4, |i, j| if i == j { 0.0 } else if i / 2 == j / 2 { 0.1 } else { 1.0 });
        let s = FiniteMetricSystem::static_table(t, "pairs").unwrap();
        let without = covering_number(&s, 0.5, &opts).unwrap();
        assert_eq!(without.upper, 4);
        let with = covering_number_with_witness(&s, 0.5, &opts, &[vec![0, 1], vec![2, 3]]).unwrap();
        assert_eq!(with.value(), Some(2));
        // an invalid witness (set too wide) is ignored
        let bad = covering_number_with_witness(&s, 0.5, &opts, &[vec![0, 1, 2, 3]]).unwrap();
        assert_eq!(bad.upper, 4);
    }
}
