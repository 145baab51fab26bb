use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use super::covering::{covering_number, covering_number_with_witness, CoverCount, CoverOptions};
use super::setcover::{exact_set_cover, greedy_set_cover, remove_dominated};
use super::system::{FiniteMetricSystem, Metric};
use crate::error::{Error, Result};
use crate::par;

/// A finite cover of a point set `0..points` by nonempty subsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cover {
    points: usize,
    sets: Vec<Vec<usize>>,
}

impl Cover {
    pub fn new(points: usize, sets: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; points];
        let mut sets = sets;
        for s in sets.iter_mut() {
            if s.is_empty() {
                return Err(Error::domain("cover contains an empty set"));
            }
            s.sort_unstable();
            s.dedup();
            for &i in s.iter() {
                if i >= points {
                    return Err(Error::domain(format!("cover element references point {i}")));
                }
                seen[i] = true;
            }
        }
        if let Some(miss) = seen.iter().position(|s| !s) {
            return Err(Error::domain(format!("point {miss} is not covered")));
        }
        Ok(Cover { points, sets })
    }

    pub fn whole(points: usize) -> Self {
        Cover {
            points,
            sets: vec![(0..points).collect()],
        }
    }

    pub fn singletons(points: usize) -> Self {
        Cover {
            points,
            sets: (0..points).map(|i| vec![i]).collect(),
        }
    }

    /// The partition of points by a labelling function.
    pub fn from_labels(points: usize, label: impl Fn(usize) -> usize) -> Self {
        let mut by: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..points {
            by.entry(label(i)).or_default().push(i);
        }
        Cover {
            points,
            sets: by.into_values().collect(),
        }
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Largest diameter of a cover element.
    pub fn diameter<M: Metric>(&self, metric: &M) -> f64 {
        self.sets
            .iter()
            .map(|s| metric.set_diameter(s))
            .fold(0.0, f64::max)
    }

    fn membership(&self) -> Vec<Vec<u32>> {
        let mut mem = vec![Vec::new(); self.points];
        for (k, s) in self.sets.iter().enumerate() {
            for &i in s {
                mem[i].push(k as u32);
            }
        }
        mem
    }

    pub fn has_whole_space(&self) -> bool {
        self.sets.iter().any(|s| s.len() == self.points)
    }

    fn is_partition(&self) -> bool {
        self.sets.iter().map(|s| s.len()).sum::<usize>() == self.points
    }
}

/// Lebesgue number: the largest `r` such that every open ball `B(x, r)` lies
/// inside some cover element.
///
/// For each point the best radius is `max_{C ∋ x} min_{y ∉ C} ρ(x, y)`; the
/// Lebesgue number is the minimum over points. A cover containing the whole
/// space reports the space diameter.
pub fn lebesgue_number<M: Metric>(metric: &M, cover: &Cover) -> f64 {
    let p = metric.size();
    if let Some(v) = metric.xor_view().filter(|_| cover.is_partition() && !cover.has_whole_space()) {
        // each point lies in exactly one set, so its radius is the distance to the complement
        return cover
            .sets
            .iter()
            .map(|s| {
                let mut inside = vec![false; p];
                s.iter().for_each(|&i| inside[i] = true);
                let rest: Vec<usize> = (0..p).filter(|&i| !inside[i]).collect();
                v.min_distance(s, &rest)
            })
            .fold(f64::INFINITY, f64::min);
    }
    let mem = cover.membership();
    let in_set: Vec<FixedBitSet> = cover
        .sets
        .iter()
        .map(|s| {
            let mut b = FixedBitSet::with_capacity(p);
            for &i in s {
                b.insert(i);
            }
            b
        })
        .collect();
    let leb = par::min_range(p, |x| {
        mem[x]
            .iter()
            .map(|&k| {
                let set = &in_set[k as usize];
                (0..p)
                    .filter(|&y| !set.contains(y))
                    .map(|y| metric.dist(x, y))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    });
    if leb.is_infinite() {
        metric.diameter()
    } else {
        leb
    }
}

/// Cover of diameter ≤ ε with Lebesgue number ≥ ε/4: open balls of radius
/// ε/2 around a greedy ε/4-net. Both bounds are measured before returning.
pub fn lebesgue_cover(sys: &FiniteMetricSystem, eps: f64) -> Result<Cover> {
    if !(eps > 0.0) {
        return Err(Error::domain(format!("eps must be positive, got {eps}")));
    }
    let p = sys.points();
    let mut net: Vec<usize> = Vec::new();
    for y in 0..p {
        if !net.iter().any(|&x| sys.dist(x, y) < eps / 4.0) {
            net.push(y);
        }
    }
    let mut sets: Vec<Vec<usize>> = par::map(&net, |&x| (0..p).filter(|&y| sys.dist(x, y) < eps / 2.0).collect());
    sets.sort();
    sets.dedup();
    let cover = Cover::new(p, sets)?;
    let diam = cover.diameter(sys);
    let leb = lebesgue_number(sys, &cover);
    // a cover containing the whole space contains every ball
    if diam > eps || (leb < eps / 4.0 && !cover.has_whole_space()) {
        return Err(Error::Invariant(format!(
            "lebesgue cover bounds failed: diam {diam} (eps {eps}), Lebesgue number {leb}"
        )));
    }
    Ok(cover)
}

/// `N(U^n)` for the join `U ∨ T^{-1}U ∨ … ∨ T^{-(n-1)}U`.
#[derive(Debug, Clone, Serialize)]
pub struct JoinCount {
    pub lower: usize,
    pub upper: usize,
    pub exact: bool,
    /// Number of distinct nonempty join elements.
    pub elements: usize,
    /// A subcover of size `upper`.
    #[serde(skip)]
    pub subcover: Vec<Vec<usize>>,
}

/// Minimal subcover cardinality of the n-fold dynamical join of `cover`.
pub fn cover_join_count(
    sys: &FiniteMetricSystem,
    cover: &Cover,
    n: usize,
    opts: &CoverOptions,
) -> Result<JoinCount> {
    if n == 0 {
        return Err(Error::domain("join needs n >= 1"));
    }
    if cover.points() != sys.points() {
        return Err(Error::domain("cover and system have different point counts"));
    }
    let p = sys.points();
    let mem = cover.membership();
    let orbits = sys.orbit_table(n);
    let mut elements: BTreeMap<Vec<u32>, Vec<usize>> = BTreeMap::new();
    const MAX_TUPLES_PER_POINT: usize = 1 << 16;
    for x in 0..p {
        let choices: Vec<&Vec<u32>> = orbits.iter().map(|o| &mem[o[x]]).collect();
        let total = choices.iter().map(|c| c.len()).product::<usize>();
        if total > MAX_TUPLES_PER_POINT {
            return Err(Error::resource(
                "join tuples per point",
                total as u128,
                MAX_TUPLES_PER_POINT as u128,
            ));
        }
        let mut tuple = vec![0u32; n];
        for code in 0..total {
            let mut c = code;
            for (k, ch) in choices.iter().enumerate() {
                tuple[k] = ch[c % ch.len()];
                c /= ch.len();
            }
            elements.entry(tuple.clone()).or_default().push(x);
        }
    }
    let element_count = elements.len();
    if element_count == 0 {
        return Err(Error::Invariant("join of a cover has no elements".into()));
    }
    if cover.is_partition() {
        let cells: Vec<Vec<usize>> = elements.into_values().collect();
        return Ok(JoinCount {
            lower: cells.len(),
            upper: cells.len(),
            exact: true,
            elements: element_count,
            subcover: cells,
        });
    }
    let mut sets: Vec<Vec<usize>> = elements.into_values().collect();
    sets.sort();
    sets.dedup();
    let bits: Vec<FixedBitSet> = remove_dominated(
        sets.iter()
            .map(|s| {
                let mut b = FixedBitSet::with_capacity(p);
                for &i in s {
                    b.insert(i);
                }
                b
            })
            .collect(),
    );
    let to_sets = |idx: &[usize]| -> Vec<Vec<usize>> { idx.iter().map(|&k| bits[k].ones().collect()).collect() };
    if bits.len() <= opts.exact_max_candidates {
        if let Some(best) = exact_set_cover(p, &bits, opts.node_limit) {
            return Ok(JoinCount {
                lower: best.len(),
                upper: best.len(),
                exact: true,
                elements: element_count,
                subcover: to_sets(&best),
            });
        }
    }
    let greedy = greedy_set_cover(p, &bits).ok_or_else(|| Error::Invariant("join does not cover the space".into()))?;
    let largest = bits.iter().map(|b| b.count_ones(..)).max().unwrap_or(1);
    Ok(JoinCount {
        lower: p.div_ceil(largest),
        upper: greedy.len(),
        exact: false,
        elements: element_count,
        subcover: to_sets(&greedy),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichRow {
    pub n: usize,
    /// `#(X, ρ_n, diam U)`.
    pub count_at_diam: CoverCount,
    /// `N(U^n)`.
    pub join: JoinCount,
    /// `#(X, ρ_n, Leb U)`.
    pub count_at_leb: CoverCount,
    pub left_holds: bool,
    pub right_holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    pub diam: f64,
    pub lebesgue: f64,
    pub rows: Vec<SandwichRow>,
    /// Every row satisfied both inequalities (using bounds in the sound direction).
    pub holds: bool,
    /// Every quantity was computed exactly.
    pub all_exact: bool,
    pub skipped: Option<String>,
}

/// Checks `#(X, ρ_n, diam U) ≤ N(U^n) ≤ #(X, ρ_n, Leb U)` for `n = 1..=n_max`.
///
/// When exact counts are out of budget the left side uses its upper bound
/// and the right side its lower bound, so a `holds` verdict stays sound. The
/// join subcover is offered as a witness for the left-hand upper bound; it is
/// only accepted after its ρ_n-diameters are measured.
pub fn sandwich_check(
    sys: &FiniteMetricSystem,
    cover: &Cover,
    n_max: usize,
    opts: &CoverOptions,
    max_points: usize,
) -> Result<SandwichReport> {
    if sys.points() > max_points {
        return Ok(SandwichReport {
            diam: f64::NAN,
            lebesgue: f64::NAN,
            rows: Vec::new(),
            holds: false,
            all_exact: false,
            skipped: Some(format!(
                "skipped: exact mode unavailable ({} points > {max_points})",
                sys.points()
            )),
        });
    }
    let diam = cover.diameter(sys);
    let lebesgue = lebesgue_number(sys, cover);
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let bowen = sys.bowen(n)?;
        let join = cover_join_count(sys, cover, n, opts)?;
        let count_at_diam = if diam > 0.0 {
            covering_number_with_witness(&bowen, diam, opts, &join.subcover)?
        } else {
            CoverCount::exact(distinct_points(&bowen))
        };
        let count_at_leb = if lebesgue > 0.0 {
            covering_number(&bowen, lebesgue, opts)?
        } else {
            CoverCount::exact(distinct_points(&bowen))
        };
        let left_holds = count_at_diam.upper <= join.lower;
        let right_holds = join.upper <= count_at_leb.lower;
        rows.push(SandwichRow {
            n,
            count_at_diam,
            join,
            count_at_leb,
            left_holds,
            right_holds,
        });
    }
    let holds = rows.iter().all(|r| r.left_holds && r.right_holds);
    let all_exact = rows
        .iter()
        .all(|r| r.count_at_diam.is_exact() && r.join.exact && r.count_at_leb.is_exact());
    Ok(SandwichReport {
        diam,
        lebesgue,
        rows,
        holds,
        all_exact,
        skipped: None,
    })
}

fn distinct_points<M: Metric>(m: &M) -> usize {
    // covering at scale 0 separates every pair at positive distance
    let p = m.size();
    let mut reps: Vec<usize> = Vec::new();
    for i in 0..p {
        if !reps.iter().any(|&r| m.dist(r, i) == 0.0) {
            reps.push(i);
        }
    }
    reps.len()
}
