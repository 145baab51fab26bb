//! Partition entropies, dynamical entropy of symbol partitions, grid
//! partitions and the dimension-like limits built from them.
//!
//! Partitions act on the alphabet: a cell of the symbol partition `P` is the
//! set of points whose coordinate 0 lies in the cell, and its diameter is
//! measured in the alphabet metric. All entropies are in nats.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::{DimensionEstimate, DimensionKind};
use crate::measures::{closed_form_entropy_rate, visit_cell_blocks, MeasureKind, MeasureSpec, DEFAULT_BLOCK_BUDGET};
use crate::shift_systems::Alphabet;
use crate::stats::{upper_half, xlogx_neg};

const DIAM_TOL: f64 = 1e-12;

/// Assignment of alphabet symbols to cells `0..cell_count`, numbered in order
/// of first appearance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partition {
    cells: Vec<usize>,
    cell_count: usize,
    diameter: f64,
    pub label: String,
}

impl Partition {
    pub fn new(cells: Vec<usize>, alphabet: &Alphabet, label: impl Into<String>) -> Result<Self> {
        if cells.len() != alphabet.len() {
            return Err(Error::domain(format!(
                "partition assigns {} symbols, alphabet has {}",
                cells.len(),
                alphabet.len()
            )));
        }
        let mut relabel = std::collections::HashMap::new();
        let cells: Vec<usize> = cells
            .into_iter()
            .map(|c| {
                let next = relabel.len();
                *relabel.entry(c).or_insert(next)
            })
            .collect();
        let cell_count = relabel.len();
        let s = alphabet.symbols();
        let mut lo = vec![f64::INFINITY; cell_count];
        let mut hi = vec![f64::NEG_INFINITY; cell_count];
        for (i, &c) in cells.iter().enumerate() {
            lo[c] = lo[c].min(s[i]);
            hi[c] = hi[c].max(s[i]);
        }
        let diameter = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max);
        Ok(Partition {
            cells,
            cell_count,
            diameter,
            label: label.into(),
        })
    }

    pub fn points(alphabet: &Alphabet) -> Self {
        Self::new((0..alphabet.len()).collect(), alphabet, "point").expect("sizes match")
    }

    pub fn single(alphabet: &Alphabet) -> Self {
        Self::new(vec![0; alphabet.len()], alphabet, "single").expect("sizes match")
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn cell_count(&self) -> usize {
        self.cell_count
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// True when every cell of `self` lies inside a cell of `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        let mut image = vec![None; self.cell_count];
        for (&a, &b) in self.cells.iter().zip(&other.cells) {
            match image[a] {
                None => image[a] = Some(b),
                Some(x) if x != b => return false,
                _ => {}
            }
        }
        true
    }

    pub fn is_point_partition(&self) -> bool {
        self.cell_count == self.cells.len()
    }
}

/// Shannon entropy `-Σ p log p` of cell masses (0 log 0 = 0).
pub fn partition_entropy(masses: &[f64]) -> f64 {
    masses.iter().map(|&p| xlogx_neg(p)).sum()
}

/// `H_μ(P ∨ T^{-1}P ∨ … ∨ T^{-(n-1)}P)`.
pub fn block_entropy(mu: &MeasureSpec, p: &Partition, n: usize, budget: usize) -> Result<f64> {
    let mut terms = Vec::new();
    visit_cell_blocks(mu, &p.cells, n, budget, |_, mass| terms.push(xlogx_neg(mass)))?;
    // sorted summation keeps the result independent of visiting order
    terms.sort_by(|a, b| a.total_cmp(b));
    Ok(terms.iter().sum())
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyEstimate {
    /// `(n, H_n)` for `n = 1..=n_max`.
    pub block_entropies: Vec<(usize, f64)>,
    /// `H_{n_max} / n_max`.
    pub ratio: f64,
    /// `H_{n_max} - H_{n_max - 1}` (`H_1` when `n_max == 1`).
    pub conditional: f64,
    pub closed_form: Option<f64>,
    pub closed_form_error: Option<f64>,
    /// The conditional estimator.
    pub chosen: f64,
}

/// Exact block entropies of `P` under `mu` for `n = 1..=n_max` and the two
/// finite-n estimators of `h_μ(P)`.
///
/// A closed form is attached for Bernoulli measures (any partition, the
/// coarse process is i.i.d.) and for Markov measures with the point partition.
pub fn dynamical_entropy(mu: &MeasureSpec, p: &Partition, n_max: usize) -> Result<EntropyEstimate> {
    dynamical_entropy_with_budget(mu, p, n_max, DEFAULT_BLOCK_BUDGET)
}

pub fn dynamical_entropy_with_budget(
    mu: &MeasureSpec,
    p: &Partition,
    n_max: usize,
    budget: usize,
) -> Result<EntropyEstimate> {
    mu.require_invariant()?;
    if n_max == 0 {
        return Err(Error::domain("n_max must be at least 1"));
    }
    let mut block_entropies = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let h = block_entropy(mu, p, n, budget).map_err(|e| match e {
            Error::Resource { what, required, budget } => Error::Resource {
                what: format!("{what} (try n_max < {n})"),
                required,
                budget,
            },
            e => e,
        })?;
        block_entropies.push((n, h));
    }
    let h_last = block_entropies[n_max - 1].1;
    let conditional = if n_max == 1 {
        h_last
    } else {
        h_last - block_entropies[n_max - 2].1
    };
    let closed_form = match &mu.kind {
        MeasureKind::Bernoulli { probs } => {
            let mut mass = vec![0.0; p.cell_count];
            for (s, &q) in probs.iter().enumerate() {
                mass[p.cells[s]] += q;
            }
            Some(partition_entropy(&mass))
        }
        MeasureKind::Markov { .. } if p.is_point_partition() => closed_form_entropy_rate(mu),
        _ => None,
    };
    Ok(EntropyEstimate {
        ratio: h_last / n_max as f64,
        closed_form_error: closed_form.map(|c| (conditional - c).abs()),
        block_entropies,
        conditional,
        closed_form,
        chosen: conditional,
    })
}

/// The grid partition `P_m`: symbol `s` goes to cell `⌊m·s⌋`, with `s = 1`
/// in cell `m - 1`.
pub fn grid_partition(alphabet: &Alphabet, m: usize) -> Result<Partition> {
    grid_partition_offset(alphabet, m, 0.0)
}

/// Grid partition with cells `[(i - o)/m, (i + 1 - o)/m)` for offset `o` in `[0, 1)`.
pub fn grid_partition_offset(alphabet: &Alphabet, m: usize, offset: f64) -> Result<Partition> {
    if m == 0 {
        return Err(Error::domain("grid partition needs m >= 1"));
    }
    let cells = alphabet
        .symbols()
        .iter()
        .map(|&s| {
            let c = (m as f64 * s + offset + 1e-12).floor().max(0.0) as usize;
            c.min(m)
        })
        .map(|c| if offset == 0.0 { c.min(m - 1) } else { c })
        .collect();
    let label = if offset == 0.0 {
        format!("grid(m={m})")
    } else {
        format!("grid(m={m}, offset={offset})")
    };
    Partition::new(cells, alphabet, label)
}

/// Which candidates enter the finite partition family used as a stand-in for
/// "all partitions of diameter at most ε".
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartitionFamily {
    /// Number of grid offsets `k/(K m)`.
    pub grid_offsets: usize,
    pub voronoi: bool,
    pub merges: bool,
    /// Admit only partitions of diameter `< ε` instead of `<= ε`.
    pub strict: bool,
}

impl Default for PartitionFamily {
    fn default() -> Self {
        PartitionFamily {
            grid_offsets: 4,
            voronoi: true,
            merges: true,
            strict: false,
        }
    }
}

impl PartitionFamily {
    pub fn grids_only() -> Self {
        PartitionFamily {
            grid_offsets: 1,
            voronoi: false,
            merges: false,
            strict: false,
        }
    }

    /// Diameter test with a rounding allowance of `1e-12`.
    pub fn admits(&self, p: &Partition, eps: f64) -> bool {
        if self.strict {
            p.diameter < eps - DIAM_TOL
        } else {
            p.diameter <= eps + DIAM_TOL
        }
    }

    /// The full candidate pool. It does not depend on ε, so the admissible
    /// subfamily grows with ε and the infimum is nonincreasing in ε.
    pub fn pool(&self, alphabet: &Alphabet) -> Vec<Partition> {
        let mut out = vec![Partition::single(alphabet), Partition::points(alphabet)];
        let resolution = if alphabet.len() > 1 {
            (1.0 / alphabet.gap()).ceil() as usize + 1
        } else {
            1
        };
        let k = self.grid_offsets.max(1);
        let mut bases = Vec::new();
        for m in 1..=resolution {
            for j in 0..k {
                let p = grid_partition_offset(alphabet, m, j as f64 / k as f64).expect("m >= 1");
                if j == 0 {
                    bases.push(p.clone());
                }
                out.push(p);
            }
        }
        let radii: Vec<f64> = (0..=16).map(|j| 0.5f64.powi(j)).filter(|&r| r >= alphabet.gap() / 4.0).collect();
        if self.voronoi {
            for &r in &radii {
                let p = voronoi_of_net(alphabet, r);
                bases.push(p.clone());
                out.push(p);
            }
        }
        if self.merges {
            for base in &bases {
                for &t in &radii {
                    out.push(merge_adjacent(alphabet, base, t));
                }
            }
        }
        let mut seen = BTreeSet::new();
        out.retain(|p| seen.insert(p.cells.clone()));
        out
    }
}

/// Voronoi partition of a greedy `r`-separated net (ties go to the lower centre).
fn voronoi_of_net(alphabet: &Alphabet, r: f64) -> Partition {
    let s = alphabet.symbols();
    let mut centres: Vec<usize> = Vec::new();
    for i in 0..s.len() {
        if centres.iter().all(|&c| (s[i] - s[c]).abs() > r) {
            centres.push(i);
        }
    }
    let cells = s
        .iter()
        .map(|&x| {
            let mut best = 0;
            for (k, &c) in centres.iter().enumerate() {
                if (x - s[c]).abs() < (x - s[centres[best]]).abs() {
                    best = k;
                }
            }
            best
        })
        .collect();
    Partition::new(cells, alphabet, format!("voronoi(r={r})")).expect("sizes match")
}

/// Merges runs of adjacent cells left to right while the merged diameter stays `<= t`.
/// Cells of the base partition must be intervals of the sorted alphabet.
fn merge_adjacent(alphabet: &Alphabet, base: &Partition, t: f64) -> Partition {
    let s = alphabet.symbols();
    let mut cells = vec![0usize; s.len()];
    let mut group = 0;
    let mut start = 0;
    for i in 0..s.len() {
        if i > 0 && base.cells[i] != base.cells[i - 1] {
            // the whole next base cell must fit
            let end = (i..s.len()).take_while(|&j| base.cells[j] == base.cells[i]).last().unwrap_or(i);
            if s[end] - s[start] > t {
                group += 1;
                start = i;
            }
        }
        cells[i] = group;
    }
    Partition::new(cells, alphabet, format!("{} merged(t={t})", base.label)).expect("sizes match")
}

#[derive(Debug, Clone, Serialize)]
pub struct InfEntropy {
    /// Smallest family value; an upper bound on the infimum over all
    /// partitions of diameter at most ε.
    pub value: f64,
    pub argmin: Partition,
    pub candidates: usize,
    /// The point partition was admissible, so it was among the candidates.
    pub includes_point_partition: bool,
}

/// Largest block length keeping `k^n` within the block budget.
fn block_len_for(k: usize, n_max: usize, budget: usize) -> usize {
    let mut n = 1;
    while n < n_max && (k as f64).powi(n as i32 + 1) <= budget as f64 {
        n += 1;
    }
    n
}

/// Entropy of one candidate, exact for Bernoulli and the conditional
/// estimator at the largest affordable block length otherwise.
pub fn family_member_entropy(mu: &MeasureSpec, p: &Partition, n_max: usize) -> Result<f64> {
    if p.cell_count == 1 {
        return Ok(0.0);
    }
    if let MeasureKind::Bernoulli { .. } = mu.kind {
        let e = dynamical_entropy(mu, p, 1)?;
        return Ok(e.closed_form.expect("bernoulli closed form"));
    }
    let n = block_len_for(p.cell_count, n_max, DEFAULT_BLOCK_BUDGET);
    Ok(dynamical_entropy(mu, p, n)?.chosen)
}

/// Minimum of the dynamical entropy over the admissible family members.
pub fn inf_entropy_small_partitions(
    mu: &MeasureSpec,
    eps: f64,
    family: &PartitionFamily,
    n_max: usize,
) -> Result<InfEntropy> {
    if !(eps > 0.0) {
        return Err(Error::domain(format!("eps must be positive, got {eps}")));
    }
    mu.require_invariant()?;
    let alphabet = mu.alphabet();
    let admissible: Vec<Partition> = family
        .pool(&alphabet)
        .into_iter()
        .filter(|p| family.admits(p, eps))
        .collect();
    if admissible.is_empty() {
        return Err(Error::Config(format!("no family member has diameter within {eps}")));
    }
    let values = crate::par::map(&admissible, |p| family_member_entropy(mu, p, n_max));
    let mut best: Option<(f64, usize)> = None;
    for (i, v) in values.into_iter().enumerate() {
        let v = v?;
        if best.is_none_or(|(b, _)| v < b) {
            best = Some((v, i));
        }
    }
    let (value, idx) = best.expect("nonempty");
    Ok(InfEntropy {
        value,
        includes_point_partition: admissible.iter().any(|p| p.is_point_partition()),
        candidates: admissible.len(),
        argmin: admissible[idx].clone(),
    })
}

/// Family infimum per ε and its growth against `log(1/ε)`.
pub fn mrid_estimate(
    mu: &MeasureSpec,
    eps_grid: &[f64],
    family: &PartitionFamily,
    n_max: usize,
) -> Result<DimensionEstimate> {
    if eps_grid.len() < 3 {
        return Err(Error::domain("MRID needs at least three scales"));
    }
    let values = eps_grid
        .iter()
        .map(|&e| inf_entropy_small_partitions(mu, e, family, n_max).map(|r| r.value))
        .collect::<Result<Vec<_>>>()?;
    DimensionEstimate::new(DimensionKind::Mrid, eps_grid.to_vec(), values)
}

#[derive(Debug, Clone, Serialize)]
pub struct InfoDimRow {
    pub m: usize,
    pub entropy: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InfoDimRate {
    pub rows: Vec<InfoDimRow>,
    /// Max and min of `h(P_m)/log m` over the top half of the grid.
    pub upper: f64,
    pub lower: f64,
}

/// `h_μ(P_m) / log m` along an increasing grid of `m` (values `m <= 1` skipped).
pub fn info_dim_rate(mu: &MeasureSpec, m_grid: &[usize], n_max: usize) -> Result<InfoDimRate> {
    if m_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("m grid must be strictly increasing"));
    }
    let alphabet = mu.alphabet();
    let ms: Vec<usize> = m_grid.iter().copied().filter(|&m| m > 1).collect();
    if ms.is_empty() {
        return Err(Error::domain("m grid needs a value above 1"));
    }
    let rows = ms
        .iter()
        .map(|&m| {
            let p = grid_partition(&alphabet, m)?;
            let h = family_member_entropy(mu, &p, n_max)?;
            Ok(InfoDimRow {
                m,
                entropy: h,
                ratio: h / (m as f64).ln(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let top = &rows[upper_half(rows.len())];
    Ok(InfoDimRate {
        upper: top.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max),
        lower: top.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min),
        rows,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MatchedScaleRow {
    pub m: usize,
    pub mrid_value: f64,
    pub grid_value: f64,
    pub gap: f64,
    pub mrid_le_grid: bool,
}

/// Family infimum at `ε = 1/m` against `h(P_m)`. The grid partition is
/// itself admissible at that scale, so `inf ≤ h(P_m)` must hold exactly.
pub fn mrid_vs_info_dim(
    mu: &MeasureSpec,
    m_grid: &[usize],
    family: &PartitionFamily,
    n_max: usize,
) -> Result<Vec<MatchedScaleRow>> {
    let alphabet = mu.alphabet();
    m_grid
        .iter()
        .filter(|&&m| m > 1)
        .map(|&m| {
            let inf = inf_entropy_small_partitions(mu, 1.0 / m as f64, family, n_max)?;
            let grid = family_member_entropy(mu, &grid_partition(&alphabet, m)?, n_max)?;
            Ok(MatchedScaleRow {
                m,
                mrid_value: inf.value,
                grid_value: grid,
                gap: grid - inf.value,
                mrid_le_grid: inf.value <= grid,
            })
        })
        .collect()
}
