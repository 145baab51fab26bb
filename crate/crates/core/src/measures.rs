//! Shift-invariant measures on finite alphabets and their block laws.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shift_systems::{adjacency_power, Alphabet};

const SUM_TOL: f64 = 1e-12;
const STATIONARY_TOL: f64 = 1e-10;

/// Default cap on the number of blocks enumerated for one block law.
pub const DEFAULT_BLOCK_BUDGET: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub measure: MeasureSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureKind {
    Bernoulli {
        probs: Vec<f64>,
    },
    Markov {
        transition: Vec<Vec<f64>>,
        /// Computed for irreducible chains when left empty.
        #[serde(default)]
        stationary: Vec<f64>,
    },
    Mixture {
        components: Vec<MixtureComponent>,
    },
    /// Frequencies of cyclic windows of one sampled word.
    Empirical {
        sample: Vec<u8>,
        /// Allow use where an invariant measure is required.
        #[serde(default)]
        approximate: bool,
    },
}

/// A measure together with the embedding of its alphabet in `[0,1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    #[serde(flatten)]
    pub kind: MeasureKind,
    /// Symbol values; evenly spaced in `[0,1]` when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbols: Option<Vec<f64>>,
}

impl MeasureSpec {
    pub fn bernoulli(probs: Vec<f64>) -> Result<Self> {
        Self::from_kind(MeasureKind::Bernoulli { probs })
    }

    /// Markov chain; an empty `stationary` is solved for.
    pub fn markov(transition: Vec<Vec<f64>>, stationary: Vec<f64>) -> Result<Self> {
        Self::from_kind(MeasureKind::Markov { transition, stationary })
    }

    pub fn mixture(components: Vec<(f64, MeasureSpec)>) -> Result<Self> {
        Self::from_kind(MeasureKind::Mixture {
            components: components
                .into_iter()
                .map(|(weight, measure)| MixtureComponent { weight, measure })
                .collect(),
        })
    }

    pub fn empirical(sample: Vec<u8>, symbols: usize, approximate: bool) -> Result<Self> {
        let mut m = MeasureSpec {
            kind: MeasureKind::Empirical { sample, approximate },
            symbols: None,
        };
        m.symbols = Some(Alphabet::evenly_spaced(symbols)?.symbols().to_vec());
        m.validated()
    }

    pub fn with_alphabet(mut self, alphabet: &Alphabet) -> Result<Self> {
        self.symbols = Some(alphabet.symbols().to_vec());
        self.validated()
    }

    fn from_kind(kind: MeasureKind) -> Result<Self> {
        MeasureSpec { kind, symbols: None }.validated()
    }

    /// Checks every invariant and fills in a missing stationary vector.
    pub fn validated(mut self) -> Result<Self> {
        match &mut self.kind {
            MeasureKind::Bernoulli { probs } => check_prob(probs, "bernoulli probabilities")?,
            MeasureKind::Markov { transition, stationary } => {
                let m = transition.len();
                if m == 0 || transition.iter().any(|r| r.len() != m) {
                    return Err(Error::domain("transition matrix must be square and nonempty"));
                }
                for row in transition.iter() {
                    check_prob(row, "transition row")?;
                }
                if stationary.is_empty() {
                    *stationary = solve_stationary(transition)?;
                }
                check_prob(stationary, "stationary vector")?;
                if stationary.len() != m {
                    return Err(Error::domain("stationary vector length differs from state count"));
                }
                for j in 0..m {
                    let v: f64 = (0..m).map(|i| stationary[i] * transition[i][j]).sum();
                    if (v - stationary[j]).abs() > STATIONARY_TOL {
                        return Err(Error::domain(format!(
                            "stationary vector is not invariant at state {j} ({v} vs {})",
                            stationary[j]
                        )));
                    }
                }
            }
            MeasureKind::Mixture { components } => {
                if components.is_empty() {
                    return Err(Error::domain("mixture needs at least one component"));
                }
                if components.iter().any(|c| !(c.weight > 0.0)) {
                    return Err(Error::domain("mixture weights must be positive"));
                }
                let total: f64 = components.iter().map(|c| c.weight).sum();
                if (total - 1.0).abs() > SUM_TOL {
                    return Err(Error::domain(format!("mixture weights sum to {total}")));
                }
                let m = components[0].measure.symbol_count();
                for c in components.iter_mut() {
                    c.measure = c.measure.clone().validated()?;
                    if c.measure.symbol_count() != m {
                        return Err(Error::domain("mixture components use different alphabets"));
                    }
                }
            }
            MeasureKind::Empirical { sample, .. } => {
                if sample.is_empty() {
                    return Err(Error::domain("empirical sample is empty"));
                }
            }
        }
        let m = self.symbol_count();
        if let MeasureKind::Empirical { sample, .. } = &self.kind {
            if sample.iter().any(|&s| s as usize >= m) {
                return Err(Error::domain("empirical sample uses an unknown symbol"));
            }
        }
        if let Some(s) = &self.symbols {
            if s.len() != m {
                return Err(Error::domain("symbol values do not match the alphabet size"));
            }
            Alphabet::new(s.clone())?;
        }
        Ok(self)
    }

    /// Alphabet size.
    pub fn symbol_count(&self) -> usize {
        if let Some(s) = &self.symbols {
            return s.len();
        }
        match &self.kind {
            MeasureKind::Bernoulli { probs } => probs.len(),
            MeasureKind::Markov { transition, .. } => transition.len(),
            MeasureKind::Mixture { components } => components.first().map_or(0, |c| c.measure.symbol_count()),
            MeasureKind::Empirical { sample, .. } => sample.iter().copied().max().map_or(1, |s| s as usize + 1),
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        match &self.symbols {
            Some(s) => Alphabet::new(s.clone()).expect("validated alphabet"),
            None => Alphabet::evenly_spaced(self.symbol_count()).expect("nonempty alphabet"),
        }
    }

    /// True for measures that may be treated as shift-invariant.
    pub fn is_invariant(&self) -> bool {
        match &self.kind {
            MeasureKind::Empirical { approximate, .. } => *approximate,
            MeasureKind::Mixture { components } => components.iter().all(|c| c.measure.is_invariant()),
            _ => true,
        }
    }

    pub fn require_invariant(&self) -> Result<()> {
        if self.is_invariant() {
            Ok(())
        } else {
            Err(Error::Unsupported(
                "empirical measures are not invariant; set approximate=true to use them here".into(),
            ))
        }
    }

    /// One-symbol marginal.
    pub fn marginal(&self) -> Vec<f64> {
        match &self.kind {
            MeasureKind::Bernoulli { probs } => probs.clone(),
            MeasureKind::Markov { stationary, .. } => stationary.clone(),
            MeasureKind::Mixture { components } => {
                let mut out = vec![0.0; self.symbol_count()];
                for c in components {
                    for (o, p) in out.iter_mut().zip(c.measure.marginal()) {
                        *o += c.weight * p;
                    }
                }
                out
            }
            MeasureKind::Empirical { sample, .. } => {
                let mut out = vec![0.0; self.symbol_count()];
                for &s in sample {
                    out[s as usize] += 1.0;
                }
                out.iter_mut().for_each(|v| *v /= sample.len() as f64);
                out
            }
        }
    }
}

fn check_prob(p: &[f64], what: &str) -> Result<()> {
    if p.is_empty() {
        return Err(Error::domain(format!("{what} are empty")));
    }
    if p.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::domain(format!("{what} must be nonnegative")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > SUM_TOL {
        return Err(Error::domain(format!("{what} sum to {s}, not 1")));
    }
    Ok(())
}

/// Unique stationary vector of a chain with a single closed class.
fn solve_stationary(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    let m = p.len();
    let closed = closed_classes(p);
    if closed.len() != 1 {
        return Err(Error::domain(
            "stationary vector is not unique (several closed classes); supply it explicitly",
        ));
    }
    // Solve pi (P - I) = 0 with sum(pi) = 1 by replacing one equation.
    let mut a = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            a[(j, i)] = p[i][j] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for i in 0..m {
        a[(m - 1, i)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(m);
    b[m - 1] = 1.0;
    let pi = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::domain("stationary system is singular"))?;
    let mut pi: Vec<f64> = pi.iter().map(|v| v.max(0.0)).collect();
    let s: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|v| *v /= s);
    Ok(pi)
}

/// Closed communicating classes of the transition graph, each sorted,
/// ordered by smallest state.
pub fn closed_classes(p: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let m = p.len();
    let mut g = DiGraph::<(), ()>::new();
    let nodes: Vec<_> = (0..m).map(|_| g.add_node(())).collect();
    for i in 0..m {
        for j in 0..m {
            if p[i][j] > 0.0 {
                g.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let mut classes: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
            v.sort_unstable();
            v
        })
        .filter(|c| c.iter().all(|&i| (0..m).all(|j| p[i][j] <= 0.0 || c.contains(&j))))
        .collect();
    classes.sort();
    classes
}

/// The exact law of `n`-blocks, restricted to its support, in
/// lexicographic order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockDistribution {
    pub n: usize,
    pub support: Vec<Vec<u8>>,
    pub probs: Vec<f64>,
}

impl BlockDistribution {
    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    fn from_map(n: usize, map: BTreeMap<Vec<u8>, f64>) -> Self {
        let (support, probs) = map.into_iter().filter(|(_, p)| *p > 0.0).unzip();
        BlockDistribution { n, support, probs }
    }

    /// Law of the first `n - 1` coordinates.
    pub fn drop_last(&self) -> Self {
        let mut map = BTreeMap::new();
        for (w, p) in self.support.iter().zip(&self.probs) {
            *map.entry(w[..w.len() - 1].to_vec()).or_insert(0.0) += p;
        }
        Self::from_map(self.n - 1, map)
    }

    /// Law of the last `n - 1` coordinates.
    pub fn drop_first(&self) -> Self {
        let mut map = BTreeMap::new();
        for (w, p) in self.support.iter().zip(&self.probs) {
            *map.entry(w[1..].to_vec()).or_insert(0.0) += p;
        }
        Self::from_map(self.n - 1, map)
    }

    pub fn prob_of(&self, word: &[u8]) -> f64 {
        self.support
            .binary_search_by(|w| w.as_slice().cmp(word))
            .map_or(0.0, |k| self.probs[k])
    }

    /// Largest absolute probability difference over the union of supports.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut map: BTreeMap<&[u8], f64> = BTreeMap::new();
        for (w, p) in self.support.iter().zip(&self.probs) {
            *map.entry(w).or_insert(0.0) += p;
        }
        for (w, p) in other.support.iter().zip(&other.probs) {
            *map.entry(w).or_insert(0.0) -= p;
        }
        map.values().fold(0.0, |a, v| a.max(v.abs()))
    }
}

/// Linear representation `P(c_1..c_n) = u F_{c_1} M_{c_2} ... M_{c_n} 1` of the
/// law of cell words, where symbols are grouped into cells.
struct LinearRep {
    dim: usize,
    u: Vec<f64>,
    first: Vec<Vec<f64>>,
    step: Vec<Vec<f64>>,
}

impl LinearRep {
    fn build(mu: &MeasureSpec, cells: &[usize], k: usize) -> Result<Self> {
        match &mu.kind {
            MeasureKind::Bernoulli { probs } => {
                let mut mass = vec![0.0; k];
                for (s, &p) in probs.iter().enumerate() {
                    mass[cells[s]] += p;
                }
                let mats: Vec<Vec<f64>> = mass.into_iter().map(|v| vec![v]).collect();
                Ok(LinearRep {
                    dim: 1,
                    u: vec![1.0],
                    first: mats.clone(),
                    step: mats,
                })
            }
            MeasureKind::Markov { transition, stationary } => {
                let m = transition.len();
                let mut first = vec![vec![0.0; m * m]; k];
                let mut step = vec![vec![0.0; m * m]; k];
                for s in 0..m {
                    first[cells[s]][s * m + s] = 1.0;
                }
                for i in 0..m {
                    for j in 0..m {
                        step[cells[j]][i * m + j] = transition[i][j];
                    }
                }
                Ok(LinearRep {
                    dim: m,
                    u: stationary.clone(),
                    first,
                    step,
                })
            }
            MeasureKind::Mixture { components } => {
                let reps: Vec<(f64, LinearRep)> = components
                    .iter()
                    .map(|c| Ok((c.weight, LinearRep::build(&c.measure, cells, k)?)))
                    .collect::<Result<_>>()?;
                let dim: usize = reps.iter().map(|(_, r)| r.dim).sum();
                let mut u = Vec::with_capacity(dim);
                let mut first = vec![vec![0.0; dim * dim]; k];
                let mut step = vec![vec![0.0; dim * dim]; k];
                let mut off = 0;
                for (w, r) in &reps {
                    u.extend(r.u.iter().map(|v| v * w));
                    for c in 0..k {
                        for i in 0..r.dim {
                            for j in 0..r.dim {
                                first[c][(off + i) * dim + off + j] = r.first[c][i * r.dim + j];
                                step[c][(off + i) * dim + off + j] = r.step[c][i * r.dim + j];
                            }
                        }
                    }
                    off += r.dim;
                }
                Ok(LinearRep { dim, u, first, step })
            }
            MeasureKind::Empirical { .. } => Err(Error::Unsupported("empirical measures have no linear representation".into())),
        }
    }

    fn apply(&self, alpha: &[f64], mat: &[f64], out: &mut [f64]) {
        let d = self.dim;
        out.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..d {
            let a = alpha[i];
            if a == 0.0 {
                continue;
            }
            let row = &mat[i * d..(i + 1) * d];
            for j in 0..d {
                out[j] += a * row[j];
            }
        }
    }
}

/// Visits every cell word of length `n` with positive mass, in lexicographic
/// order, calling `f(word, mass)`.
pub fn visit_cell_blocks(
    mu: &MeasureSpec,
    cells: &[usize],
    n: usize,
    budget: usize,
    f: impl FnMut(&[usize], f64),
) -> Result<()> {
    visit_pruned(mu, cells, n, budget, |_| true, f)
}

/// Like [`visit_cell_blocks`] over symbols, but only descends into prefixes
/// for which `keep(prefix)` is true. The budget counts visited words.
pub fn visit_blocks_pruned(
    mu: &MeasureSpec,
    n: usize,
    budget: usize,
    keep: impl FnMut(&[usize]) -> bool,
    f: impl FnMut(&[usize], f64),
) -> Result<()> {
    let cells: Vec<usize> = (0..mu.symbol_count()).collect();
    visit_pruned(mu, &cells, n, budget, keep, f)
}

fn visit_pruned(
    mu: &MeasureSpec,
    cells: &[usize],
    n: usize,
    budget: usize,
    mut keep: impl FnMut(&[usize]) -> bool,
    mut f: impl FnMut(&[usize], f64),
) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("block length must be at least 1"));
    }
    let m = mu.symbol_count();
    if cells.len() != m {
        return Err(Error::domain("cell assignment does not cover the alphabet"));
    }
    let k = cells.iter().copied().max().unwrap_or(0) + 1;
    if let MeasureKind::Empirical { sample, .. } = &mu.kind {
        let len = sample.len();
        let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for start in 0..len {
            let w: Vec<usize> = (0..n).map(|t| cells[sample[(start + t) % len] as usize]).collect();
            *counts.entry(w).or_insert(0) += 1;
        }
        counts.retain(|w, _| (1..=n).all(|d| keep(&w[..d])));
        if counts.len() > budget {
            return Err(Error::resource("block support", counts.len() as u128, budget as u128));
        }
        for (w, c) in counts {
            f(&w, c as f64 / len as f64);
        }
        return Ok(());
    }
    let rep = LinearRep::build(mu, cells, k)?;
    let mut alphas = vec![vec![0.0; rep.dim]; n + 1];
    alphas[0].copy_from_slice(&rep.u);
    let mut word = vec![0usize; n];
    let mut visited = 0usize;
    // iterative DFS over cell words
    let mut choice = vec![0usize; n];
    let mut depth = 0usize;
    loop {
        if choice[depth] == k {
            if depth == 0 {
                break;
            }
            depth -= 1;
            choice[depth] += 1;
            continue;
        }
        let c = choice[depth];
        word[depth] = c;
        if !keep(&word[..=depth]) {
            choice[depth] += 1;
            continue;
        }
        let mat = if depth == 0 { &rep.first[c] } else { &rep.step[c] };
        let (head, tail) = alphas.split_at_mut(depth + 1);
        rep.apply(&head[depth], mat, &mut tail[0]);
        let mass: f64 = tail[0].iter().sum();
        if mass > 0.0 {
            if depth + 1 == n {
                visited += 1;
                if visited > budget {
                    return Err(Error::resource("block support", visited as u128, budget as u128));
                }
                f(&word, mass);
                choice[depth] += 1;
            } else {
                depth += 1;
                choice[depth] = 0;
            }
        } else {
            choice[depth] += 1;
        }
    }
    Ok(())
}

/// Mass of the cylinder set fixing `word` on consecutive coordinates.
pub fn cylinder_mass(mu: &MeasureSpec, word: &[u8]) -> Result<f64> {
    let m = mu.symbol_count();
    if word.is_empty() {
        return Ok(1.0);
    }
    if word.iter().any(|&s| s as usize >= m) {
        return Err(Error::domain("word uses a symbol outside the alphabet"));
    }
    if let MeasureKind::Empirical { sample, .. } = &mu.kind {
        let len = sample.len();
        let hits = (0..len)
            .filter(|&st| word.iter().enumerate().all(|(t, &s)| sample[(st + t) % len] == s))
            .count();
        return Ok(hits as f64 / len as f64);
    }
    let cells: Vec<usize> = (0..m).collect();
    let rep = LinearRep::build(mu, &cells, m)?;
    let mut alpha = rep.u.clone();
    let mut next = vec![0.0; rep.dim];
    for (t, &s) in word.iter().enumerate() {
        let mat = if t == 0 { &rep.first[s as usize] } else { &rep.step[s as usize] };
        rep.apply(&alpha, mat, &mut next);
        std::mem::swap(&mut alpha, &mut next);
    }
    Ok(alpha.iter().sum())
}

/// Exact law of `n`-blocks of symbols.
pub fn block_distribution(mu: &MeasureSpec, n: usize, budget: usize) -> Result<BlockDistribution> {
    let cells: Vec<usize> = (0..mu.symbol_count()).collect();
    let mut support = Vec::new();
    let mut probs = Vec::new();
    visit_cell_blocks(mu, &cells, n, budget, |w, p| {
        support.push(w.iter().map(|&s| s as u8).collect());
        probs.push(p);
    })?;
    Ok(BlockDistribution { n, support, probs })
}

/// Ergodic components with their weights.
///
/// Markov chains split into closed communicating classes (each restricted
/// chain keeps the full alphabet; states outside the class get self-loops and
/// zero stationary mass). Mixtures are flattened recursively.
pub fn ergodic_components(mu: &MeasureSpec) -> Result<Vec<(f64, MeasureSpec)>> {
    match &mu.kind {
        MeasureKind::Bernoulli { .. } => Ok(vec![(1.0, mu.clone())]),
        MeasureKind::Markov { transition, stationary } => {
            let m = transition.len();
            let classes = closed_classes(transition);
            let transient: f64 = (0..m)
                .filter(|i| !classes.iter().any(|c| c.contains(i)))
                .map(|i| stationary[i])
                .sum();
            if transient > STATIONARY_TOL {
                return Err(Error::Invariant("stationary vector charges transient states".into()));
            }
            let mut out = Vec::new();
            for class in classes {
                let weight: f64 = class.iter().map(|&i| stationary[i]).sum();
                if weight <= STATIONARY_TOL {
                    continue;
                }
                let mut t = vec![vec![0.0; m]; m];
                let mut pi = vec![0.0; m];
                for i in 0..m {
                    if class.contains(&i) {
                        t[i] = transition[i].clone();
                        pi[i] = stationary[i] / weight;
                    } else {
                        t[i][i] = 1.0;
                    }
                }
                let comp = MeasureSpec {
                    kind: MeasureKind::Markov {
                        transition: t,
                        stationary: pi,
                    },
                    symbols: mu.symbols.clone(),
                };
                out.push((weight, comp.validated()?));
            }
            Ok(out)
        }
        MeasureKind::Mixture { components } => {
            let mut out = Vec::new();
            for c in components {
                let mut inner = c.measure.clone();
                if inner.symbols.is_none() {
                    inner.symbols = mu.symbols.clone();
                }
                for (w, e) in ergodic_components(&inner)? {
                    out.push((c.weight * w, e));
                }
            }
            Ok(out)
        }
        MeasureKind::Empirical { .. } => Err(Error::Unsupported("ergodic decomposition of an empirical measure".into())),
    }
}

pub fn is_ergodic(mu: &MeasureSpec) -> Result<bool> {
    let comps = ergodic_components(mu)?;
    Ok(comps.len() == 1 || comps.windows(2).all(|w| w[0].1 == w[1].1))
}

/// Parry (maximal entropy) Markov measure of an irreducible 0/1 adjacency.
pub fn parry(adjacency: &[Vec<u8>]) -> Result<MeasureSpec> {
    let m = adjacency.len();
    if m == 0 || adjacency.iter().any(|r| r.len() != m) {
        return Err(Error::domain("adjacency must be square and nonempty"));
    }
    let reach = adjacency_power(
        &adjacency
            .iter()
            .enumerate()
            .map(|(i, r)| r.iter().enumerate().map(|(j, &v)| (v > 0 || i == j) as u8).collect())
            .collect::<Vec<Vec<u8>>>(),
        m,
    );
    if reach.iter().flatten().any(|&v| v == 0) {
        return Err(Error::domain("Parry measure needs an irreducible adjacency"));
    }
    let a: Vec<Vec<f64>> = adjacency.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
    let right = perron_vector(&a, false);
    let left = perron_vector(&a, true);
    let lambda = (0..m).map(|j| a[0][j] * right[j]).sum::<f64>() / right[0];
    let transition: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut row: Vec<f64> = (0..m).map(|j| a[i][j] * right[j] / (lambda * right[i])).collect();
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= s);
            row
        })
        .collect();
    let mut pi: Vec<f64> = (0..m).map(|i| left[i] * right[i]).collect();
    let s: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|v| *v /= s);
    MeasureSpec::markov(transition, pi)
}

/// Perron vector by power iteration on `A + I` (aperiodic, same eigenvectors).
fn perron_vector(a: &[Vec<f64>], left: bool) -> Vec<f64> {
    let m = a.len();
    let mut v = vec![1.0 / m as f64; m];
    for _ in 0..100_000 {
        let mut w: Vec<f64> = (0..m)
            .map(|i| {
                v[i] + (0..m)
                    .map(|j| if left { a[j][i] * v[j] } else { a[i][j] * v[j] })
                    .sum::<f64>()
            })
            .collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
        let diff = w.iter().zip(&v).fold(0.0f64, |d, (x, y)| d.max((x - y).abs()));
        v = w;
        if diff < 1e-16 {
            break;
        }
    }
    v
}

/// Entropy rate `-Σ π_i P_ij log P_ij` of a Markov measure, or `-Σ p log p`
/// for Bernoulli; `None` for other kinds.
pub fn closed_form_entropy_rate(mu: &MeasureSpec) -> Option<f64> {
    match &mu.kind {
        MeasureKind::Bernoulli { probs } => Some(probs.iter().map(|&p| crate::stats::xlogx_neg(p)).sum()),
        MeasureKind::Markov { transition, stationary } => Some(
            stationary
                .iter()
                .zip(transition)
                .map(|(pi, row)| pi * row.iter().map(|&p| crate::stats::xlogx_neg(p)).sum::<f64>())
                .sum(),
        ),
        _ => None,
    }
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Deterministic orbit sample of length `len` (stream 0).
pub fn sample_orbit(mu: &MeasureSpec, len: usize, seed: u64) -> Result<Vec<u8>> {
    sample_orbit_stream(mu, len, seed, 0)
}

/// Deterministic orbit sample on an explicit generator stream.
pub fn sample_orbit_stream(mu: &MeasureSpec, len: usize, seed: u64, stream: u64) -> Result<Vec<u8>> {
    let mut r = rng(seed, stream);
    sample_with(mu, len, None, &mut r)
}

/// Orbit sample of a Markov chain from a fixed initial state.
pub fn sample_orbit_from(mu: &MeasureSpec, len: usize, initial: usize, seed: u64) -> Result<Vec<u8>> {
    let mut r = rng(seed, 0);
    sample_with(mu, len, Some(initial), &mut r)
}

fn categorical(p: &[f64]) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(p).map_err(|e| Error::domain(format!("bad sampling weights: {e}")))
}

fn sample_with(mu: &MeasureSpec, len: usize, initial: Option<usize>, r: &mut ChaCha8Rng) -> Result<Vec<u8>> {
    match &mu.kind {
        MeasureKind::Bernoulli { probs } => {
            let d = categorical(probs)?;
            Ok((0..len).map(|_| d.sample(r) as u8).collect())
        }
        MeasureKind::Markov { transition, stationary } => {
            let rows: Vec<WeightedIndex<f64>> = transition.iter().map(|row| categorical(row)).collect::<Result<_>>()?;
            let mut out = Vec::with_capacity(len);
            if len == 0 {
                return Ok(out);
            }
            let mut s = match initial {
                Some(i) if i < transition.len() => i,
                Some(i) => return Err(Error::domain(format!("initial state {i} out of range"))),
                None => categorical(stationary)?.sample(r),
            };
            out.push(s as u8);
            for _ in 1..len {
                s = rows[s].sample(r);
                out.push(s as u8);
            }
            Ok(out)
        }
        MeasureKind::Mixture { components } => {
            let w: Vec<f64> = components.iter().map(|c| c.weight).collect();
            let k = categorical(&w)?.sample(r);
            sample_with(&components[k].measure, len, initial, r)
        }
        MeasureKind::Empirical { sample, .. } => {
            let start = r.random_range(0..sample.len());
            Ok((0..len).map(|t| sample[(start + t) % sample.len()]).collect())
        }
    }
}
