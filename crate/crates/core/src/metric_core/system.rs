use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::xor::{XorView, MAX_XOR_BITS};
use crate::error::{Error, Result};
use crate::par;

/// Tolerance for metric-axiom checks on floating-point tables.
const AXIOM_TOL: f64 = 1e-12;
/// Full triangle check up to this many points, sampled above.
const FULL_TRIANGLE_CHECK: usize = 200;
const SAMPLED_TRIANGLES: usize = 20_000;
/// Binary word spaces up to this length get an XOR lookup table.
const MAX_TABLE_BITS: usize = 22;

/// Anything that can report pairwise distances between `0..size()`.
pub trait Metric: Sync {
    fn size(&self) -> usize;
    fn dist(&self, i: usize, j: usize) -> f64;

    /// XOR-table form of the distance, when the metric has one.
    fn xor_view(&self) -> Option<XorView<'_>> {
        None
    }

    /// Maximum pairwise distance (exhaustive).
    fn diameter(&self) -> f64 {
        let p = self.size();
        if let Some(v) = self.xor_view() {
            return v.set_diameter(&(0..p).collect::<Vec<_>>());
        }
        par::max_range(p, |i| {
            (i + 1..p).map(|j| self.dist(i, j)).fold(0.0, f64::max)
        })
        .max(0.0)
    }

    /// Diameter of a subset of points (exhaustive).
    fn set_diameter(&self, set: &[usize]) -> f64 {
        if let Some(v) = self.xor_view() {
            return v.set_diameter(set);
        }
        par::max_range(set.len(), |a| {
            set[a + 1..]
                .iter()
                .map(|&j| self.dist(set[a], j))
                .fold(0.0, f64::max)
        })
        .max(0.0)
    }
}

/// A plain dense distance table (row-major `n × n`).
#[derive(Debug, Clone)]
pub struct DistTable {
    n: usize,
    d: Vec<f64>,
}

impl DistTable {
    pub fn new(n: usize, d: Vec<f64>) -> Result<Self> {
        if d.len() != n * n {
            return Err(Error::domain(format!(
                "distance table has {} entries, expected {}",
                d.len(),
                n * n
            )));
        }
        Ok(DistTable { n, d })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                d[i * n + j] = f(i, j);
            }
        }
        DistTable { n, d }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.d
    }
}

impl Metric for DistTable {
    fn size(&self) -> usize {
        self.n
    }
    #[inline]
    fn dist(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }
}

/// Words over a finite alphabet embedded in `[0,1]`, with the truncated
/// two-sided product metric `Σ_j d(x_j, y_j) / 2^{|j - origin|}`.
///
/// Position `j` of a stored word is coordinate `j - origin`.
#[derive(Debug, Clone)]
pub struct WordSpace {
    len: usize,
    origin: usize,
    symbols: Vec<f64>,
    words: Vec<u8>,
    weights: Vec<f64>,
    binary: Option<BinaryTable>,
}

#[derive(Debug, Clone)]
struct BinaryTable {
    bits: Vec<u32>,
    table: Vec<f64>,
}

impl WordSpace {
    /// `words` is a flat buffer of `count * len` symbol indices.
    pub fn new(len: usize, origin: usize, symbols: Vec<f64>, words: Vec<u8>) -> Result<Self> {
        if len == 0 || !words.len().is_multiple_of(len) {
            return Err(Error::domain("word buffer is not a multiple of the word length"));
        }
        if origin >= len {
            return Err(Error::domain("origin coordinate outside the window"));
        }
        if words.iter().any(|&s| s as usize >= symbols.len()) {
            return Err(Error::domain("word uses a symbol outside the alphabet"));
        }
        let weights: Vec<f64> = (0..len)
            .map(|j| 0.5f64.powi((j as i64 - origin as i64).unsigned_abs() as i32))
            .collect();
        let binary = if symbols.len() == 2 && len <= MAX_TABLE_BITS {
            let gap = (symbols[1] - symbols[0]).abs();
            let bits = words
                .chunks(len)
                .map(|w| {
                    w.iter()
                        .enumerate()
                        .fold(0u32, |acc, (j, &s)| acc | ((s as u32) << j))
                })
                .collect();
            let table = (0..1usize << len)
                .map(|z| {
                    let mut acc = 0.0;
                    for (j, w) in weights.iter().enumerate() {
                        if z >> j & 1 == 1 {
                            acc += w * gap;
                        }
                    }
                    acc
                })
                .collect();
            Some(BinaryTable { bits, table })
        } else {
            None
        };
        Ok(WordSpace {
            len,
            origin,
            symbols,
            words,
            weights,
            binary,
        })
    }

    pub fn word_len(&self) -> usize {
        self.len
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn count(&self) -> usize {
        self.words.len() / self.len
    }

    pub fn word(&self, i: usize) -> &[u8] {
        &self.words[i * self.len..(i + 1) * self.len]
    }

    pub fn symbols(&self) -> &[f64] {
        &self.symbols
    }

    pub(crate) fn xor_view(&self) -> Option<XorView<'_>> {
        self.binary.as_ref().filter(|_| self.len <= MAX_XOR_BITS).map(|b| XorView {
            bits: self.len,
            codes: &b.bits,
            table: &b.table,
        })
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        if let Some(b) = &self.binary {
            return b.table[(b.bits[i] ^ b.bits[j]) as usize];
        }
        let (x, y) = (self.word(i), self.word(j));
        let mut acc = 0.0;
        for k in 0..self.len {
            acc += self.weights[k] * (self.symbols[x[k] as usize] - self.symbols[y[k] as usize]).abs();
        }
        acc
    }
}

/// Storage behind a [`FiniteMetricSystem`].
#[derive(Debug, Clone)]
pub enum MetricData {
    Table(DistTable),
    /// Points on the real line with `|x - y|`.
    Line(Vec<f64>),
    Words(WordSpace),
}

impl MetricData {
    fn size(&self) -> usize {
        match self {
            MetricData::Table(t) => t.n,
            MetricData::Line(v) => v.len(),
            MetricData::Words(w) => w.count(),
        }
    }
}

/// A finite metric space with a bijective dynamics map.
#[derive(Debug, Clone)]
pub struct FiniteMetricSystem {
    data: MetricData,
    dynamics: Vec<usize>,
    diam: OnceLock<f64>,
    label: String,
}

impl FiniteMetricSystem {
    /// Build from any backing. Dense tables are checked for the metric
    /// axioms; line and word backings are metrics by construction.
    pub fn new(data: MetricData, dynamics: Vec<usize>, label: impl Into<String>) -> Result<Self> {
        let p = data.size();
        if p == 0 {
            return Err(Error::domain("empty point set"));
        }
        if dynamics.len() != p {
            return Err(Error::domain("dynamics length differs from point count"));
        }
        let mut seen = vec![false; p];
        for &t in &dynamics {
            if t >= p || seen[t] {
                return Err(Error::domain("dynamics is not a bijection"));
            }
            seen[t] = true;
        }
        if let MetricData::Table(t) = &data {
            check_axioms(t)?;
        }
        Ok(FiniteMetricSystem {
            data,
            dynamics,
            diam: OnceLock::new(),
            label: label.into(),
        })
    }

    pub fn from_table(table: DistTable, dynamics: Vec<usize>, label: impl Into<String>) -> Result<Self> {
        Self::new(MetricData::Table(table), dynamics, label)
    }

    /// Static system (identity dynamics) on a distance table.
    pub fn static_table(table: DistTable, label: impl Into<String>) -> Result<Self> {
        let n = table.n;
        Self::new(MetricData::Table(table), (0..n).collect(), label)
    }

    pub fn line(points: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        let n = points.len();
        Self::new(MetricData::Line(points), (0..n).collect(), label)
    }

    pub fn points(&self) -> usize {
        self.dynamics.len()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn data(&self) -> &MetricData {
        &self.data
    }

    pub fn words(&self) -> Option<&WordSpace> {
        match &self.data {
            MetricData::Words(w) => Some(w),
            _ => None,
        }
    }

    #[inline]
    pub fn map(&self, i: usize) -> usize {
        self.dynamics[i]
    }

    pub fn dynamics(&self) -> &[usize] {
        &self.dynamics
    }

    /// Cached maximum pairwise distance.
    pub fn diam(&self) -> f64 {
        *self.diam.get_or_init(|| Metric::diameter(self))
    }

    /// Table of iterates: `orbits[k][i] = T^k(i)` for `k < n`.
    pub fn orbit_table(&self, n: usize) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::with_capacity(n);
        if n == 0 {
            return out;
        }
        out.push((0..self.points()).collect());
        for k in 1..n {
            let next = out[k - 1].iter().map(|&i| self.dynamics[i]).collect();
            out.push(next);
        }
        out
    }

    /// Whether `T` preserves every distance.
    pub fn is_isometry(&self) -> bool {
        let p = self.points();
        par::all_range(p, |i| {
            (0..p).all(|j| (self.dist(i, j) - self.dist(self.map(i), self.map(j))).abs() <= AXIOM_TOL)
        })
    }

    pub fn bowen(&self, n: usize) -> Result<BowenMetric<'_>> {
        BowenMetric::new(self, n)
    }
}

impl Metric for FiniteMetricSystem {
    fn size(&self) -> usize {
        self.points()
    }

    fn xor_view(&self) -> Option<XorView<'_>> {
        match &self.data {
            MetricData::Words(w) => w.xor_view(),
            _ => None,
        }
    }

    #[inline]
    fn dist(&self, i: usize, j: usize) -> f64 {
        match &self.data {
            MetricData::Table(t) => t.dist(i, j),
            MetricData::Line(v) => (v[i] - v[j]).abs(),
            MetricData::Words(w) => w.dist(i, j),
        }
    }
}

fn check_axioms(t: &DistTable) -> Result<()> {
    let n = t.n;
    for i in 0..n {
        if t.dist(i, i) != 0.0 {
            return Err(Error::domain(format!("dist[{i}][{i}] != 0")));
        }
        for j in 0..n {
            let d = t.dist(i, j);
            if !(d >= 0.0) || !d.is_finite() {
                return Err(Error::domain(format!("dist[{i}][{j}] is not a nonnegative real")));
            }
            if (d - t.dist(j, i)).abs() > AXIOM_TOL {
                return Err(Error::domain(format!("dist is not symmetric at ({i},{j})")));
            }
        }
    }
    let violates = |i: usize, j: usize, k: usize| t.dist(i, k) > t.dist(i, j) + t.dist(j, k) + AXIOM_TOL;
    if n <= FULL_TRIANGLE_CHECK {
        let ok = par::all_range(n, |i| (0..n).all(|j| (0..n).all(|k| !violates(i, j, k))));
        if !ok {
            return Err(Error::domain("triangle inequality violated"));
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x7121);
        for _ in 0..SAMPLED_TRIANGLES {
            let (i, j, k) = (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n));
            if violates(i, j, k) {
                return Err(Error::domain(format!("triangle inequality violated at ({i},{j},{k})")));
            }
        }
    }
    Ok(())
}

/// The Bowen metric `ρ_n(x, y) = max_{0 ≤ k < n} ρ(T^k x, T^k y)`.
pub struct BowenMetric<'a> {
    sys: &'a FiniteMetricSystem,
    orbits: Vec<Vec<usize>>,
    /// `max_k table[rot^k z]` when `T` rotates binary codes.
    xor_table: Option<Vec<f64>>,
}

impl<'a> BowenMetric<'a> {
    pub fn new(sys: &'a FiniteMetricSystem, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("Bowen metric needs n >= 1"));
        }
        Ok(BowenMetric {
            sys,
            orbits: sys.orbit_table(n),
            xor_table: rotated_table(sys, n),
        })
    }

    pub fn steps(&self) -> usize {
        self.orbits.len()
    }

    pub fn system(&self) -> &FiniteMetricSystem {
        self.sys
    }
}

fn rotated_table(sys: &FiniteMetricSystem, n: usize) -> Option<Vec<f64>> {
    let v = sys.xor_view()?;
    let rot = |c: u32| (c >> 1) | ((c & 1) << (v.bits - 1));
    if (0..sys.points()).any(|i| v.codes[sys.map(i)] != rot(v.codes[i])) {
        return None;
    }
    Some(
        (0..v.table.len() as u32)
            .map(|z| {
                let mut c = z;
                let mut best = 0.0f64;
                for _ in 0..n {
                    best = best.max(v.table[c as usize]);
                    c = rot(c);
                }
                best
            })
            .collect(),
    )
}

impl Metric for BowenMetric<'_> {
    fn size(&self) -> usize {
        self.sys.points()
    }

    fn xor_view(&self) -> Option<XorView<'_>> {
        let base = self.sys.xor_view()?;
        self.xor_table.as_ref().map(|t| XorView { table: t, ..base })
    }

    #[inline]
    fn dist(&self, i: usize, j: usize) -> f64 {
        let mut best = 0.0f64;
        for orbit in &self.orbits {
            best = best.max(self.sys.dist(orbit[i], orbit[j]));
        }
        best
    }
}

/// `ρ_n(i, j)` computed by direct iteration of the dynamics.
pub fn bowen_distance(sys: &FiniteMetricSystem, i: usize, j: usize, n: usize) -> Result<f64> {
    let p = sys.points();
    if i >= p || j >= p {
        return Err(Error::domain(format!("point index out of range (have {p} points)")));
    }
    if n == 0 {
        return Err(Error::domain("Bowen metric needs n >= 1"));
    }
    let (mut a, mut b) = (i, j);
    let mut best = 0.0f64;
    for _ in 0..n {
        best = best.max(sys.dist(a, b));
        a = sys.map(a);
        b = sys.map(b);
    }
    Ok(best)
}
