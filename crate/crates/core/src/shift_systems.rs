//! Windowed full shifts, subshifts of finite type and rational rotations.
//!
//! A window system with horizon `n_max` and window `W` stores words on the
//! coordinates `[-W, n_max + W)`. The shift acts by cyclic rotation of the
//! stored word so that the dynamics stays a bijection; for subshifts only
//! words whose wrap-around transition is admissible are kept.

use std::collections::HashMap;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric_core::{
    growth_from_counts, DistTable, FiniteMetricSystem, GrowthPoint, GrowthSeries, MetricData, RateMethod, WordSpace,
};

/// Largest word count enumerated by default.
pub const DEFAULT_WORD_BUDGET: usize = 1 << 17;

/// Symbols embedded in `[0,1]` with the absolute-difference metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alphabet {
    symbols: Vec<f64>,
}

impl Alphabet {
    pub fn new(symbols: Vec<f64>) -> Result<Self> {
        if symbols.is_empty() || symbols.len() > 256 {
            return Err(Error::domain("alphabet needs between 1 and 256 symbols"));
        }
        if symbols.iter().any(|s| !(0.0..=1.0).contains(s)) {
            return Err(Error::domain("symbols must lie in [0,1]"));
        }
        if symbols.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("symbols must be strictly increasing"));
        }
        Ok(Alphabet { symbols })
    }

    /// `m` symbols evenly spaced in `[0,1]` (`{0}` when `m == 1`).
    pub fn evenly_spaced(m: usize) -> Result<Self> {
        match m {
            0 => Err(Error::domain("alphabet needs at least one symbol")),
            1 => Self::new(vec![0.0]),
            _ => Self::new((0..m).map(|k| k as f64 / (m - 1) as f64).collect()),
        }
    }

    pub fn symbols(&self) -> &[f64] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Minimum gap between adjacent symbols (`+inf` for one symbol).
    pub fn gap(&self) -> f64 {
        self.symbols
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn diameter(&self) -> f64 {
        self.symbols[self.symbols.len() - 1] - self.symbols[0]
    }

    /// Size of the largest symbol subset with pairwise distances `> eps`.
    pub fn separated_count(&self, eps: f64) -> usize {
        let mut count = 1;
        let mut last = self.symbols[0];
        for &s in &self.symbols[1..] {
            if s - last > eps {
                count += 1;
                last = s;
            }
        }
        count
    }

    /// Fewest groups of consecutive symbols, each of diameter `<= width`.
    pub fn group_count(&self, width: f64) -> usize {
        let mut count = 1;
        let mut start = self.symbols[0];
        for &s in &self.symbols[1..] {
            if s - start > width {
                count += 1;
                start = s;
            }
        }
        count
    }

    /// Distinct diameters achievable by a run of consecutive symbols.
    fn run_widths(&self) -> Vec<f64> {
        let m = self.symbols.len();
        let mut w: Vec<f64> = (0..m).flat_map(|a| (a..m).map(move |b| (a, b))).map(|(a, b)| self.symbols[b] - self.symbols[a]).collect();
        w.sort_by(|a, b| a.total_cmp(b));
        w.dedup();
        w
    }
}

/// Truncated product metric `Σ_j |x_j - y_j| / 2^{|j - origin|}` on two value
/// sequences over the same coordinate range.
pub fn product_distance(x: &[f64], y: &[f64], origin: usize) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::domain("words are defined on different coordinate ranges"));
    }
    if origin >= x.len() {
        return Err(Error::domain("origin outside the coordinate range"));
    }
    Ok(x.iter()
        .zip(y)
        .enumerate()
        .map(|(j, (a, b))| (a - b).abs() * 0.5f64.powi(j.abs_diff(origin) as i32))
        .sum())
}

/// Error bound for truncating the product metric to `[-W, ...)` on the left
/// and at least `W` coordinates on the right: `diam(A) · 2^{1-W}`.
pub fn tail_bound(alphabet: &Alphabet, window: usize) -> f64 {
    alphabet.diameter() * 2f64.powi(1 - window as i32)
}

/// Smallest window whose tail bound is at most `target`.
pub fn window_for_tail(alphabet: &Alphabet, target: f64) -> usize {
    let mut w = 0;
    while tail_bound(alphabet, w) > target && w < 64 {
        w += 1;
    }
    w
}

/// Descriptor of a windowed shift system, usable without enumerating it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShiftWindowSystem {
    pub alphabet: Alphabet,
    pub window: usize,
    pub horizon: usize,
    /// 0/1 transition matrix for a subshift of finite type.
    pub adjacency: Option<Vec<Vec<u8>>>,
}

impl ShiftWindowSystem {
    pub fn full(alphabet: Alphabet, window: usize, horizon: usize) -> Self {
        ShiftWindowSystem {
            alphabet,
            window,
            horizon,
            adjacency: None,
        }
    }

    pub fn sft(adjacency: Vec<Vec<u8>>, alphabet: Alphabet, window: usize, horizon: usize) -> Result<Self> {
        check_adjacency(&adjacency, alphabet.len())?;
        Ok(ShiftWindowSystem {
            alphabet,
            window,
            horizon,
            adjacency: Some(adjacency),
        })
    }

    pub fn word_len(&self) -> usize {
        self.horizon + 2 * self.window
    }

    pub fn tail_bound(&self) -> f64 {
        tail_bound(&self.alphabet, self.window)
    }

    fn adjacency_or_full(&self) -> Vec<Vec<u8>> {
        self.adjacency
            .clone()
            .unwrap_or_else(|| vec![vec![1; self.alphabet.len()]; self.alphabet.len()])
    }

    /// Number of stored words (cyclically admissible words of the full length).
    pub fn point_count(&self) -> u128 {
        cyclic_word_count(&self.adjacency_or_full(), self.word_len())
    }

    /// Enumerates every point into a [`FiniteMetricSystem`].
    pub fn build(&self, budget: usize) -> Result<FiniteMetricSystem> {
        let len = self.word_len();
        if len == 0 {
            return Err(Error::domain("window system has no coordinates"));
        }
        let adj = self.adjacency_or_full();
        let required = self.point_count();
        if required == 0 {
            return Err(Error::domain("subshift has no cyclically admissible words of this length"));
        }
        if required > budget as u128 {
            return Err(Error::resource("window system words", required, budget as u128));
        }
        let m = self.alphabet.len();
        if (m as f64).powi(len as i32) >= u64::MAX as f64 {
            return Err(Error::resource("word code space", u128::MAX, u64::MAX as u128));
        }
        let words = enumerate_cyclic_words(&adj, len);
        let count = words.len() / len;
        let code = |w: &[u8]| w.iter().fold(0u64, |acc, &s| acc * m as u64 + s as u64);
        let index: HashMap<u64, usize> = words.chunks(len).enumerate().map(|(i, w)| (code(w), i)).collect();
        let mut rotated = vec![0u8; len];
        let dynamics: Vec<usize> = words
            .chunks(len)
            .map(|w| {
                rotated[..len - 1].copy_from_slice(&w[1..]);
                rotated[len - 1] = w[0];
                index[&code(&rotated)]
            })
            .collect();
        debug_assert_eq!(dynamics.len(), count);
        let label = match &self.adjacency {
            None => format!("full_shift(m={m}, W={}, n_max={})", self.window, self.horizon),
            Some(_) => format!("sft(m={m}, W={}, n_max={})", self.window, self.horizon),
        };
        let space = WordSpace::new(len, self.window, self.alphabet.symbols().to_vec(), words)?;
        FiniteMetricSystem::new(MetricData::Words(space), dynamics, label)
    }

    /// Weight of stored position `a` after `s` shifts.
    fn weight(&self, a: usize, s: usize) -> f64 {
        let len = self.word_len();
        let pos = (a + len - s % len) % len;
        0.5f64.powi(pos.abs_diff(self.window) as i32)
    }

    /// Sound bracket on `#(X, ρ_n, ε)` without enumeration.
    ///
    /// Lower: product packing on the visible coordinates `[0, n)`. Upper: the
    /// smaller of two product covers, one that keeps the visible coordinates
    /// as singletons and one that may group them; tail coordinates are grouped
    /// greedily while the wrap-aware diameter stays `<= ε`.
    pub fn covering_bracket(&self, n: usize, eps: f64) -> Result<(u128, u128)> {
        if !(eps > 0.0) {
            return Err(Error::domain(format!("eps must be positive, got {eps}")));
        }
        if n == 0 || n > self.horizon {
            return Err(Error::domain(format!("n must be in 1..={}", self.horizon)));
        }
        let adj = self.adjacency_or_full();
        let len = self.word_len();
        let interior: Vec<usize> = (self.window..self.window + n).collect();
        let visible_words = match &self.adjacency {
            None => (self.alphabet.len() as u128).saturating_pow(n as u32),
            Some(_) => extendable_word_count(&adj, n, len),
        };
        let lower = if self.alphabet.gap() > eps {
            visible_words
        } else if self.adjacency.is_none() {
            (self.alphabet.separated_count(eps) as u128).saturating_pow(n as u32)
        } else {
            1
        };
        let widths = self.alphabet.run_widths();
        let mut best = u128::MAX;
        for group_interior in [false, true] {
            let frozen: Vec<bool> = (0..len).map(|a| !group_interior && interior.contains(&a)).collect();
            let groups = self.greedy_grouping(n, eps, &widths, &frozen);
            let mut count: u128 = if group_interior { 1 } else { visible_words };
            for (a, &w) in groups.iter().enumerate() {
                if !frozen[a] {
                    count = count.saturating_mul(self.alphabet.group_count(w) as u128);
                }
            }
            best = best.min(count);
        }
        if lower > best {
            return Err(Error::Invariant(format!("bracket inverted: {lower} > {best}")));
        }
        Ok((lower, best))
    }

    /// Greedy coarsening of per-coordinate group widths under the constraint
    /// `max_{s<n} Σ_a w_a · weight(a, s) <= ε`.
    fn greedy_grouping(&self, n: usize, eps: f64, widths: &[f64], frozen: &[bool]) -> Vec<f64> {
        let len = self.word_len();
        let weights: Vec<Vec<f64>> = (0..n).map(|s| (0..len).map(|a| self.weight(a, s)).collect()).collect();
        let mut level = vec![0usize; len];
        let mut load = vec![0.0f64; n];
        let cost = |k: usize| (self.alphabet.group_count(widths[k]) as f64).ln();
        loop {
            let mut pick: Option<(usize, usize, f64)> = None;
            for a in 0..len {
                if frozen[a] {
                    continue;
                }
                let cur = level[a];
                for next in cur + 1..widths.len() {
                    let gain = cost(cur) - cost(next);
                    if gain <= 0.0 {
                        continue;
                    }
                    let dw = widths[next] - widths[cur];
                    let feasible = (0..n).all(|s| load[s] + dw * weights[s][a] <= eps);
                    if !feasible {
                        break;
                    }
                    let used = (0..n).map(|s| dw * weights[s][a]).fold(0.0, f64::max);
                    let score = gain / used.max(1e-300);
                    if pick.is_none_or(|(_, _, best)| score > best) {
                        pick = Some((a, next, score));
                    }
                }
            }
            match pick {
                Some((a, next, _)) => {
                    let dw = widths[next] - widths[level[a]];
                    for s in 0..n {
                        load[s] += dw * weights[s][a];
                    }
                    level[a] = next;
                }
                None => break,
            }
        }
        level.iter().map(|&k| widths[k]).collect()
    }

    /// `S(ε)` of the two-sided subshift for `ε` below the alphabet gap:
    /// distinct words on `[0, n)` are ε-separated, and the coordinates that
    /// must be resolved outside `[0, n)` add only a constant factor, so the
    /// rate is `log λ(A)`. `None` at or above the gap.
    pub fn structural_rate(&self, eps: f64) -> Option<f64> {
        (eps < self.alphabet.gap()).then(|| spectral_radius(&self.adjacency_or_full()).ln())
    }

    /// Growth series from structural brackets.
    pub fn growth(&self, eps: f64, n_range: RangeInclusive<usize>, method: RateMethod) -> Result<GrowthSeries> {
        if n_range.is_empty() || *n_range.start() == 0 {
            return Err(Error::domain("n range must be nonempty and start at 1 or above"));
        }
        let mut per_n = Vec::new();
        for n in n_range {
            let (lo, hi) = self.covering_bracket(n, eps)?;
            per_n.push(GrowthPoint {
                n,
                log_lower: (lo as f64).ln(),
                log_upper: (hi as f64).ln(),
                exact: lo == hi,
            });
        }
        growth_from_counts(eps, per_n, method)
    }
}

fn check_adjacency(adj: &[Vec<u8>], m: usize) -> Result<()> {
    if adj.len() != m || adj.iter().any(|r| r.len() != m) {
        return Err(Error::domain(format!("adjacency must be {m}x{m}")));
    }
    if adj.iter().flatten().any(|&v| v > 1) {
        return Err(Error::domain("adjacency entries must be 0 or 1"));
    }
    Ok(())
}

fn mat_mul(a: &[Vec<u128>], b: &[Vec<u128>]) -> Vec<Vec<u128>> {
    let m = a.len();
    let mut c = vec![vec![0u128; m]; m];
    for i in 0..m {
        for k in 0..m {
            if a[i][k] == 0 {
                continue;
            }
            for j in 0..m {
                c[i][j] = c[i][j].saturating_add(a[i][k].saturating_mul(b[k][j]));
            }
        }
    }
    c
}

/// Perron root of a 0/1 matrix, by power iteration on `A + I`.
pub fn spectral_radius(adj: &[Vec<u8>]) -> f64 {
    let m = adj.len();
    let mut v = vec![1.0 / m as f64; m];
    let mut lambda = 0.0;
    for _ in 0..100_000 {
        let w: Vec<f64> = (0..m)
            .map(|i| v[i] + (0..m).map(|j| adj[i][j] as f64 * v[j]).sum::<f64>())
            .collect();
        let s: f64 = w.iter().sum();
        let next = s - 1.0;
        let w: Vec<f64> = w.into_iter().map(|x| x / s).collect();
        let diff = w.iter().zip(&v).fold(0.0f64, |d, (x, y)| d.max((x - y).abs()));
        v = w;
        lambda = next;
        if diff < 1e-16 {
            break;
        }
    }
    lambda
}

/// `A^k` with saturating integer arithmetic.
pub fn adjacency_power(adj: &[Vec<u8>], k: usize) -> Vec<Vec<u128>> {
    let m = adj.len();
    let mut result: Vec<Vec<u128>> = (0..m).map(|i| (0..m).map(|j| (i == j) as u128).collect()).collect();
    let mut base: Vec<Vec<u128>> = adj.iter().map(|r| r.iter().map(|&v| v as u128).collect()).collect();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            result = mat_mul(&result, &base);
        }
        base = mat_mul(&base, &base);
        e >>= 1;
    }
    result
}

/// Number of admissible words of length `len` (sum of the entries of `A^{len-1}`).
pub fn admissible_word_count(adj: &[Vec<u8>], len: usize) -> u128 {
    if len == 0 {
        return 1;
    }
    adjacency_power(adj, len - 1).iter().flatten().fold(0u128, |a, &v| a.saturating_add(v))
}

/// Number of words of length `len` that are admissible including the
/// wrap-around transition (trace of `A^len`).
pub fn cyclic_word_count(adj: &[Vec<u8>], len: usize) -> u128 {
    let p = adjacency_power(adj, len);
    (0..adj.len()).fold(0u128, |a, i| a.saturating_add(p[i][i]))
}

/// Number of admissible `n`-words that extend to a cyclically admissible
/// word of length `len`.
fn extendable_word_count(adj: &[Vec<u8>], n: usize, len: usize) -> u128 {
    let m = adj.len();
    let closing = adjacency_power(adj, len - n + 1);
    let inner = adjacency_power(adj, n - 1);
    let mut total = 0u128;
    for first in 0..m {
        for last in 0..m {
            if closing[last][first] > 0 {
                total = total.saturating_add(inner[first][last]);
            }
        }
    }
    total
}

fn enumerate_cyclic_words(adj: &[Vec<u8>], len: usize) -> Vec<u8> {
    let m = adj.len();
    let mut out = Vec::new();
    let mut word = vec![0u8; len];
    fn rec(adj: &[Vec<u8>], m: usize, len: usize, pos: usize, word: &mut Vec<u8>, out: &mut Vec<u8>) {
        if pos == len {
            if adj[word[len - 1] as usize][word[0] as usize] == 1 {
                out.extend_from_slice(word);
            }
            return;
        }
        for s in 0..m {
            if pos == 0 || adj[word[pos - 1] as usize][s] == 1 {
                word[pos] = s as u8;
                rec(adj, m, len, pos + 1, word, out);
            }
        }
    }
    rec(adj, m, len, 0, &mut word, &mut out);
    out
}

/// All words over `m` evenly spaced symbols on `[-W, n_max + W)`.
pub fn build_full_shift(m: usize, window: usize, horizon: usize, budget: usize) -> Result<FiniteMetricSystem> {
    if m < 2 {
        return Err(Error::domain("full shift needs at least two symbols"));
    }
    ShiftWindowSystem::full(Alphabet::evenly_spaced(m)?, window, horizon).build(budget)
}

/// Subshift of finite type on an embedded alphabet.
pub fn build_sft(
    adjacency: Vec<Vec<u8>>,
    alphabet: Alphabet,
    window: usize,
    horizon: usize,
    budget: usize,
) -> Result<FiniteMetricSystem> {
    ShiftWindowSystem::sft(adjacency, alphabet, window, horizon)?.build(budget)
}

/// Golden-mean transition matrix (no two consecutive 1s).
pub fn golden_mean() -> Vec<Vec<u8>> {
    vec![vec![1, 1], vec![1, 0]]
}

/// `q` equally spaced points on a circle of circumference 1 with the arc
/// metric, rotated by `p/q`.
pub fn build_rotation(p: i64, q: usize) -> Result<FiniteMetricSystem> {
    if q == 0 {
        return Err(Error::domain("rotation needs q >= 1"));
    }
    let qi = q as i64;
    let step = p.rem_euclid(qi) as usize;
    if gcd(step.max(1), q) != 1 && q > 1 {
        return Err(Error::domain(format!("gcd({p}, {q}) must be 1")));
    }
    let table = DistTable::from_fn(q, |i, j| {
        let k = i.abs_diff(j);
        k.min(q - k) as f64 / q as f64
    });
    let sys = FiniteMetricSystem::from_table(table, (0..q).map(|i| (i + step) % q).collect(), format!("rotation({p}/{q})"))?;
    if !sys.is_isometry() {
        return Err(Error::Invariant("rotation is not an isometry".into()));
    }
    Ok(sys)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_core::{covering_number, CoverOptions, Metric};

    #[test]
    fn spectral_radii() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((spectral_radius(&golden_mean()) - phi).abs() < 1e-12);
        assert!((spectral_radius(&vec![vec![1, 1, 1]; 3]) - 3.0).abs() < 1e-12);
        let sys = ShiftWindowSystem::full(Alphabet::evenly_spaced(2).unwrap(), 4, 4);
        assert_eq!(sys.structural_rate(0.4), Some(2f64.ln()));
        assert_eq!(sys.structural_rate(1.0), None);
    }

    #[test]
    fn product_distance_examples() {
        let x = [0.0, 0.0, 0.0];
        assert_eq!(product_distance(&x, &x, 1).unwrap(), 0.0);
        assert_eq!(product_distance(&x, &[0.0, 0.3, 0.0], 1).unwrap(), 0.3);
        assert_eq!(product_distance(&x, &[0.25, 0.0, 0.25], 1).unwrap(), 0.25);
        assert!(product_distance(&x, &[0.0], 0).is_err());
    }

    #[test]
    fn four_point_shift() {
        let s = build_full_shift(2, 0, 2, DEFAULT_WORD_BUDGET).unwrap();
        assert_eq!(s.points(), 4);
        let mut d: Vec<f64> = (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).map(|(i, j)| s.dist(i, j)).collect();
        d.sort_by(|a, b| a.total_cmp(b));
        d.dedup();
        assert_eq!(d, vec![0.0, 0.5, 1.0, 1.5]);
    }

    #[test]
    fn constant_words_are_fixed() {
        let s = build_full_shift(3, 1, 2, DEFAULT_WORD_BUDGET).unwrap();
        let w = s.words().unwrap();
        for i in 0..s.points() {
            if w.word(i).iter().all(|&c| c == w.word(i)[0]) {
                assert_eq!(s.map(i), i);
            }
        }
    }

    #[test]
    fn two_symbol_cover_at_04() {
        let s = build_full_shift(2, 0, 1, DEFAULT_WORD_BUDGET).unwrap();
        assert_eq!(covering_number(&s, 0.4, &CoverOptions::default()).unwrap().value(), Some(2));
    }

    #[test]
    fn golden_mean_counts() {
        assert_eq!(admissible_word_count(&golden_mean(), 3), 5);
        assert_eq!(cyclic_word_count(&golden_mean(), 3), 4);
        let s = build_sft(golden_mean(), Alphabet::evenly_spaced(2).unwrap(), 0, 3, DEFAULT_WORD_BUDGET).unwrap();
        assert_eq!(s.points(), 4);
        let one = build_sft(vec![vec![1]], Alphabet::evenly_spaced(1).unwrap(), 1, 2, DEFAULT_WORD_BUDGET).unwrap();
        assert_eq!(one.points(), 1);
    }

    #[test]
    fn full_adjacency_matches_full_shift() {
        let a = build_full_shift(2, 1, 2, DEFAULT_WORD_BUDGET).unwrap();
        let b = build_sft(vec![vec![1, 1], vec![1, 1]], Alphabet::evenly_spaced(2).unwrap(), 1, 2, DEFAULT_WORD_BUDGET).unwrap();
        assert_eq!(a.points(), b.points());
        for i in 0..a.points() {
            assert_eq!(a.words().unwrap().word(i), b.words().unwrap().word(i));
        }
    }

    #[test]
    fn budget_error() {
        let e = build_full_shift(2, 4, 10, 1000).unwrap_err();
        assert!(matches!(e, Error::Resource { required: 262144, .. }));
    }

    #[test]
    fn rotation_is_isometry() {
        let r = build_rotation(1, 4).unwrap();
        assert!(r.is_isometry());
        assert_eq!(build_rotation(0, 1).unwrap().points(), 1);
        assert!(build_rotation(2, 4).is_err());
    }

    #[test]
    fn bracket_contains_exact_small() {
        let sw = ShiftWindowSystem::full(Alphabet::evenly_spaced(2).unwrap(), 1, 3);
        let sys = sw.build(DEFAULT_WORD_BUDGET).unwrap();
        for n in 1..=3 {
            for eps in [0.3, 0.6, 1.2] {
                let exact = covering_number(&sys.bowen(n).unwrap(), eps, &CoverOptions::default()).unwrap();
                let (lo, hi) = sw.covering_bracket(n, eps).unwrap();
                assert!(lo as usize <= exact.lower && exact.upper <= hi as usize, "n={n} eps={eps} {lo} {exact:?} {hi}");
            }
        }
    }

    #[test]
    fn unit_shift_slope_tracks_log_m() {
        for k in 2..=6 {
            let eps = 2f64.powi(-k);
            let m = (1.0 / eps).ceil() as usize;
            let a = Alphabet::evenly_spaced(m).unwrap();
            let w = window_for_tail(&a, eps / 4.0);
            let g = ShiftWindowSystem::full(a, w, 8).growth(eps, 1..=8, RateMethod::SlopeFit).unwrap();
            let lm = (m as f64).ln();
            assert!(g.rate_bracket.0 <= lm + 1e-9 && lm <= g.rate_bracket.1 + 1e-9);
            assert!(g.bracket_width() / g.rate_bracket.0 < 0.15);
        }
    }
}
