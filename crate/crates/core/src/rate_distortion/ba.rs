use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{block_distribution, BlockDistribution, MeasureSpec};
use crate::stats::xlogx_neg;

/// `I(X;Y)` in nats for a joint probability matrix.
pub fn mutual_information(joint: &[Vec<f64>]) -> f64 {
    let rows = joint.len();
    if rows == 0 {
        return 0.0;
    }
    let cols = joint[0].len();
    let px: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let py: Vec<f64> = (0..cols).map(|j| joint.iter().map(|r| r[j]).sum()).collect();
    let mut i = 0.0;
    for (x, row) in joint.iter().enumerate() {
        for (y, &p) in row.iter().enumerate() {
            if p > 0.0 {
                i += p * (p / (px[x] * py[y])).ln();
            }
        }
    }
    i.max(0.0)
}

/// A finite source, a reproduction alphabet and a per-symbol cost
/// `c(x, y) = (1/n) Σ_k d(x_k, y_k)^p`.
#[derive(Debug, Clone, Serialize)]
pub struct DistortionProblem {
    pub n: usize,
    pub p: f64,
    pub px: Vec<f64>,
    pub source_words: Vec<Vec<u8>>,
    pub reproduction: Vec<Vec<u8>>,
    /// Row-major `|X| × |Y|`.
    pub cost: Vec<f64>,
    /// `diam(A)^p`.
    pub max_cost: f64,
}

impl DistortionProblem {
    /// Problem for an explicit block law over words on `symbols`.
    /// `reproduction` defaults to the source support.
    pub fn new(source: &BlockDistribution, symbols: &[f64], p: f64, reproduction: Option<Vec<Vec<u8>>>) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::domain(format!("p must be a finite value >= 1, got {p}")));
        }
        if source.support.is_empty() {
            return Err(Error::domain("source has empty support"));
        }
        let n = source.n;
        let reproduction = reproduction.unwrap_or_else(|| source.support.clone());
        if reproduction.is_empty() || reproduction.iter().any(|w| w.len() != n) {
            return Err(Error::domain("reproduction words must be nonempty and of the block length"));
        }
        let sym = |s: u8| symbols[s as usize];
        let mut cost = Vec::with_capacity(source.support.len() * reproduction.len());
        for x in &source.support {
            for y in &reproduction {
                let c: f64 = x.iter().zip(y).map(|(&a, &b)| (sym(a) - sym(b)).abs().powf(p)).sum::<f64>() / n as f64;
                cost.push(c);
            }
        }
        let lo = symbols.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = symbols.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(DistortionProblem {
            n,
            p,
            px: source.probs.clone(),
            source_words: source.support.clone(),
            reproduction,
            cost,
            max_cost: (hi - lo).powf(p),
        })
    }

    /// Problem for the `n`-block law of `mu`. With `enriched`, the
    /// reproduction alphabet is every word over the alphabet.
    pub fn from_measure(mu: &MeasureSpec, n: usize, p: f64, enriched: bool, budget: usize) -> Result<Self> {
        mu.require_invariant()?;
        let source = block_distribution(mu, n, budget)?;
        let m = mu.symbol_count();
        let reproduction = if enriched {
            let total = (m as u128).saturating_pow(n as u32);
            if total > budget as u128 {
                return Err(Error::resource("enriched reproduction words", total, budget as u128));
            }
            Some(
                (0..total as usize)
                    .map(|mut code| {
                        let mut w = vec![0u8; n];
                        for k in (0..n).rev() {
                            w[k] = (code % m) as u8;
                            code /= m;
                        }
                        w
                    })
                    .collect(),
            )
        } else {
            None
        };
        Self::new(&source, mu.alphabet().symbols(), p, reproduction)
    }

    /// Direct problem from a source law and a cost matrix (block length 1).
    pub fn from_matrix(px: Vec<f64>, cost: Vec<Vec<f64>>) -> Result<Self> {
        if px.is_empty() || cost.len() != px.len() || cost.iter().any(|r| r.len() != cost[0].len() || r.is_empty()) {
            return Err(Error::domain("cost matrix must have one nonempty row per source letter"));
        }
        if cost.iter().flatten().any(|c| !(*c >= 0.0)) {
            return Err(Error::domain("costs must be nonnegative"));
        }
        let ny = cost[0].len();
        let max_cost = cost.iter().flatten().copied().fold(0.0, f64::max);
        Ok(DistortionProblem {
            n: 1,
            p: 1.0,
            source_words: (0..px.len()).map(|i| vec![i as u8]).collect(),
            reproduction: (0..ny).map(|j| vec![j as u8]).collect(),
            px,
            cost: cost.into_iter().flatten().collect(),
            max_cost,
        })
    }

    pub fn nx(&self) -> usize {
        self.px.len()
    }

    pub fn ny(&self) -> usize {
        self.reproduction.len()
    }

    #[inline]
    pub fn c(&self, x: usize, y: usize) -> f64 {
        self.cost[x * self.ny() + y]
    }

    /// `min_y E c(X, y)` and the minimizing reproduction word.
    pub fn constant_distortion(&self) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for y in 0..self.ny() {
            let d: f64 = (0..self.nx()).map(|x| self.px[x] * self.c(x, y)).sum();
            if d < best.0 {
                best = (d, y);
            }
        }
        best
    }

    /// `H(X)` in nats (block, not per symbol).
    pub fn source_entropy(&self) -> f64 {
        self.px.iter().map(|&p| xlogx_neg(p)).sum()
    }

    /// Every source word with positive mass has a zero-cost reproduction.
    pub fn zero_distortion_reachable(&self) -> bool {
        (0..self.nx()).all(|x| self.px[x] == 0.0 || (0..self.ny()).any(|y| self.c(x, y) == 0.0))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BaResult {
    pub beta: f64,
    /// `E c(X, Y)`.
    pub distortion: f64,
    /// `I(X;Y)` for the block, in nats.
    pub rate: f64,
    /// Final value of the alternating-minimization objective.
    pub lagrangian: f64,
    pub iterations: usize,
    pub converged: bool,
    pub output: Vec<f64>,
}

fn log_sum_exp(a: &[f64]) -> f64 {
    let m = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + a.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Blahut–Arimoto for `min I(X;Y) + β E c(X,Y)` starting from the uniform
/// output law.
pub fn blahut_arimoto(prob: &DistortionProblem, beta: f64, tol: f64, max_iter: usize) -> Result<BaResult> {
    blahut_arimoto_from(prob, beta, tol, max_iter, None)
}

/// Blahut–Arimoto from a given output law. The objective
/// `-Σ_x p(x) log Σ_y q(y) e^{-β c(x,y)}` is checked to be nonincreasing at
/// every iteration.
pub fn blahut_arimoto_from(
    prob: &DistortionProblem,
    beta: f64,
    tol: f64,
    max_iter: usize,
    init: Option<&[f64]>,
) -> Result<BaResult> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::domain(format!("beta must be positive and finite, got {beta}")));
    }
    if !(tol > 0.0) {
        return Err(Error::domain("tol must be positive"));
    }
    let (nx, ny) = (prob.nx(), prob.ny());
    let mut q: Vec<f64> = match init {
        Some(q0) if q0.len() == ny && q0.iter().all(|v| *v > 0.0) => q0.to_vec(),
        _ => vec![1.0 / ny as f64; ny],
    };
    let mut cond = vec![0.0; nx * ny];
    let mut a = vec![0.0; ny];
    let mut prev = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    let mut value = f64::INFINITY;
    while iterations < max_iter {
        iterations += 1;
        let logq: Vec<f64> = q.iter().map(|v| if *v > 0.0 { v.ln() } else { f64::NEG_INFINITY }).collect();
        value = 0.0;
        for x in 0..nx {
            for y in 0..ny {
                a[y] = logq[y] - beta * prob.c(x, y);
            }
            let lse = log_sum_exp(&a);
            value -= prob.px[x] * lse;
            for y in 0..ny {
                cond[x * ny + y] = (a[y] - lse).exp();
            }
        }
        if value > prev + 1e-12 * (1.0 + prev.abs()) {
            return Err(Error::Invariant(format!(
                "Blahut-Arimoto objective increased at iteration {iterations}: {prev} -> {value}"
            )));
        }
        let mut next = vec![0.0; ny];
        for x in 0..nx {
            for y in 0..ny {
                next[y] += prob.px[x] * cond[x * ny + y];
            }
        }
        q = next;
        if prev - value < tol {
            converged = true;
            break;
        }
        prev = value;
    }
    let mut rate = 0.0;
    let mut distortion = 0.0;
    for x in 0..nx {
        for y in 0..ny {
            let j = prob.px[x] * cond[x * ny + y];
            if j > 0.0 && q[y] > 0.0 {
                rate += j * (cond[x * ny + y] / q[y]).ln();
            }
            distortion += j * prob.c(x, y);
        }
    }
    Ok(BaResult {
        beta,
        distortion,
        rate: rate.max(0.0),
        lagrangian: value,
        iterations,
        converged,
        output: q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::binary_entropy;

    #[test]
    fn mi_examples() {
        assert!(mutual_information(&[vec![0.25, 0.25], vec![0.25, 0.25]]).abs() < 1e-15);
        let id: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| if i == j { 1.0 / 3.0 } else { 0.0 }).collect()).collect();
        assert!((mutual_information(&id) - 3f64.ln()).abs() < 1e-14);
        let bsc = vec![vec![0.45, 0.05], vec![0.05, 0.45]];
        assert!((mutual_information(&bsc) - (2f64.ln() - binary_entropy(0.1))).abs() < 1e-14);
    }

    #[test]
    fn uniform_binary_point() {
        let prob = DistortionProblem::from_matrix(vec![0.5, 0.5], vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let r = blahut_arimoto(&prob, 3.0, 1e-12, 5000).unwrap();
        let d = 1.0 / (1.0 + 3f64.exp());
        assert!((r.distortion - d).abs() < 1e-12);
        assert!((r.rate - (2f64.ln() - binary_entropy(d))).abs() < 1e-12);
    }

    #[test]
    fn limits_in_beta() {
        let prob = DistortionProblem::from_matrix(vec![0.2, 0.3, 0.5], vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]]).unwrap();
        let hi = blahut_arimoto(&prob, 60.0, 1e-14, 20000).unwrap();
        assert!(hi.distortion < 1e-12);
        assert!((hi.rate - prob.source_entropy()).abs() < 1e-9);
        let lo = blahut_arimoto(&prob, 1e-3, 1e-14, 20000).unwrap();
        assert!(lo.rate < 1e-6);
        assert!((lo.distortion - prob.constant_distortion().0).abs() < 1e-3);
    }
}
