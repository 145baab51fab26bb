//! Acceptance suite: fourteen criteria, one PASS/FAIL line each.
//!
//! Lines go straight to stderr so they show up under the default test
//! output capture. Criteria in `KNOWN_FAILURES` are computed faithfully and
//! reported as FAIL without failing the test.

use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use mdimlab::entropy::{dynamical_entropy, info_dim_rate, Partition, PartitionFamily};
use mdimlab::harness::{
    mdim_estimate, run_experiment, vp_chain_check, Config, SystemSpec, Verdict,
};
use mdimlab::local_entropy::bk_partition_check;
use mdimlab::measures::{parry, MeasureSpec};
use mdimlab::metric_core::{
    covering_number, greedy_upper_bound, lebesgue_cover, packing_lower_bound, CoverOptions, DistTable,
    FiniteMetricSystem, Metric, RateMethod,
};
use mdimlab::rate_distortion::{
    blahut_arimoto, decomposition_inequality_check, ergodic_dominance_experiment, inverse_consistency_check,
    rd_value, DistortionProblem,
};
use mdimlab::shift_systems::{build_rotation, golden_mean, window_for_tail, Alphabet};
use mdimlab::stats::binary_entropy;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Finite-n decomposition inequality misses at every rate for n <= 4.
const KNOWN_FAILURES: &[usize] = &[7];

type Outcome = Result<String, String>;
type Criterion = (usize, fn() -> Outcome, Duration);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn golden_log() -> f64 {
    ((1.0 + 5f64.sqrt()) / 2.0).ln()
}

fn bern_half() -> MeasureSpec {
    MeasureSpec::bernoulli(vec![0.5, 0.5]).unwrap()
}

fn mixture() -> MeasureSpec {
    MeasureSpec::mixture(vec![
        (0.5, bern_half()),
        (0.5, MeasureSpec::bernoulli(vec![0.95, 0.05]).unwrap()),
    ])
    .unwrap()
}

fn full2() -> SystemSpec {
    SystemSpec::FullShift { m: Some(2), symbols: None, window: None }
}

fn random_system(rng: &mut ChaCha8Rng, points: usize) -> FiniteMetricSystem {
    let xy: Vec<(f64, f64)> = (0..points).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
    let table = DistTable::from_fn(points, |i, j| {
        let (a, b) = (xy[i], xy[j]);
        ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
    });
    let mut dynamics: Vec<usize> = (0..points).collect();
    dynamics.shuffle(rng);
    FiniteMetricSystem::from_table(table, dynamics, "random").unwrap()
}

/// Minimum number of diameter-`<= eps` subsets covering all points, by
/// enumerating every subset and a DP over covered masks.
fn brute_cover<M: Metric>(m: &M, eps: f64) -> usize {
    let p = m.size();
    let full = (1usize << p) - 1;
    let mut ok = vec![false; 1 << p];
    ok[0] = true;
    for s in 1..=full {
        let top = usize::BITS as usize - 1 - s.leading_zeros() as usize;
        let rest = s & !(1 << top);
        ok[s] = ok[rest] && (0..p).filter(|i| rest >> i & 1 == 1).all(|i| m.dist(i, top) <= eps);
    }
    let feasible: Vec<usize> = (1..=full).filter(|&s| ok[s]).collect();
    let mut best = vec![usize::MAX; 1 << p];
    best[0] = 0;
    for mask in 0..full {
        if best[mask] == usize::MAX {
            continue;
        }
        let first = (!mask).trailing_zeros() as usize;
        for &s in feasible.iter().filter(|&&s| s >> first & 1 == 1) {
            let next = mask | s;
            best[next] = best[next].min(best[mask] + 1);
        }
    }
    best[full]
}

struct Bowen2<'a>(&'a FiniteMetricSystem);

impl Metric for Bowen2<'_> {
    fn size(&self) -> usize {
        self.0.points()
    }
    fn dist(&self, i: usize, j: usize) -> f64 {
        self.0.dist(i, j).max(self.0.dist(self.0.map(i), self.0.map(j)))
    }
}

fn c1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let opts = CoverOptions::default();
    let mut checked = 0;
    for k in 0..60 {
        let points = rng.random_range(3..=12);
        let sys = random_system(&mut rng, points);
        let eps = rng.random_range(0.1..0.7);
        let (count, oracle, lower, greedy) = if k % 3 == 2 {
            let b = sys.bowen(2).map_err(|e| e.to_string())?;
            let brute = brute_cover(&Bowen2(&sys), eps);
            (covering_number(&b, eps, &opts), brute, packing_lower_bound(&b, eps, &opts), greedy_upper_bound(&b, eps, &opts))
        } else {
            let brute = brute_cover(&sys, eps);
            (covering_number(&sys, eps, &opts), brute, packing_lower_bound(&sys, eps, &opts), greedy_upper_bound(&sys, eps, &opts))
        };
        let count = count.map_err(|e| e.to_string())?;
        let exact = count.value().ok_or(format!("system {k}: count not exact: {count:?}"))?;
        let greedy = greedy.ok_or(format!("system {k}: no greedy bound"))?;
        ensure(lower <= exact && exact <= greedy, || format!("system {k}: {lower} <= {exact} <= {greedy} violated"))?;
        ensure(exact == oracle, || format!("system {k}: exact {exact} vs enumeration {oracle}"))?;
        checked += 1;
    }
    Ok(format!("{checked} systems, exact count equals enumeration, lower <= exact <= greedy"))
}

fn brute_leb<M: Metric>(m: &M, sets: &[Vec<usize>]) -> f64 {
    (0..m.size())
        .map(|x| {
            sets.iter()
                .filter(|s| s.contains(&x))
                .map(|s| {
                    (0..m.size())
                        .filter(|y| !s.contains(y))
                        .map(|y| m.dist(x, y))
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

fn c2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut systems: Vec<(FiniteMetricSystem, f64)> = Vec::new();
    for _ in 0..14 {
        let p = rng.random_range(5..=40);
        systems.push((random_system(&mut rng, p), rng.random_range(0.05..0.8)));
    }
    for (w, h) in [(1, 3), (2, 3), (2, 4)] {
        let sys = full2().build_finite(0.4, w, h).map_err(|e| e.to_string())?;
        systems.push((sys, 0.4));
    }
    systems.push((build_rotation(3, 17).unwrap(), 0.3));
    systems.push((build_rotation(1, 64).unwrap(), 0.05));
    systems.push((SystemSpec::GoldenMean { window: None }.build_finite(0.4, 2, 3).unwrap(), 0.7));
    let mut worst = f64::INFINITY;
    for (k, (sys, eps)) in systems.iter().enumerate() {
        let cover = lebesgue_cover(sys, *eps).map_err(|e| format!("pair {k}: {e}"))?;
        let mut diam = 0.0f64;
        for s in cover.sets() {
            for &i in s {
                for &j in s {
                    diam = diam.max(sys.dist(i, j));
                }
            }
        }
        let whole = cover.sets().iter().any(|s| s.len() == sys.points());
        let leb = if whole { f64::INFINITY } else { brute_leb(sys, cover.sets()) };
        ensure(diam <= *eps, || format!("pair {k}: diam {diam} > eps {eps}"))?;
        ensure(leb >= eps / 4.0, || format!("pair {k}: Leb {leb} < eps/4 = {}", eps / 4.0))?;
        worst = worst.min(leb / eps);
    }
    Ok(format!("{} pairs, min Leb/eps = {worst:.4}", systems.len()))
}

fn c3() -> Outcome {
    let w = window_for_tail(&Alphabet::evenly_spaced(2).unwrap(), 0.05);
    let mut cfg = Config::new("sandwich");
    cfg.system = Some(full2());
    cfg.eps_grid = vec![0.4];
    cfg.n_range = Some([1, 4]);
    cfg.params.window = Some(w);
    cfg.params.cover = Some("cylinder".into());
    let out = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let rows: usize = out.reports.iter().map(|r| r.rows.len()).sum();
    ensure(rows == 8, || format!("expected 8 inequality rows, got {rows}"))?;
    for r in &out.reports {
        ensure(r.verdict == Verdict::Holds, || format!("{}: {}", r.claim, r.verdict.as_str()))?;
    }
    Ok(format!("W={w}, n=1..4, both inequalities hold with sound bounds"))
}

fn c4() -> Outcome {
    let mut worst: f64 = 0.0;
    for p in [0.5, 0.3, 0.1] {
        let mu = MeasureSpec::bernoulli(vec![p, 1.0 - p]).unwrap();
        let h = -(p * p.ln() + (1.0 - p) * (1.0 - p).ln());
        let part = Partition::points(&mu.alphabet());
        for n in 1..=10 {
            let est = dynamical_entropy(&mu, &part, n).map_err(|e| e.to_string())?;
            worst = worst.max((est.conditional - h).abs());
        }
    }
    ensure(worst <= 1e-12, || format!("Bernoulli conditional error {worst:e}"))?;
    let mu = parry(&golden_mean()).unwrap();
    let est = dynamical_entropy(&mu, &Partition::points(&mu.alphabet()), 10).map_err(|e| e.to_string())?;
    let err = (est.conditional - golden_log()).abs();
    ensure(err <= 1e-9, || format!("Parry error {err:e}"))?;
    Ok(format!("Bernoulli max error {worst:.1e}, Parry error {err:.1e}"))
}

/// `min_Q I(X;Y) + β E c` by a grid over conditionals refined with pairwise
/// mass moves (the objective is convex in `Q`).
fn lagrangian_oracle(px: &[f64], cost: &[Vec<f64>], beta: f64) -> f64 {
    let ny = cost[0].len();
    let objective = |q: &[Vec<f64>]| {
        let py: Vec<f64> = (0..ny).map(|y| px.iter().zip(q).map(|(p, row)| p * row[y]).sum()).collect();
        let mut v = 0.0;
        for (x, row) in q.iter().enumerate() {
            for y in 0..ny {
                let j = px[x] * row[y];
                if j > 0.0 {
                    v += j * (row[y] / py[y]).ln() + beta * j * cost[x][y];
                }
            }
        }
        v
    };
    let mut q: Vec<Vec<f64>> = vec![vec![1.0 / ny as f64; ny]; px.len()];
    if ny == 2 && px.len() == 2 {
        let grid = 200;
        let mut best = f64::INFINITY;
        for a in 0..=grid {
            for b in 0..=grid {
                let (s, t) = (a as f64 / grid as f64, b as f64 / grid as f64);
                let cand = vec![vec![s, 1.0 - s], vec![t, 1.0 - t]];
                let v = objective(&cand);
                if v < best {
                    best = v;
                    q = cand;
                }
            }
        }
    }
    let mut step: f64 = 0.25;
    let mut cur = objective(&q);
    while step > 1e-10 {
        let mut improved = false;
        for x in 0..px.len() {
            for from in 0..ny {
                for to in 0..ny {
                    if from == to || q[x][from] <= 0.0 {
                        continue;
                    }
                    let mv = step.min(q[x][from]);
                    q[x][from] -= mv;
                    q[x][to] += mv;
                    let v = objective(&q);
                    if v < cur - 1e-15 {
                        cur = v;
                        improved = true;
                    } else {
                        q[x][from] += mv;
                        q[x][to] -= mv;
                    }
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    cur
}

fn c5() -> Outcome {
    let mu = bern_half();
    let mut worst: f64 = 0.0;
    for k in 0..=40 {
        let d = 0.05 + 0.01 * k as f64;
        let r = rd_value(&mu, 1, 1.0, d).map_err(|e| e.to_string())?;
        worst = worst.max((r.rate - (2f64.ln() - binary_entropy(d))).abs());
    }
    ensure(worst <= 1e-4, || format!("binary R(D) error {worst:e}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut oracle_worst: f64 = 0.0;
    let mut problems = 0;
    for size in [2usize, 2, 3, 3, 3] {
        let mut px: Vec<f64> = (0..size).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = px.iter().sum();
        px.iter_mut().for_each(|p| *p /= total);
        let cost: Vec<Vec<f64>> = (0..size)
            .map(|x| (0..size).map(|y| if x == y { 0.0 } else { rng.random_range(0.2..1.0) }).collect())
            .collect();
        let prob = DistortionProblem::from_matrix(px.clone(), cost.clone()).map_err(|e| e.to_string())?;
        for beta in [0.5, 2.0, 5.0] {
            let ba = blahut_arimoto(&prob, beta, 1e-13, 100_000).map_err(|e| e.to_string())?;
            let oracle = lagrangian_oracle(&px, &cost, beta);
            oracle_worst = oracle_worst.max((ba.rate + beta * ba.distortion - oracle).abs());
        }
        problems += 1;
    }
    ensure(oracle_worst <= 2e-3, || format!("oracle mismatch {oracle_worst:e}"))?;
    Ok(format!(
        "binary max error {worst:.1e}; {problems} problems x 3 slopes, oracle max gap {oracle_worst:.1e}"
    ))
}

fn c6() -> Outcome {
    let mut notes = Vec::new();
    for (label, mu, n) in [("uniform", bern_half(), 1), ("parry", parry(&golden_mean()).unwrap(), 4)] {
        let c = inverse_consistency_check(&mu, n, 1.0, 10, 1e-3).map_err(|e| e.to_string())?;
        ensure(c.rows.len() == 10, || format!("{label}: {} grid rows", c.rows.len()))?;
        ensure(c.report.verdict != Verdict::Fails, || {
            let bad: Vec<&str> = c.report.rows.iter().filter(|r| !r.satisfied).map(|r| r.key.as_str()).collect();
            format!("{label}: violated {bad:?}")
        })?;
        let worst = c.rows.iter().map(|r| r.residual).fold(0.0, f64::max);
        notes.push(format!("{label} max residual {worst:.1e}"));
    }
    Ok(notes.join(", "))
}

fn c7() -> Outcome {
    let rates: Vec<f64> = (1..=8).map(|k| 0.05 * k as f64).collect();
    let (rows, report) = decomposition_inequality_check(&mixture(), 4, 1.0, &rates, 1e-6).map_err(|e| e.to_string())?;
    let worst = rows.iter().map(|r| r.mixture - r.weighted).fold(f64::NEG_INFINITY, f64::max);
    ensure(report.verdict != Verdict::Fails, || {
        let r = &rows[0];
        format!(
            "n=4: D_mix exceeds the weighted average by up to {worst:.4} (R={}: {:.4} vs {:.4})",
            r.rate, r.mixture, r.weighted
        )
    })?;
    Ok(format!("8 rates, max excess {worst:.1e}"))
}

fn c8() -> Outcome {
    let d: Vec<f64> = (1..=8).map(|k| 0.03 * k as f64).collect();
    let (rows, report) = ergodic_dominance_experiment(&mixture(), 1.0, &d, 1, 1e-3).map_err(|e| e.to_string())?;
    ensure(rows.len() == 8 && report.rows.iter().all(|r| r.satisfied), || "dominance violated".into())?;
    let doms: Vec<usize> = rows.iter().map(|r| r.dominating).collect();
    ensure(doms.iter().all(|&i| i < 2), || "no dominating component".into())?;
    Ok(format!("8 levels, dominating components {doms:?}, verdict {}", report.verdict.as_str()))
}

fn c9() -> Outcome {
    let cases = [
        ("full shift", full2(), bern_half(), 2f64.ln()),
        ("golden mean", SystemSpec::GoldenMean { window: None }, parry(&golden_mean()).unwrap(), golden_log()),
    ];
    let mut notes = Vec::new();
    for (label, spec, mu, h) in cases {
        let c = vp_chain_check(&spec, &[mu], 0.4, &PartitionFamily::default(), 1..=6, 6, 1e-9)
            .map_err(|e| e.to_string())?;
        ensure(c.left.verdict == Verdict::Holds, || format!("{label}: left chain {}", c.left.verdict.as_str()))?;
        let inf = c.infs_at_eps[0].value;
        let s = c.s_quarter.lower().0;
        ensure((inf - h).abs() <= 1e-9 && (s - h).abs() <= 1e-9, || {
            format!("{label}: inf {inf} and S {s} should both equal {h}")
        })?;
        notes.push(format!("{label} {inf:.6} <= {s:.6}"));
    }
    Ok(notes.join(", "))
}

fn c10() -> Outcome {
    let eps: Vec<f64> = (2..=6).map(|k| 2f64.powi(-k)).collect();
    let unit = mdim_estimate(&SystemSpec::UnitFullShift { window: None }, &eps, 1..=8, RateMethod::SlopeFit)
        .map_err(|e| e.to_string())?;
    let slope = unit.estimate.slope;
    ensure(unit.max_relative_width <= 0.15, || format!("bracket width {:.3}", unit.max_relative_width))?;
    ensure((0.8..=1.2).contains(&slope), || format!("unit family slope {slope}"))?;
    let rot = mdim_estimate(&SystemSpec::Rotation { p: 1, q: 64 }, &eps, 1..=8, RateMethod::SlopeFit)
        .map_err(|e| e.to_string())?;
    let rs = rot.estimate.slope;
    ensure(rs.abs() <= 0.02, || format!("rotation slope {rs}"))?;
    Ok(format!(
        "unit family slope {slope:.4} (max width {:.3}), rotation slope {rs:.4}",
        unit.max_relative_width
    ))
}

fn c11() -> Outcome {
    let symbols: Vec<f64> = (0..64).map(|k| (2 * k + 1) as f64 / 128.0).collect();
    let alphabet = Alphabet::new(symbols).unwrap();
    let mu = MeasureSpec::bernoulli(vec![1.0 / 64.0; 64]).unwrap().with_alphabet(&alphabet).unwrap();
    let r = info_dim_rate(&mu, &[2, 4, 8, 16, 32, 64], 1).map_err(|e| e.to_string())?;
    ensure(r.rows.len() == 6, || format!("{} rows", r.rows.len()))?;
    let worst = r.rows.iter().map(|row| (row.ratio - 1.0).abs()).fold(0.0, f64::max);
    ensure(worst <= 1e-12, || format!("max |ratio - 1| = {worst:e}"))?;
    Ok(format!("m=2..64, max |ratio - 1| = {worst:.1e}"))
}

fn c12() -> Outcome {
    let family = PartitionFamily::default();
    let sys = full2().ball_shift_at(0.4, 12).map_err(|e| e.to_string())?;
    let b = bk_partition_check(&bern_half(), &sys, 0.4, &family, 12, 101, 0, 1e-2).map_err(|e| e.to_string())?;
    let err = (b.hbk.hbk - 2f64.ln()).abs();
    ensure(b.hbk.all_exact(), || "Bernoulli balls not exact".into())?;
    ensure(err <= 1e-9, || format!("Bernoulli h_BK error {err:e}"))?;
    ensure(b.report.verdict == Verdict::Holds, || format!("Bernoulli verdict {}", b.report.verdict.as_str()))?;
    let sys = SystemSpec::GoldenMean { window: None }.ball_shift_at(0.4, 12).map_err(|e| e.to_string())?;
    let mu = parry(&golden_mean()).unwrap();
    let p = bk_partition_check(&mu, &sys, 0.4, &family, 12, 201, 0, 1e-2).map_err(|e| e.to_string())?;
    let rel = (p.hbk.hbk - golden_log()).abs() / golden_log();
    ensure(rel <= 0.02, || format!("Parry h_BK {} off by {:.2}%", p.hbk.hbk, 100.0 * rel))?;
    ensure(p.report.verdict == Verdict::Holds, || format!("Parry verdict {}", p.report.verdict.as_str()))?;
    Ok(format!(
        "Bernoulli error {err:.1e}, Parry {:.5} ({:.2}% off), both hold",
        p.hbk.hbk,
        100.0 * rel
    ))
}

fn ball_config(delta: f64) -> Config {
    let mut cfg = Config::new("ball_bound");
    cfg.system = Some(full2());
    cfg.measures = vec![bern_half()];
    cfg.eps_grid = vec![0.4];
    cfg.n_range = Some([1, 20]);
    cfg.params.delta = Some(delta);
    cfg.params.centers = Some(5);
    cfg
}

fn c13() -> Outcome {
    let inside = run_experiment(&ball_config(2.0)).map_err(|e| e.to_string())?;
    let s = &inside.summary["scales"][0];
    ensure(s["inside_proxy"] == true, || format!("delta=2 not inside the proxy: {s}"))?;
    ensure(s["holds_everywhere"] == true, || format!("delta=2 bound violated: {s}"))?;
    let rows = inside.table("ball_bound").map(|t| t.rows.len()).unwrap_or(0);
    ensure(rows == 100, || format!("expected 5 centers x 20 n, got {rows} rows"))?;
    let outside = run_experiment(&ball_config(0.5)).map_err(|e| e.to_string())?;
    let s = &outside.summary["scales"][0];
    ensure(s["inside_proxy"] == false, || format!("delta=0.5 reported inside the proxy: {s}"))?;
    ensure(
        outside.reports.iter().all(|r| r.verdict != Verdict::Holds),
        || "delta=0.5 claimed to hold".into(),
    )?;
    Ok(format!(
        "delta=2 holds at 5 centers x n<=20 (eps0 {}), delta=0.5 outside (eps0 {})",
        inside.summary["scales"][0]["eps0"], s["eps0"]
    ))
}

fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
                continue;
            }
            let mut bytes = std::fs::read(&path).unwrap();
            if path.file_name().is_some_and(|n| n == "report.txt") {
                let cut = bytes.iter().position(|&b| b == b'\n').map_or(bytes.len(), |i| i + 1);
                bytes.drain(..cut);
            }
            files.push((path.strip_prefix(dir).unwrap().display().to_string(), bytes));
        }
    }
    files.sort();
    files
}

fn c14() -> Outcome {
    let mut vp = Config::new("vp_check");
    vp.system = Some(full2());
    vp.measures = vec![bern_half()];
    vp.eps_grid = vec![0.4];
    vp.n_range = Some([1, 6]);
    let mut bk = Config::new("brin_katok");
    bk.system = Some(SystemSpec::GoldenMean { window: None });
    bk.measures = vec![parry(&golden_mean()).unwrap()];
    bk.eps_grid = vec![0.4];
    bk.n_range = Some([1, 10]);
    bk.params.centers = Some(21);
    let mut rd = Config::new("rd_curve");
    rd.measures = vec![mixture()];
    rd.params.block_len = Some(2);
    let configs = [vp, bk, rd, ball_config(2.0)];
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = 0;
    for (k, cfg) in configs.iter().enumerate() {
        let runs: Vec<Vec<(String, Vec<u8>)>> = (0..2)
            .map(|r| {
                let mut c = cfg.clone();
                let dir = tmp.path().join(format!("{k}-{r}"));
                c.output_dir = Some(dir.clone());
                run_experiment(&c).map_err(|e| e.to_string())?;
                Ok(artifacts(&dir))
            })
            .collect::<Result<_, String>>()?;
        ensure(runs[0] == runs[1], || format!("{} artifacts differ between runs", cfg.experiment))?;
        files += runs[0].len();
    }
    Ok(format!("{} experiments, {files} artifact files byte-identical", configs.len()))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 14] = [
        (1, c1, Duration::from_secs(10)),
        (2, c2, Duration::from_secs(5)),
        (3, c3, Duration::from_secs(30)),
        (4, c4, Duration::from_secs(5)),
        (5, c5, Duration::from_secs(20)),
        (6, c6, Duration::from_secs(60)),
        (7, c7, Duration::from_secs(30)),
        (8, c8, Duration::from_secs(30)),
        (9, c9, Duration::from_secs(60)),
        (10, c10, Duration::from_secs(600)),
        (11, c11, Duration::from_secs(5)),
        (12, c12, Duration::from_secs(60)),
        (13, c13, Duration::from_secs(10)),
        (14, c14, Duration::from_secs(120)),
    ];
    let mut unexpected = Vec::new();
    let mut err = std::io::stderr().lock();
    for (k, run, budget) in criteria {
        let start = Instant::now();
        let result = run();
        let took = start.elapsed();
        let result = result.and_then(|msg| {
            if took > budget {
                Err(format!("{msg}; took {took:.2?}, budget {budget:?}"))
            } else {
                Ok(msg)
            }
        });
        match result {
            Ok(msg) => writeln!(err, "PASS criterion {k}: {msg} [{took:.2?}]").unwrap(),
            Err(msg) if KNOWN_FAILURES.contains(&k) => {
                writeln!(err, "FAIL criterion {k}: {msg} [{took:.2?}] (known finite-n failure)").unwrap()
            }
            Err(msg) => {
                writeln!(err, "FAIL criterion {k}: {msg} [{took:.2?}]").unwrap();
                unexpected.push(k);
            }
        }
    }
    assert!(unexpected.is_empty(), "criteria failed: {unexpected:?}");
}
