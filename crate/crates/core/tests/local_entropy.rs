use mdimlab::local_entropy::{
    ball_series, bowen_ball_measure, brin_katok_estimate, brin_katok_per_component, eps0_proxy, BallMethod, BallMode,
};
use mdimlab::measures::{cylinder_mass, MeasureSpec};
use mdimlab::shift_systems::{Alphabet, ShiftWindowSystem};
use proptest::prelude::*;

/// `μ{y : ρ_n(x, y) < ε}` over the truncated window, by listing every word.
fn brute_ball(mu: &MeasureSpec, sys: &ShiftWindowSystem, x: &[u8], n: usize, eps: f64) -> f64 {
    let len = n + 2 * sys.window;
    let m = sys.alphabet.len();
    let sym = sys.alphabet.symbols();
    let mut total = 0.0;
    for code in 0..m.pow(len as u32) {
        let y: Vec<u8> = (0..len).map(|i| (code / m.pow(i as u32) % m) as u8).collect();
        let dist = (0..n)
            .map(|k| {
                (0..len)
                    .map(|i| {
                        let w = 0.5f64.powi(i.abs_diff(sys.window + k) as i32);
                        (sym[x[i] as usize] - sym[y[i] as usize]).abs() * w
                    })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        if dist < eps {
            total += cylinder_mass(mu, &y).unwrap();
        }
    }
    total
}

fn system(m: usize) -> ShiftWindowSystem {
    ShiftWindowSystem::full(Alphabet::evenly_spaced(m).unwrap(), 1, 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn enumerated_ball_matches_listing(
        center in prop::collection::vec(0u8..3, 5),
        n in 1usize..=3,
        eps in 0.05..2.0f64,
        p in 0.1..0.8f64,
    ) {
        let mu = MeasureSpec::bernoulli(vec![p, (1.0 - p) / 2.0, (1.0 - p) / 2.0]).unwrap();
        let sys = system(3);
        let b = bowen_ball_measure(&mu, &sys, &center, n, eps, BallMethod::Enumerated { budget: 1 << 16 }).unwrap();
        let oracle = brute_ball(&mu, &sys, &center[..n + 2], n, eps);
        prop_assert!((b.upper - oracle).abs() < 1e-12, "{} vs {oracle}", b.upper);
        prop_assert!(b.lower <= b.upper);
    }

    #[test]
    fn cylinder_mode_brackets_enumeration(center in prop::collection::vec(0u8..2, 11), n in 1usize..=3) {
        let mu = MeasureSpec::bernoulli(vec![0.3, 0.7]).unwrap();
        let sys = ShiftWindowSystem::full(Alphabet::evenly_spaced(2).unwrap(), 4, 3);
        let auto = bowen_ball_measure(&mu, &sys, &center, n, 0.2, BallMethod::Auto).unwrap();
        let full = bowen_ball_measure(&mu, &sys, &center, n, 0.2, BallMethod::Enumerated { budget: 1 << 16 }).unwrap();
        prop_assert_eq!(auto.mode, BallMode::ExactCylinder);
        prop_assert!(auto.lower <= full.upper + 1e-15 && full.upper <= auto.upper + 1e-15);
    }
}

#[test]
fn sampled_mode_is_close_to_enumeration() {
    let mu = MeasureSpec::bernoulli(vec![0.5, 0.5]).unwrap();
    let sys = system(2);
    let x = [0u8, 1, 1, 0, 1];
    let exact = bowen_ball_measure(&mu, &sys, &x, 2, 0.9, BallMethod::Enumerated { budget: 1 << 10 }).unwrap();
    let s = bowen_ball_measure(&mu, &sys, &x, 2, 0.9, BallMethod::Sampled { samples: 20_000, seed: 3 }).unwrap();
    let se = (exact.upper * (1.0 - exact.upper) / 20_000.0).sqrt();
    assert!((s.upper - exact.upper).abs() < 5.0 * se + 1e-12);
}

#[test]
fn ball_series_decays_at_the_entropy() {
    let mu = MeasureSpec::bernoulli(vec![0.5, 0.5]).unwrap();
    let sys = ShiftWindowSystem::full(Alphabet::evenly_spaced(2).unwrap(), 3, 10);
    let x: Vec<u8> = (0..16).map(|i| (i * 7 % 3 == 0) as u8).collect();
    let s = ball_series(&mu, &sys, &x, 0.4, 1..=10, BallMethod::Auto).unwrap();
    assert!(s.log_measure.windows(2).all(|w| w[1] <= w[0]));
    assert!((s.hbk_estimate - 2f64.ln()).abs() < 1e-12);
}

#[test]
fn non_ergodic_measures_go_per_component() {
    let mix = MeasureSpec::mixture(vec![
        (0.5, MeasureSpec::bernoulli(vec![0.5, 0.5]).unwrap()),
        (0.5, MeasureSpec::bernoulli(vec![0.9, 0.1]).unwrap()),
    ])
    .unwrap();
    let sys = ShiftWindowSystem::full(Alphabet::evenly_spaced(2).unwrap(), 3, 8);
    assert!(brin_katok_estimate(&mix, &sys, 0.4, 1..=8, 5, 0, BallMethod::Auto).is_err());
    let per = brin_katok_per_component(&mix, &sys, 0.4, 1..=8, 5, 0, BallMethod::Auto).unwrap();
    assert_eq!(per.len(), 2);
    assert!((per[0].1.hbk - 2f64.ln()).abs() < 1e-12);
    assert!(per[1].1.hbk < per[0].1.hbk);
}

#[test]
fn eps0_proxy_cases() {
    let s: Vec<(f64, f64)> = (1..=6).map(|k| (2f64.powi(-k), 2f64.ln())).collect();
    // S / log(1/ε) = 1/k; within 1 of 0 everywhere
    assert_eq!(eps0_proxy(1.0, 2.0, 0.0, &s), 0.5);
    // within 0.25 only for k >= 4
    assert_eq!(eps0_proxy(1.0, 0.5, 0.0, &s), 0.0625);
    assert_eq!(eps0_proxy(1.0, 0.1, 0.0, &s), 0.0);
    assert_eq!(eps0_proxy(0.2, 2.0, 0.0, &s), 0.1);
}
