use mdimlab::measures::MeasureSpec;
use mdimlab::rate_distortion::{
    blahut_arimoto, mutual_information, rd_curve, rd_solver, rd_value, DistortionProblem, RdOptions, RdSolver,
};
use mdimlab::stats::binary_entropy;
use proptest::prelude::*;

#[test]
fn mutual_information_of_simple_joints() {
    let independent = vec![vec![0.06, 0.14], vec![0.24, 0.56]];
    assert!(mutual_information(&independent).abs() < 1e-15);
    let copy = vec![vec![0.3, 0.0], vec![0.0, 0.7]];
    assert!((mutual_information(&copy) - binary_entropy(0.3)).abs() < 1e-15);
}

#[test]
fn skewed_binary_source_closed_form() {
    // R(D) = H_b(p) - H_b(D) for D <= min(p, 1 - p) under Hamming cost
    let p = 0.2;
    let mu = MeasureSpec::bernoulli(vec![1.0 - p, p]).unwrap();
    for k in 1..10 {
        let d = 0.02 * k as f64;
        let r = rd_value(&mu, 1, 1.0, d).unwrap();
        assert!((r.rate - (binary_entropy(p) - binary_entropy(d))).abs() < 1e-6, "D={d}: {}", r.rate);
        assert!(r.lower <= r.rate + 1e-12 && r.rate <= r.upper + 1e-12);
    }
    assert_eq!(rd_value(&mu, 1, 1.0, 0.25).unwrap().rate, 0.0);
    assert_eq!(rd_value(&mu, 1, 1.0, 1.5).unwrap().rate, 0.0);
}

#[test]
fn block_length_does_not_help_memoryless_sources() {
    let mu = MeasureSpec::bernoulli(vec![0.5, 0.5]).unwrap();
    let r1 = rd_value(&mu, 1, 1.0, 0.2).unwrap().rate;
    let r3 = rd_value(&mu, 3, 1.0, 0.2).unwrap().rate;
    assert!((r1 - r3).abs() < 1e-4, "{r1} vs {r3}");
}

#[test]
fn curve_is_monotone_and_convex() {
    let mu = MeasureSpec::bernoulli(vec![0.7, 0.2, 0.1]).unwrap();
    let hull = rd_curve(&mu, 1, 2.0).unwrap().hull();
    assert!(hull.len() > 4);
    for w in hull.windows(3) {
        let (a, b, c) = (&w[0], &w[1], &w[2]);
        assert!(a.d <= b.d && b.r <= a.r + 1e-12);
        let t = (b.d - a.d) / (c.d - a.d);
        assert!(b.r <= a.r + t * (c.r - a.r) + 1e-9);
    }
    let solver = rd_solver(&mu, 1, 2.0).unwrap();
    assert!((solver.max_rate() - mu_entropy(&[0.7, 0.2, 0.1])).abs() < 1e-12);
}

fn mu_entropy(p: &[f64]) -> f64 {
    p.iter().map(|&x| -x * x.ln()).sum()
}

fn problem() -> impl Strategy<Value = (Vec<f64>, Vec<Vec<f64>>)> {
    (2usize..=4).prop_flat_map(|k| {
        (
            prop::collection::vec(0.05..1.0f64, k),
            prop::collection::vec(prop::collection::vec(0.0..1.0f64, k), k),
        )
            .prop_map(|(p, mut c)| {
                let s: f64 = p.iter().sum();
                for (i, row) in c.iter_mut().enumerate() {
                    row[i] = 0.0;
                }
                (p.into_iter().map(|v| v / s).collect(), c)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ba_respects_basic_bounds((px, cost) in problem(), beta in 0.1..20.0f64) {
        let prob = DistortionProblem::from_matrix(px.clone(), cost).unwrap();
        let r = blahut_arimoto(&prob, beta, 1e-12, 50_000).unwrap();
        prop_assert!(r.rate >= -1e-12 && r.rate <= prob.source_entropy() + 1e-9);
        prop_assert!(r.distortion <= prob.constant_distortion().0 + 1e-9);
        prop_assert!((r.output.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rate_and_distortion_functions_invert((px, cost) in problem(), t in 0.1..0.9f64) {
        let prob = DistortionProblem::from_matrix(px, cost).unwrap();
        let solver = RdSolver::new(prob, RdOptions::default()).unwrap();
        let rate = t * solver.max_rate();
        let d = solver.distortion_at(rate).unwrap().distortion;
        prop_assume!(d > 1e-6);
        let back = solver.rate_at(d).unwrap().rate;
        prop_assert!((back - rate).abs() < 1e-3, "R={rate}, D={d}, back={back}");
        let lower = solver.rate_at(d * 1.1).unwrap().rate;
        prop_assert!(lower <= back + 1e-9);
    }
}
