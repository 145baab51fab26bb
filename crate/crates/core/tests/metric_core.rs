use mdimlab::metric_core::{
    bowen_distance, covering_number, greedy_upper_bound, growth_from_counts, lebesgue_cover, lebesgue_number,
    packing_lower_bound, tame_growth_diagnostic, Cover, CoverOptions, DistTable, FiniteMetricSystem, GrowthPoint,
    Metric, RateMethod,
};
use mdimlab::shift_systems::build_rotation;
use proptest::prelude::*;

fn plane_system(xy: &[(f64, f64)], perm: &[usize]) -> FiniteMetricSystem {
    let table = DistTable::from_fn(xy.len(), |i, j| {
        let (a, b) = (xy[i], xy[j]);
        (a.0 - b.0).hypot(a.1 - b.1)
    });
    FiniteMetricSystem::from_table(table, perm.to_vec(), "plane").unwrap()
}

fn points_and_perm(max: usize) -> impl Strategy<Value = (Vec<(f64, f64)>, Vec<usize>)> {
    (2..=max).prop_flat_map(|n| {
        (
            prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), n),
            Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
        )
    })
}

/// Smallest cover by diameter-`<= eps` sets, trying every family size in turn.
fn cover_by_search<M: Metric>(m: &M, eps: f64) -> usize {
    let p = m.size();
    let sets: Vec<u32> = (1u32..1 << p)
        .filter(|&s| {
            (0..p).all(|i| s >> i & 1 == 0 || (0..p).all(|j| s >> j & 1 == 0 || m.dist(i, j) <= eps))
        })
        .collect();
    let full = (1u32 << p) - 1;
    fn go(sets: &[u32], full: u32, covered: u32, left: usize) -> bool {
        if covered == full {
            return true;
        }
        if left == 0 {
            return false;
        }
        let first = (!covered).trailing_zeros();
        sets.iter()
            .filter(|&&s| s >> first & 1 == 1)
            .any(|&s| go(sets, full, covered | s, left - 1))
    }
    (1..=p).find(|&k| go(&sets, full, 0, k)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_count_matches_search((xy, perm) in points_and_perm(8), eps in 0.05..0.9f64) {
        let sys = plane_system(&xy, &perm);
        let opts = CoverOptions::default();
        let c = covering_number(&sys, eps, &opts).unwrap();
        prop_assert_eq!(c.value(), Some(cover_by_search(&sys, eps)));
        let b = sys.bowen(2).unwrap();
        let cb = covering_number(&b, eps, &opts).unwrap();
        prop_assert_eq!(cb.value(), Some(cover_by_search(&b, eps)));
        prop_assert!(packing_lower_bound(&sys, eps, &opts) <= c.lower);
        prop_assert!(greedy_upper_bound(&sys, eps, &opts).unwrap() >= c.upper);
    }

    #[test]
    fn counts_shrink_as_eps_grows((xy, perm) in points_and_perm(10), e1 in 0.05..0.5f64, e2 in 0.0..0.5f64) {
        let sys = plane_system(&xy, &perm);
        let opts = CoverOptions::default();
        let small = covering_number(&sys, e1, &opts).unwrap();
        let large = covering_number(&sys, e1 + e2, &opts).unwrap();
        prop_assert!(large.upper <= small.lower);
    }

    #[test]
    fn bowen_distance_grows_with_n((xy, perm) in points_and_perm(10), i in 0usize..10, j in 0usize..10) {
        let sys = plane_system(&xy, &perm);
        let (i, j) = (i % sys.points(), j % sys.points());
        let mut prev = 0.0;
        for n in 1..=5 {
            let d = bowen_distance(&sys, i, j, n).unwrap();
            let direct = (0..n)
                .map(|k| {
                    let (mut a, mut b) = (i, j);
                    for _ in 0..k {
                        a = sys.map(a);
                        b = sys.map(b);
                    }
                    sys.dist(a, b)
                })
                .fold(0.0, f64::max);
            prop_assert_eq!(d, direct);
            prop_assert!(d >= prev);
            prev = d;
        }
    }

    #[test]
    fn lebesgue_cover_meets_both_bounds((xy, perm) in points_and_perm(24), eps in 0.02..1.0f64) {
        let sys = plane_system(&xy, &perm);
        let cover = lebesgue_cover(&sys, eps).unwrap();
        prop_assert!(cover.diameter(&sys) <= eps);
        if !cover.has_whole_space() {
            prop_assert!(lebesgue_number(&sys, &cover) >= eps / 4.0);
        }
    }
}

#[test]
fn lebesgue_number_of_a_split_line() {
    let sys = FiniteMetricSystem::line(vec![0.0, 0.1, 0.2, 0.7, 0.8], "line").unwrap();
    let cover = Cover::new(5, vec![vec![0, 1, 2], vec![3, 4]]).unwrap();
    assert!((lebesgue_number(&sys, &cover) - 0.5).abs() < 1e-12);
    let overlapping = Cover::new(5, vec![vec![0, 1, 2, 3], vec![2, 3, 4]]).unwrap();
    // points 2 and 3 each see 0.6 from their better set
    assert!((lebesgue_number(&sys, &overlapping) - 0.6).abs() < 1e-12);
}

#[test]
fn rotation_counts_do_not_grow() {
    let sys = build_rotation(3, 20).unwrap();
    let opts = CoverOptions::default();
    let base = covering_number(&sys, 0.1, &opts).unwrap();
    for n in 2..=4 {
        let c = covering_number(&sys.bowen(n).unwrap(), 0.1, &opts).unwrap();
        assert_eq!(c.lower, base.lower);
        assert_eq!(c.upper, base.upper);
    }
}

#[test]
fn exponential_counts_give_their_rate() {
    let pts: Vec<GrowthPoint> = (1..=8).map(|n| GrowthPoint::exact(n, n as f64 * 3f64.ln() + 0.7)).collect();
    for method in [RateMethod::SlopeFit, RateMethod::FeketeMin] {
        let s = growth_from_counts(0.1, pts.clone(), method).unwrap();
        let expect = if method == RateMethod::SlopeFit { 3f64.ln() } else { 3f64.ln() + 0.7 / 8.0 };
        assert!((s.rate - expect).abs() < 1e-12, "{method:?}: {}", s.rate);
    }
}

#[test]
fn polynomial_log_counts_are_tame() {
    let counts: Vec<(f64, f64)> = (1..=12).map(|k| (2f64.powi(-k), (k as f64 * 2f64.ln()).ln().max(0.0))).collect();
    let t = tame_growth_diagnostic(&counts, &[0.5, 1.0]).unwrap();
    assert!(t.verdicts.iter().all(|v| v.trends_to_zero), "{:?}", t.verdicts);
    assert_eq!(t.rows.len(), 24);
}
