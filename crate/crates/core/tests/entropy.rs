use mdimlab::entropy::{
    block_entropy, dynamical_entropy, grid_partition, inf_entropy_small_partitions, info_dim_rate, partition_entropy,
    Partition, PartitionFamily,
};
use mdimlab::measures::{parry, MeasureSpec};
use mdimlab::shift_systems::{golden_mean, Alphabet};
use proptest::prelude::*;

fn normalized(v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

#[test]
fn uniform_masses_give_log_k() {
    for k in 1..10 {
        assert!((partition_entropy(&vec![1.0 / k as f64; k]) - (k as f64).ln()).abs() < 1e-12);
    }
    assert_eq!(partition_entropy(&[1.0, 0.0]), 0.0);
}

#[test]
fn markov_block_entropy_closed_form() {
    // H_n = H(π) + (n - 1) h for a stationary chain
    let mu = MeasureSpec::markov(vec![vec![0.9, 0.1], vec![0.4, 0.6]], Vec::new()).unwrap();
    let pi = [0.8, 0.2];
    let h_pi = partition_entropy(&pi);
    let h = 0.8 * partition_entropy(&[0.9, 0.1]) + 0.2 * partition_entropy(&[0.4, 0.6]);
    let e = dynamical_entropy(&mu, &Partition::points(&mu.alphabet()), 7).unwrap();
    for &(n, hn) in &e.block_entropies {
        assert!((hn - (h_pi + (n - 1) as f64 * h)).abs() < 1e-12, "n={n}");
    }
    assert!((e.conditional - h).abs() < 1e-12);
}

#[test]
fn single_cell_partition_has_no_entropy() {
    let mu = parry(&golden_mean()).unwrap();
    let e = dynamical_entropy(&mu, &Partition::single(&mu.alphabet()), 5).unwrap();
    assert!(e.conditional.abs() < 1e-15);
}

#[test]
fn infimum_below_the_gap_is_the_entropy_rate() {
    let mu = MeasureSpec::bernoulli(vec![0.3, 0.7]).unwrap();
    let r = inf_entropy_small_partitions(&mu, 0.4, &PartitionFamily::default(), 6).unwrap();
    assert!(r.includes_point_partition);
    assert!((r.value - partition_entropy(&[0.3, 0.7])).abs() < 1e-12);
    // above the diameter the single cell is admissible
    let r = inf_entropy_small_partitions(&mu, 1.0, &PartitionFamily::default(), 6).unwrap();
    assert_eq!(r.value, 0.0);
}

#[test]
fn information_dimension_of_a_uniform_grid() {
    let symbols: Vec<f64> = (0..16).map(|k| (2 * k + 1) as f64 / 32.0).collect();
    let mu = MeasureSpec::bernoulli(vec![1.0 / 16.0; 16])
        .unwrap()
        .with_alphabet(&Alphabet::new(symbols).unwrap())
        .unwrap();
    let r = info_dim_rate(&mu, &[2, 4, 8, 16], 1).unwrap();
    for row in &r.rows {
        assert!((row.ratio - 1.0).abs() < 1e-12, "m={}", row.m);
    }
    // finer grids cannot see more than the 16 atoms
    let r = info_dim_rate(&mu, &[32, 64], 1).unwrap();
    assert!((r.rows[1].entropy - 16f64.ln()).abs() < 1e-12);
}

proptest! {
    #[test]
    fn block_entropy_is_subadditive(
        a in prop::collection::vec(0.05..1.0f64, 3),
        b in prop::collection::vec(0.05..1.0f64, 3),
        c in prop::collection::vec(0.05..1.0f64, 3),
        n in 1usize..4,
        m in 1usize..4,
    ) {
        let mu = MeasureSpec::markov(vec![normalized(a), normalized(b), normalized(c)], Vec::new()).unwrap();
        let p = Partition::points(&mu.alphabet());
        let h = |k| block_entropy(&mu, &p, k, 1 << 16).unwrap();
        prop_assert!(h(n + m) <= h(n) + h(m) + 1e-12);
        prop_assert!(h(n) <= h(n + 1) + 1e-12);
    }

    #[test]
    fn coarser_partitions_have_less_entropy(probs in prop::collection::vec(0.05..1.0f64, 4), n in 1usize..4) {
        let mu = MeasureSpec::bernoulli(normalized(probs)).unwrap();
        let alphabet = mu.alphabet();
        let fine = Partition::points(&alphabet);
        let coarse = grid_partition(&alphabet, 2).unwrap();
        prop_assert!(fine.refines(&coarse));
        let hf = block_entropy(&mu, &fine, n, 1 << 16).unwrap();
        let hc = block_entropy(&mu, &coarse, n, 1 << 16).unwrap();
        prop_assert!(hc <= hf + 1e-12);
    }
}
