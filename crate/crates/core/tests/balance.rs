use balsp::balance::{claim_window_violations, find_balance, rough_balance};
use balsp::generate;
use balsp::oracles::{balance_check, beta_by_bottleneck, beta_oracle, Xi};
use proptest::prelude::*;

#[test]
fn find_balance_matches_oracles_on_random_graphs() {
    for seed in 0..150u64 {
        let mut rng = generate::rng(seed);
        let n = 2 + seed as usize % 60;
        let hi = if seed % 3 == 0 { 5 } else { 1_000_000 };
        let g = generate::strongly_connected(&mut rng, n, n * (1 + seed as usize % 6), 1, hi);
        let fb = find_balance(&g).unwrap();
        let costs = g.costs();
        assert_eq!(fb.beta, beta_oracle(&g, &costs).unwrap(), "seed {seed}");
        assert_eq!(
            fb.beta,
            beta_by_bottleneck(&g, &costs).unwrap(),
            "seed {seed}"
        );
        let m = g.arc_count();
        assert!(fb.stats.arcs_per_depth.iter().all(|&x| x <= m));
        assert!(fb.stats.depth() <= (usize::BITS - m.leading_zeros()) as usize + 1);
    }
}

#[test]
fn rough_balance_is_seven_n_squared_balanced() {
    for seed in 0..150u64 {
        let mut rng = generate::rng(seed);
        let n = 2 + seed as usize % 60;
        let g = if seed % 2 == 0 {
            generate::strongly_connected(&mut rng, n, 3 * n, 1, 1_000_000_000)
        } else {
            generate::multiscale(&mut rng, n, 3 * n, 40)
        };
        let rb = rough_balance(&g).unwrap();
        let reduced = rb.potential.reduced_costs(&g).unwrap();
        assert!(reduced.iter().all(|&c| c > 0));
        let report = balance_check(&g, &reduced, Xi::integer(7 * rb.n * rb.n));
        assert!(report.passed, "seed {seed}: {report:?}");
        assert!(
            claim_window_violations(&g, &rb).unwrap().is_empty(),
            "seed {seed}"
        );
    }
}

#[test]
fn four_cycle_example() {
    use balsp::{Arc, Graph};
    let g = Graph::new(
        4,
        [
            Arc::new(0, 1, 1),
            Arc::new(1, 2, 1),
            Arc::new(2, 3, 1),
            Arc::new(3, 0, 8),
        ],
    )
    .unwrap();
    let rb = rough_balance(&g).unwrap();
    let reduced = rb.potential.reduced_costs(&g).unwrap();
    assert_eq!(reduced.iter().sum::<i128>(), 48 * 11);
    assert!(balance_check(&g, &reduced, Xi::integer(7 * 16)).passed);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn find_balance_equals_oracle(seed in any::<u64>(), n in 2usize..20, extra in 0usize..40) {
        let mut rng = generate::rng(seed);
        let g = generate::strongly_connected(&mut rng, n, n + extra, 1, 9);
        prop_assert_eq!(find_balance(&g).unwrap().beta, beta_oracle(&g, &g.costs()).unwrap());
    }
}
