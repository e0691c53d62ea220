use pmcert::matching::{components, hall_witness, has_no_augmenting_path, max_matching, neighborhood};
use pmcert::model::{generate, one_round_graph, BipartiteDigraph, ModelParams, Threshold};
use pmcert::rng::{trial_seed, Side};
use proptest::prelude::*;

fn brute_force(graph: &BipartiteDigraph) -> usize {
    fn go(graph: &BipartiteDigraph, row: usize, used: u32) -> usize {
        if row == graph.n() {
            return 0;
        }
        let mut best = go(graph, row + 1, used);
        for &j in graph.row_neighbors(row) {
            if used & (1 << j) == 0 {
                best = best.max(1 + go(graph, row + 1, used | (1 << j)));
            }
        }
        best
    }
    go(graph, 0, 0)
}

fn edges(graph: &BipartiteDigraph) -> Vec<(usize, u32)> {
    (0..graph.n())
        .flat_map(|i| graph.row_neighbors(i).iter().map(move |&j| (i, j)))
        .collect()
}

#[test]
fn hopcroft_karp_matches_exhaustive_search() {
    let thresholds = [Threshold::Finite(0), Threshold::Finite(1), Threshold::Infinite];
    let mut deficient = 0;
    for s in 0..500u64 {
        let seed = trial_seed(99, s);
        let n = 1 + (seed % 8) as usize;
        let m = thresholds[(seed >> 8) as usize % 3];
        let g = generate(&ModelParams::new(n, m, seed).unwrap());
        let mm = max_matching(&g);
        assert_eq!(mm.size, brute_force(&g), "seed {seed}, n {n}, m {m}");
        if !mm.is_perfect() {
            deficient += 1;
        }
    }
    // The instances must actually exercise the non-perfect branch.
    assert!(deficient > 0, "only {deficient} deficient instances");
}

#[test]
fn one_round_graphs_against_exhaustive_search() {
    let mut deficient = 0;
    for s in 0..200u64 {
        let n = 1 + (s % 8) as usize;
        let g = one_round_graph(n, trial_seed(5, s)).unwrap();
        let mm = max_matching(&g);
        assert_eq!(mm.size, brute_force(&g));
        deficient += usize::from(!mm.is_perfect());
    }
    assert!(deficient > 20, "only {deficient} deficient instances");
}

#[test]
fn unpopular_fraction_matches_binomial_tail() {
    let n = 10_000usize;
    let seeds = 100u64;
    let nf = n as f64;
    // P(Bin(n, 1/n) <= 1) = (1 - 1/n)^(n-1) (2 - 1/n).
    let p = (1.0 - 1.0 / nf).powf(nf - 1.0) * (2.0 - 1.0 / nf);
    let mut total = 0usize;
    for s in 0..seeds {
        let g = generate(&ModelParams::new(n, 1, trial_seed(17, s)).unwrap());
        total += g.unpopular_count(Side::Row);
    }
    let trials = nf * seeds as f64;
    let frac = total as f64 / trials;
    let se = (p * (1.0 - p) / trials).sqrt();
    assert!((frac - p).abs() < 3.0 * se, "fraction {frac}, expected {p} +- {se}");
    assert!((p - 2.0 / std::f64::consts::E).abs() < 1e-4);
}

#[test]
fn mutual_pairs_give_two_components() {
    let g = BipartiteDigraph::from_selections(vec![0, 1], vec![0, 1], vec![None, None], vec![None, None]).unwrap();
    let comps = components(&g);
    assert_eq!(comps.len(), 2);
    assert!(comps.iter().all(|c| c.rows == 1 && c.cols == 1));
}

#[test]
fn shared_unique_neighbour_witness() {
    // Rows 0 and 1 only see column 0; row 2 owns columns 1 and 2.
    let g = BipartiteDigraph::from_selections(vec![0, 0, 1], vec![0, 2, 2], vec![None; 3], vec![None; 3]).unwrap();
    let w = hall_witness(&g).unwrap();
    assert_eq!(w.side, Side::Row);
    assert_eq!(w.k, vec![0, 1]);
    assert_eq!(w.l, vec![0]);
}

fn threshold() -> impl Strategy<Value = Threshold> {
    prop_oneof![(0u32..4).prop_map(Threshold::Finite), Just(Threshold::Infinite)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn matching_is_valid_and_maximum(n in 1usize..60, m in threshold(), seed: u64) {
        let g = generate(&ModelParams::new(n, m, seed).unwrap());
        let mm = max_matching(&g);
        prop_assert!(mm.is_valid_for(&g));
        prop_assert!(has_no_augmenting_path(&g, &mm));
        prop_assert_eq!(&mm, &max_matching(&g));
    }

    #[test]
    fn arbitrary_selections_against_exhaustive_search(
        picks in (1usize..=8).prop_flat_map(|n| (
            prop::collection::vec(0..n as u32, n),
            prop::collection::vec(0..n as u32, n),
            prop::collection::vec(prop::option::of(0..n as u32), n),
            prop::collection::vec(prop::option::of(0..n as u32), n),
        ))
    ) {
        let (r1, c1, r2, c2) = picks;
        let g = BipartiteDigraph::from_selections(r1, c1, r2, c2).unwrap();
        let mm = max_matching(&g);
        prop_assert_eq!(mm.size, brute_force(&g));
        if let Some(w) = hall_witness(&g) {
            prop_assert_eq!(neighborhood(&g, w.side, &w.k), w.l);
        }
    }

    #[test]
    fn witnesses_recount(n in 1usize..60, m in 0u32..2, seed: u64) {
        let g = generate(&ModelParams::new(n, m, seed).unwrap());
        let mm = max_matching(&g);
        match hall_witness(&g) {
            None => prop_assert!(mm.is_perfect()),
            Some(w) => {
                let gamma = neighborhood(&g, w.side, &w.k);
                prop_assert_eq!(&gamma, &w.l);
                prop_assert!(gamma.len() < w.k.len());
                prop_assert_eq!(w.l.len() + 1, w.k.len());
                prop_assert!(mm.size + w.deficiency() <= n);
                prop_assert!(w.minimal);
            }
        }
    }

    #[test]
    fn selection_process_invariants(n in 1usize..80, m in threshold(), seed: u64) {
        let params = ModelParams::new(n, m, seed).unwrap();
        let g = generate(&params);
        prop_assert_eq!(&g, &generate(&params));
        for side in [Side::Row, Side::Col] {
            let indeg = g.round1_in_degrees(side);
            let second = match side { Side::Row => &g.round2_row, Side::Col => &g.round2_col };
            for v in 0..n {
                prop_assert_eq!(second[v].is_some(), m.admits(indeg[v]));
                let d = g.out_degree(side, v);
                prop_assert!(d == 1 || d == 2);
            }
        }
        let total: usize = components(&g).iter().map(|c| c.size()).sum();
        prop_assert_eq!(total, 2 * n);
    }

    #[test]
    fn edges_grow_with_threshold(n in 1usize..80, m in 0u32..4, seed: u64) {
        let small = edges(&generate(&ModelParams::new(n, m, seed).unwrap()));
        let large = edges(&generate(&ModelParams::new(n, m + 1, seed).unwrap()));
        let inf = edges(&generate(&ModelParams::new(n, Threshold::Infinite, seed).unwrap()));
        prop_assert!(small.iter().all(|e| large.binary_search(e).is_ok()));
        prop_assert!(large.iter().all(|e| inf.binary_search(e).is_ok()));
        // Past the largest in-degree every vertex is unpopular.
        let big = edges(&generate(&ModelParams::new(n, n as u32, seed).unwrap()));
        prop_assert_eq!(big, inf);
    }

    #[test]
    fn one_round_is_round_one_of_generate(n in 1usize..80, seed: u64) {
        let g1 = one_round_graph(n, seed).unwrap();
        let g = generate(&ModelParams::new(n, 0, seed).unwrap());
        prop_assert_eq!(&g1.round1_row, &g.round1_row);
        prop_assert_eq!(&g1.round1_col, &g.round1_col);
        prop_assert!((0..n).all(|v| g1.out_degree(Side::Row, v) == 1 && g1.out_degree(Side::Col, v) == 1));
    }
}
