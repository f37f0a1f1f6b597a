use std::cmp::Ordering;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use factor_matching::bipartite::MatchGraph;
use factor_matching::experiments::{greedy_sparse_subpath, random_family};
use factor_matching::graphs::{GraphFamily, GraphWindow};
use factor_matching::matching::{
    exhaustive_max_matching, find_chains, flip, hopcroft_karp, identity_ranks, select_minimal,
    Census, Engine, MatcherParams, Matching,
};
use factor_matching::order::{psi, psi_decode};

fn tree(depth: usize) -> GraphWindow {
    GraphWindow::build(GraphFamily::regular_tree(3).unwrap(), depth, 0).unwrap()
}

fn graph_strategy(max_side: usize) -> impl Strategy<Value = MatchGraph> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(nl, nr)| {
        proptest::collection::vec((0..nl, 0..nr), 0..3 * (nl + nr)).prop_map(move |mut edges| {
            edges.sort_unstable();
            edges.dedup();
            MatchGraph::from_edges(nl, nr, &edges).unwrap()
        })
    })
}

fn cmp_ratio(
    a: &(num_bigint::BigUint, num_bigint::BigUint),
    b: &(num_bigint::BigUint, num_bigint::BigUint),
) -> Ordering {
    (&a.0 * &b.1).cmp(&(&b.0 * &a.1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn window_edges_are_symmetric(depth in 1usize..6) {
        let w = tree(depth);
        for v in w.vertices() {
            for u in w.neighbors(v) {
                prop_assert!(w.neighbors(u).any(|x| x == v));
            }
        }
    }

    #[test]
    fn balls_are_nested(v in 0usize..94, r in 0usize..5) {
        let w = tree(5);
        let inner = w.ball(v, r).vertices;
        let outer = w.ball(v, r + 1).vertices;
        prop_assert!(inner.iter().all(|x| outer.contains(x)));
        prop_assert!(inner.contains(&v));
    }

    #[test]
    fn distance_is_a_metric(a in 0usize..94, b in 0usize..94, c in 0usize..94) {
        let w = tree(5);
        let d = |x, y| w.distance(x, y).unwrap();
        prop_assert_eq!(d(a, a), 0);
        prop_assert_eq!(d(a, b), d(b, a));
        prop_assert!(d(a, c) <= d(a, b) + d(b, c));
        prop_assert_eq!(d(a, b) == 0, a == b);
    }

    #[test]
    fn psi_follows_lexicographic_order(
        a in proptest::collection::vec(0u64..6, 1..8),
        b in proptest::collection::vec(0u64..6, 1..8),
    ) {
        let len = a.len().min(b.len());
        let (a, b) = (&a[..len], &b[..len]);
        prop_assert_eq!(cmp_ratio(&psi(a), &psi(b)), a.cmp(b));
    }

    #[test]
    fn psi_decodes(a in proptest::collection::vec(0u64..9, 1..10)) {
        let (num, den) = psi(&a);
        prop_assert_eq!(psi_decode(&num, &den, a.len()), Some(a));
    }

    #[test]
    fn matching_oracles_agree(g in graph_strategy(7)) {
        prop_assert_eq!(hopcroft_karp(&g).0, exhaustive_max_matching(&g));
    }

    #[test]
    fn staged_engine_is_maximum(g in graph_strategy(12)) {
        let ranks = identity_ranks(g.left_len().max(g.right_len()));
        let out = Engine::new(&g, &ranks, MatcherParams::default(), Census::all(&g)).run().unwrap();
        out.matching.validate(&g).unwrap();
        prop_assert_eq!(out.matching.size(), hopcroft_karp(&g).0);
    }

    #[test]
    fn sweep_selects_minimal_chains(g in graph_strategy(10), n in 1usize..4) {
        let ranks = identity_ranks(g.left_len().max(g.right_len()));
        let engine = Engine::new(&g, &ranks, MatcherParams::default(), Census::all(&g));
        let mut m = Matching::empty(&g);
        for stage in 1..n {
            for c in engine.sweep(&m, stage).unwrap().selected {
                flip(&g, &mut m, &c).unwrap();
            }
        }
        let chains = find_chains(&g, &m, 4 * n, 1_000_000, n).unwrap();
        let picked: Vec<_> = select_minimal(&g, &chains, &ranks)
            .unwrap()
            .into_iter()
            .map(|i| chains[i].clone())
            .collect();
        prop_assert_eq!(engine.sweep(&m, n).unwrap().selected, picked);
    }

    #[test]
    fn greedy_meets_scaled_conditions(seed in any::<u64>(), r in 1usize..3, sets in 1usize..6) {
        let w = tree(5);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (family, u, v) = random_family(&w, r, sets, 3, &mut rng);
        let out = greedy_sparse_subpath(&w, &family, u, v, r).unwrap();
        prop_assert!(out.scaled_holds());
    }
}
