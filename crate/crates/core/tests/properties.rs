mod common;

use std::collections::BTreeSet;

use gramsim::baseline::{simulate_baseline, BaselineSimulation, IndexedGraph};
use gramsim::genbench::{gen_graph, gen_pattern, GraphGenParams, PatternGenParams};
use gramsim::sim::{GrammarSimulation, SimIndex, SimOptions};
use gramsim::{GraphGrammar, Label, LabeledGraph, PathMap};
use proptest::prelude::*;

use common::*;

fn graph(max_nodes: usize, max_labels: usize, max_edge_factor: usize) -> impl Strategy<Value = LabeledGraph> {
    (1..=max_nodes, 1..=max_labels).prop_flat_map(move |(n, k)| {
        (
            prop::collection::vec(0..k, n),
            prop::collection::vec((0..n, 0..n), 0..=max_edge_factor * n),
        )
            .prop_map(|(labels, edges)| build_graph(&labels, &edges))
    })
}

/// Graphs built from repeated copies of one small graph, so compression
/// produces nested rules.
fn redundant_graph() -> impl Strategy<Value = LabeledGraph> {
    (2..=5usize, 2..=6usize, 1..=3usize, any::<u64>())
        .prop_map(|(base, copies, labels, seed)| {
            gen_graph(&GraphGenParams {
                base_nodes: base,
                variations: copies,
                delete_fraction: 0.3,
                edges_per_node: 1.2,
                labels,
                seed,
            })
            .unwrap_or_default()
        })
        .prop_filter("graph has nodes", |g| !g.is_empty())
}

fn any_graph() -> impl Strategy<Value = LabeledGraph> {
    prop_oneof![graph(40, 3, 2), redundant_graph()]
}

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig {
        cases: n,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(cases(200))]

    #[test]
    fn decompression_restores_the_graph(g in any_graph()) {
        let (gg, map) = compressed(&g);
        let (h, _) = gg.decompress().unwrap();
        prop_assert!(h.isomorphic_under_map(&g, &map.to_hash_map()));
        prop_assert!(map.is_bijective());
    }

    #[test]
    fn compression_is_valid_and_never_grows(g in any_graph()) {
        let (gg, _) = compressed(&g);
        prop_assert_eq!(gg.validate(), vec![]);
        prop_assert!(gg.size() <= g.node_count() + g.edge_count());
    }

    #[test]
    fn grammar_and_map_text_round_trip(g in any_graph()) {
        let (gg, map) = compressed(&g);
        let parsed = GraphGrammar::parse(&gg.to_text()).unwrap();
        prop_assert_eq!(&parsed, &gg);
        let idx = gg.index().unwrap();
        prop_assert_eq!(PathMap::parse(&map.to_text(&idx), &idx).unwrap(), map);
    }

    #[test]
    fn edge_list_round_trip(g in graph(30, 4, 3)) {
        prop_assert_eq!(LabeledGraph::parse(&g.to_edge_list()).unwrap(), g);
    }

    #[test]
    fn grammar_engine_agrees_with_baseline(g in any_graph(), q in graph(4, 3, 2)) {
        let (gg, map) = compressed(&g);
        let ix = SimIndex::new(&gg).unwrap();
        let base = simulate_baseline(&g, &q).unwrap();
        for optimized in [false, true] {
            let r = GrammarSimulation::new(&ix, &q, SimOptions { optimized }).unwrap().run();
            prop_assert_eq!(&expand_mapped(&r, ix.grammar(), &map), &base);
            for set in r.sets().values() {
                prop_assert!(set.is_subsumption_free());
            }
        }
        let indexed = IndexedGraph::new(&g);
        prop_assert_eq!(&indexed.simulate(&q).unwrap(), &base);
        prop_assert_eq!(&indexed.simulate_bitset(&q).unwrap(), &base);
    }

    #[test]
    fn reference_engine_steps_in_lockstep_with_baseline(g in any_graph(), q in graph(4, 3, 2)) {
        let (gg, map) = compressed(&g);
        let ix = SimIndex::new(&gg).unwrap();
        let mut gs = GrammarSimulation::new(&ix, &q, SimOptions::default()).unwrap();
        let mut bs = BaselineSimulation::new(&g, &q).unwrap();
        loop {
            let (a, b) = (gs.step(), bs.step());
            prop_assert_eq!(a, b);
            if a.is_none() {
                break;
            }
            for u in q.node_ids() {
                let rep: BTreeSet<_> = rep_of(ix.grammar(), &gs.candidates(u).unwrap())
                    .into_iter()
                    .map(|v| map.get(v).unwrap())
                    .collect();
                prop_assert_eq!(&rep, bs.candidates(u).unwrap());
            }
        }
    }

    #[test]
    fn baseline_result_satisfies_successor_condition(g in graph(25, 3, 3), q in graph(4, 3, 2)) {
        let r = simulate_baseline(&g, &q).unwrap();
        for (&u, vs) in &r {
            for &v in vs {
                prop_assert_eq!(g.label(v), q.label(u));
                for (_, u2) in q.edges().filter(|&(s, _)| s == u) {
                    prop_assert!(g.edges().any(|(s, v2)| s == v && r[&u2].contains(&v2)));
                }
            }
        }
    }

    #[test]
    fn generators_are_pure_functions_of_the_seed(
        base in 1..20usize, copies in 1..8usize, labels in 1..5usize, seed in any::<u64>(),
        pn in 1..7usize, pe in 0..10usize,
    ) {
        let p = GraphGenParams { base_nodes: base, variations: copies, delete_fraction: 0.5, edges_per_node: 1.25, labels, seed };
        let first = gen_graph(&p);
        prop_assert_eq!(&first, &gen_graph(&p));
        let Ok(g) = first else { return Ok(()) };
        prop_assert!(g.node_count() <= base * copies);
        prop_assume!(!g.is_empty());
        let alphabet: Vec<Label> = g.alphabet().into_iter().collect();
        let pp = PatternGenParams { nodes: pn, edges: pe.min(pn * pn), seed };
        let a = gen_pattern(&pp, &alphabet).unwrap();
        prop_assert_eq!(&a, &gen_pattern(&pp, &alphabet).unwrap());
        prop_assert_eq!(a.graph.node_count(), pn);
        prop_assert_eq!(a.graph.edge_count(), pp.edges);
    }
}

proptest! {
    #![proptest_config(cases(64))]

    #[test]
    fn baseline_result_is_the_greatest_simulation(g in graph(5, 2, 2), q in graph(3, 2, 2)) {
        prop_assert_eq!(simulate_baseline(&g, &q).unwrap(), brute_force_simulation(&g, &q));
    }
}

proptest! {
    #![proptest_config(cases(300))]

    #[test]
    fn suffix_algebra_matches_node_sets(seed in any::<u64>()) {
        algebra_case(seed).map_err(TestCaseError::fail)?;
    }
}
