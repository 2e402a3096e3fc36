use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng as _;

use dynsparse::dyndecomp::DynDecomposition;
use dynsparse::expander::{contract, delta_reduce};
use dynsparse::flow::{beta_estimate, max_concurrent, max_throughput, random_instance, SpOracle};
use dynsparse::gen::{cycle_union, random_graph, random_weighted};
use dynsparse::io::{parse_edge_list, parse_trace, write_edge_list, write_trace};
use dynsparse::output::ProblemKind;
use dynsparse::proactive::{NeighborPolicy, SamplerConfig, SamplerState};
use dynsparse::reduction::buckets::bucket_scale;
use dynsparse::reduction::{apply_changes, bucket_by_weight, DynamicSparsifier, MergeSparsifier};
use dynsparse::{DynamicGraph, UpdateKind, VertexId};

fn random_update(g: &DynamicGraph, rng: &mut dynsparse::Rng) -> UpdateKind {
    if g.m() > 0 && rng.random_bool(0.5) {
        let ids = g.edge_ids();
        UpdateKind::DeleteEdge(ids[rng.random_range(0..ids.len())])
    } else {
        let u = rng.random_range(0..g.n());
        let v = rng.random_range(0..g.n());
        UpdateKind::InsertEdge { u: VertexId(u), v: VertexId(v), w: rng.random_range(1.0..8.0) }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn buckets_round_weights_up_by_less_than_half_eps(seed in any::<u64>(), eps in 0.05..1.0f64) {
        let g = random_weighted(10, 30, 100.0, &mut dynsparse::rng(seed));
        let b = bucket_by_weight(&g, eps);
        let r = b.reconstruct(g.n());
        prop_assert_eq!(r.m(), g.m());
        prop_assert_eq!(b.graphs.values().map(DynamicGraph::m).sum::<usize>(), g.m());
        for (id, e) in g.edges() {
            let k = b.index[&id];
            let rounded = r.edge(id).unwrap().w;
            prop_assert_eq!(rounded, bucket_scale(k, eps));
            prop_assert!(rounded >= e.w * (1.0 - 1e-9));
            prop_assert!(rounded < e.w * (eps / 2.0).exp() * (1.0 + 1e-9));
        }
    }

    #[test]
    fn log_replay_reproduces_the_graph(seed in any::<u64>(), steps in 0usize..60) {
        let mut rng = dynsparse::rng(seed);
        let mut g = random_graph(8, 12, &mut rng);
        g.reset_origin();
        for _ in 0..steps {
            let upd = random_update(&g, &mut rng);
            g.apply(upd).unwrap();
        }
        prop_assert!(g.degree_cache_consistent());
        prop_assert_eq!(g.replay().unwrap().edge_multiset(), g.edge_multiset());
    }

    #[test]
    fn change_sets_replay_onto_a_mirror(seed in any::<u64>(), steps in 1usize..40) {
        let mut rng = dynsparse::rng(seed);
        let g = random_weighted(10, 20, 8.0, &mut rng);
        for kind in ProblemKind::ALL {
            let mut s = MergeSparsifier::new(&g, kind, 0.2);
            let mut mirror = s.output().clone();
            for _ in 0..steps {
                let upd = random_update(s.input(), &mut rng);
                let cs = s.apply(&upd).unwrap();
                apply_changes(&mut mirror, &cs).unwrap();
                prop_assert_eq!(mirror.edge_multiset(), s.output().edge_multiset());
            }
        }
    }

    #[test]
    fn decomposition_conserves_edges(seed in any::<u64>(), uniform in any::<bool>(), steps in 1usize..30) {
        let mut rng = dynsparse::rng(seed);
        let g = random_graph(12, 28, &mut rng);
        let (mut d, _) = DynDecomposition::new(&g, 0.2, uniform).unwrap();
        for _ in 0..steps {
            let ids = d.graph().edge_ids();
            if !ids.is_empty() && rng.random_bool(0.6) {
                d.delete(ids[rng.random_range(0..ids.len())]).unwrap();
            } else {
                let a = rng.random_range(0..12);
                let b = (a + rng.random_range(1..12)) % 12;
                d.insert(VertexId(a), VertexId(b), 1.0).unwrap();
            }
            prop_assert!(d.conserved());
            prop_assert!(d.clusters_match_graph());
        }
    }

    #[test]
    fn resampling_stays_within_the_log_schedule(seed in any::<u64>(), round_robin in any::<bool>()) {
        let mut rng = dynsparse::rng(seed);
        let g = cycle_union(10, 4, &mut rng);
        let policy = if round_robin { NeighborPolicy::RoundRobin } else { NeighborPolicy::Bulk };
        let mut st = SamplerState::new(&g, SamplerConfig::desk_for(&g, 0.2).with_policy(policy), dynsparse::rng(seed ^ 1));
        let mut ids = g.edge_ids();
        ids.shuffle(&mut rng);
        for id in ids {
            st.delete(id).unwrap();
        }
        for t in 1..=st.stage() {
            let bound = (t as f64).log2().ceil() as usize + 1;
            for v in 0..g.n() {
                prop_assert!(st.relevant_count(VertexId(v), t) <= bound);
            }
        }
    }

    #[test]
    fn flows_respect_capacities(seed in any::<u64>(), k in 1usize..4, eps in 0.1..0.5f64) {
        let mut rng = dynsparse::rng(seed);
        let (g, pairs) = random_instance(10, 8, k, 6, &mut rng).unwrap();
        let th = max_throughput(&g, &pairs, eps, SpOracle::Exact).unwrap();
        prop_assert!(th.is_feasible());
        prop_assert!(th.paths_valid(&g.graph));
        let beta = beta_estimate(&g, &pairs).unwrap();
        let cc = max_concurrent(&g, &pairs, eps, beta.beta_tilde, SpOracle::Spanner { t: 3.0 }).unwrap();
        prop_assert!(cc.is_feasible());
        prop_assert!(cc.paths_valid(&g.graph));
    }

    #[test]
    fn degree_reduction_round_trips(seed in any::<u64>(), n in 2usize..10, m in 0usize..30) {
        let g = random_graph(n, m, &mut dynsparse::rng(seed));
        let (h, map) = delta_reduce(&g, 9).unwrap();
        let image = h.edge_subgraph(|id, _| !map.internal_edges.contains(&id));
        prop_assert_eq!(contract(&image, &map).unwrap().edge_multiset(), g.edge_multiset());
    }

    #[test]
    fn text_formats_round_trip(seed in any::<u64>(), steps in 0usize..20) {
        let mut rng = dynsparse::rng(seed);
        let g = random_weighted(7, 12, 5.0, &mut rng);
        prop_assert_eq!(parse_edge_list(&write_edge_list(&g)).unwrap().edge_multiset(), g.edge_multiset());
        let mut h = g.clone();
        h.reset_origin();
        for _ in 0..steps {
            let upd = random_update(&h, &mut rng);
            h.apply(upd).unwrap();
        }
        let events: Vec<_> = h.log().iter().map(|e| e.event.clone()).collect();
        prop_assert_eq!(parse_trace(&write_trace(&events)).unwrap(), events);
    }
}
