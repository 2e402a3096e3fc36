//! Acceptance suite: one test per criterion, each printing a single
//! pass/fail line to stderr (bypassing output capture) before asserting.

use std::io::Write as _;
use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng as _;

use dynsparse::adversary::{run_many, ExperimentConfig, InfoMode, StrategySpec};
use dynsparse::derive::{SpectralConfig, SpectralQuery};
use dynsparse::dyndecomp::DynDecomposition;
use dynsparse::expander::{build_explicit_expander, contract, delta_reduce};
use dynsparse::flow::{
    beta_estimate, congestion_round, max_concurrent, max_flow_oracle, max_throughput, random_instance, SpOracle,
};
use dynsparse::gen::{cycle_union, random_graph, random_weighted, GraphSpec};
use dynsparse::output::ProblemKind;
use dynsparse::proactive::{NeighborPolicy, SamplerConfig, SamplerState};
use dynsparse::prune::{PruneState, WcPruneConfig, WcPruneState};
use dynsparse::reduction::growing::GrowingConfig;
use dynsparse::reduction::{
    apply_changes, check_law, AmortizedPipeline, DynamicSparsifier, EppsteinTree, Factory, GrowingOutput, Law,
    MergeSparsifier, Phase, PhasedRebuild,
};
use dynsparse::verify::{exact_conductance, normalized_lambda2, verify_spectral};
use dynsparse::{DynamicGraph, EdgeId, UpdateKind, VertexId};

fn print_line(id: u32, pass: bool, started: Instant, detail: &str) {
    let line = format!(
        "criterion {id:>2}: {} ({:.1}s) {detail}\n",
        if pass { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
    std::io::stderr().write_all(line.as_bytes()).expect("stderr is writable");
}

fn report(id: u32, pass: bool, started: Instant, detail: String) {
    print_line(id, pass, started, &detail);
    assert!(pass, "criterion {id} failed: {detail}");
}

#[test]
fn criterion_01_explicit_expanders() {
    let t = Instant::now();
    let mut bad = 0;
    for (n, d) in [(16, 16), (64, 16), (100, 32)] {
        let g = build_explicit_expander(n, d).unwrap();
        bad += g.degrees().iter().filter(|&&x| x < (d - 8) as f64 || x > (2 * d) as f64).count();
    }
    let phi = exact_conductance(&build_explicit_expander(16, 16).unwrap()).unwrap().value;
    report(1, bad == 0 && phi >= 0.1, t, format!("degree violations {bad}, exact conductance of H(16,16) {phi:.4}"));
}

#[test]
fn criterion_02_degree_reduction() {
    let t = Instant::now();
    let mut rng = dynsparse::rng(2);
    let (mut size_bad, mut trip_bad, mut phi_bad, mut phi_checked) = (0, 0, 0, 0);
    for _ in 0..200 {
        let n = rng.random_range(2..=12);
        let m = rng.random_range(0..=40);
        let g = random_graph(n, m, &mut rng);
        let (h, map) = delta_reduce(&g, 9).unwrap();
        if h.n() as f64 > 2.0 * n as f64 + g.m() as f64 / 9.0 {
            size_bad += 1;
        }
        let image = h.edge_subgraph(|id, _| !map.internal_edges.contains(&id));
        if contract(&image, &map).map(|c| c.edge_multiset()) != Ok(g.edge_multiset()) {
            trip_bad += 1;
        }
        if h.n() <= 18 {
            phi_checked += 1;
            let pg = exact_conductance(&g).unwrap().value;
            let ph = exact_conductance(&h).unwrap().value;
            if ph < 0.05 * pg * (1.0 - 1e-9) {
                phi_bad += 1;
            }
        }
    }
    report(
        2,
        size_bad + trip_bad + phi_bad == 0,
        t,
        format!("size violations {size_bad}, round-trip mismatches {trip_bad}, conductance violations {phi_bad}/{phi_checked}"),
    );
}

/// Sparse expander on at most 16 vertices, with `φ` its exact conductance.
fn prune_instance(seed: u64) -> (DynamicGraph, f64) {
    let mut rng = dynsparse::rng(seed);
    loop {
        let n = rng.random_range(10..=16);
        let g = cycle_union(n, rng.random_range(2..=4), &mut rng);
        let phi = exact_conductance(&g).unwrap().value;
        if phi >= 0.1 {
            return (g, phi.min(0.5));
        }
    }
}

/// Deletion order: edges around a few target vertices first, then the rest.
fn targeted_order(g: &DynamicGraph, rng: &mut dynsparse::Rng) -> Vec<EdgeId> {
    let mut targets: Vec<usize> = (0..g.n()).collect();
    targets.shuffle(rng);
    targets.truncate(rng.random_range(1..=3));
    let mut near: Vec<EdgeId> = Vec::new();
    let mut far: Vec<EdgeId> = Vec::new();
    for (id, e) in g.edges() {
        if targets.contains(&e.u.0) || targets.contains(&e.v.0) {
            near.push(id);
        } else {
            far.push(id);
        }
    }
    near.shuffle(rng);
    far.shuffle(rng);
    near.extend(far);
    near
}

#[test]
fn criterion_03_pruning_contracts() {
    let t = Instant::now();
    let gamma = 16;
    let (mut amortized_bad, mut uniform_bad, mut wc_bad, mut pruned_total) = (0, 0, 0, 0);
    for seed in 0..100u64 {
        let (g, phi) = prune_instance(seed);
        let mut rng = dynsparse::rng(1000 + seed);
        let order = targeted_order(&g, &mut rng);

        let mut s = PruneState::amortized(&g, phi).with_budget(None);
        let mut prev: Vec<VertexId> = Vec::new();
        for (i, &id) in order.iter().enumerate() {
            if s.delete(id).is_err() {
                break;
            }
            let i = i + 1;
            let monotone = s.pruned().starts_with(&prev);
            prev = s.pruned().to_vec();
            let vol_ok = s.pruned_volume() <= 8.0 * i as f64 / phi + 1e-9;
            let surv = s.survivor_graph();
            let phi_ok = surv.n() < 2 || exact_conductance(&surv).unwrap().value >= phi / 6.0 * (1.0 - 1e-9);
            amortized_bad += usize::from(!(monotone && vol_ok && phi_ok));
        }

        let mut u = PruneState::uniform(&g, phi).with_budget(None);
        let delta = g.min_degree();
        for (i, &id) in order.iter().enumerate() {
            if u.delete(id).is_err() {
                break;
            }
            let vol_ok = u.pruned_volume() <= 30.0 * (i + 1) as f64 / phi + 1e-9;
            let surv = u.survivor_graph();
            let deg_ok = surv.n() == 0 || surv.min_degree() >= phi * delta / 18.0;
            uniform_bad += usize::from(!(vol_ok && deg_ok));
        }
        pruned_total += s.pruned().len() + u.pruned().len();

        let cfg = WcPruneConfig { phi, gamma, budget: Some(g.m()) };
        let mut w = WcPruneState::new(&g, cfg).unwrap();
        let steps = g.m().div_ceil(gamma);
        for &id in &order[..steps] {
            let fresh = w.delete(id).unwrap();
            let surv = w.survivor();
            let phi_ok =
                surv.graph.n() < 2 || exact_conductance(&surv.graph).unwrap().value >= (1.0 / gamma as f64) * (1.0 - 1e-9);
            wc_bad += usize::from(!(fresh.len() <= gamma && phi_ok));
        }
        wc_bad += usize::from(!w.all_pruned());
    }
    report(
        3,
        amortized_bad + uniform_bad + wc_bad == 0,
        t,
        format!("violations amortized {amortized_bad}, uniform {uniform_bad}, worst-case {wc_bad}; {pruned_total} vertices pruned by the two amortized modes over 100 traces"),
    );
}

#[test]
fn criterion_04_dynamic_decomposition() {
    let t = Instant::now();
    let phi = 0.2;
    let mut bad = 0;
    let mut clusters_seen = 0;
    for seed in 0..10u64 {
        let uniform = seed % 2 == 1;
        let mut rng = dynsparse::rng(seed);
        let g = random_graph(16, 40, &mut rng);
        let (mut d, _) = DynDecomposition::new(&g, phi, uniform).unwrap();
        for _ in 0..100 {
            let ids = d.graph().edge_ids();
            if !ids.is_empty() && rng.random_bool(0.5) {
                d.delete(ids[rng.random_range(0..ids.len())]).unwrap();
            } else {
                let a = rng.random_range(0..16);
                let b = (a + rng.random_range(1..16)) % 16;
                d.insert(VertexId(a), VertexId(b), 1.0).unwrap();
            }
            let certs_ok = d.clusters().all(|c| {
                clusters_seen += 1;
                let cert = c.live_certificate();
                cert.exact && cert.conductance >= phi / 6.0 * (1.0 - 1e-9)
            });
            let ok = d.conserved() && d.clusters_match_graph() && certs_ok && d.logs_deletion_only() && d.companions_consistent();
            bad += usize::from(!ok);
        }
    }
    report(4, bad == 0, t, format!("violating events {bad} of 1000, {clusters_seen} cluster certificates checked"));
}

fn relevant_violations(st: &SamplerState) -> usize {
    let mut bad = 0;
    for t in 1..=st.stage() {
        let bound = (t as f64).log2().ceil() as usize + 1;
        bad += (0..st.graph().n()).filter(|&v| st.relevant_count(VertexId(v), t) > bound).count();
    }
    bad
}

fn permutations(items: &[EdgeId]) -> Vec<Vec<EdgeId>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

#[test]
fn criterion_05_resampling_schedule() {
    let t = Instant::now();
    let mut bad = 0;
    let mut traces = 0;
    let k4 = DynamicGraph::from_edges(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)]).unwrap();
    for policy in [NeighborPolicy::Bulk, NeighborPolicy::RoundRobin] {
        for order in permutations(&k4.edge_ids()) {
            let cfg = SamplerConfig::desk_for(&k4, 0.3).with_policy(policy);
            let mut st = SamplerState::new(&k4, cfg, dynsparse::rng(traces as u64));
            for id in order {
                st.delete(id).unwrap();
            }
            bad += relevant_violations(&st);
            traces += 1;
        }
        for seed in 0..20u64 {
            let mut rng = dynsparse::rng(seed);
            let g = cycle_union(12, 6, &mut rng);
            let cfg = SamplerConfig::desk_for(&g, 0.2).with_policy(policy);
            let mut st = SamplerState::new(&g, cfg, dynsparse::rng(seed + 7));
            let mut ids = g.edge_ids();
            ids.shuffle(&mut rng);
            for id in ids {
                st.delete(id).unwrap();
            }
            bad += relevant_violations(&st);
            traces += 1;
        }
    }
    report(5, bad == 0, t, format!("{bad} (vertex, horizon) violations over {traces} full traces"));
}

#[test]
fn criterion_06_07_adaptive_cut_sparsifier_and_spanner() {
    let t = Instant::now();
    let spec = GraphSpec::CycleUnion { n: 16, k: 30 };
    let mut cfgs = Vec::new();
    for seed in 0..50u64 {
        for strategy in StrategySpec::all_default() {
            let mut cfg = ExperimentConfig::new(spec.clone(), strategy, seed);
            cfg.info = InfoMode::RandomnessAdaptive;
            cfgs.push(cfg);
        }
    }
    let weakest = (0..50u64)
        .map(|s| exact_conductance(&spec.build(&mut dynsparse::rng(s)).unwrap()).unwrap().value)
        .fold(f64::INFINITY, f64::min);
    let traces = run_many(&cfgs).unwrap();
    let cut_failed = traces.iter().filter(|tr| tr.violations.iter().any(|v| v.bound != "stretch")).count();
    let stretch = traces.iter().flat_map(|tr| &tr.violations).filter(|v| v.bound == "stretch").count();
    let promise_stages: usize = traces.iter().map(|tr| tr.promise_stages).sum();
    let (lo, hi) = traces
        .iter()
        .flat_map(|tr| tr.rows.iter().filter(|r| r.promise_ok == Some(true)))
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r.min_ratio.unwrap()), hi.max(r.max_ratio.unwrap())));
    let worst_stretch = traces
        .iter()
        .flat_map(|tr| tr.rows.iter().filter(|r| r.promise_ok == Some(true)))
        .filter_map(|r| r.spanner_stretch)
        .fold(0.0f64, f64::max);
    let rate = cut_failed as f64 / traces.len() as f64;
    let detail = format!(
        "seed-level failure rate {cut_failed}/{} = {:.3}; {promise_stages} promise stages, cut ratios in [{lo:.3}, {hi:.3}], weakest exact conductance {weakest:.3}",
        traces.len(),
        rate
    );
    let stretch_detail = format!("{stretch} stretch violations, worst stretch {worst_stretch:.2} over the same runs");
    let ok6 = rate <= 0.02 && weakest >= 0.3;
    let ok7 = stretch == 0;
    print_line(6, ok6, t, &detail);
    print_line(7, ok7, t, &stretch_detail);
    assert!(ok6, "criterion 6 failed: {detail}");
    assert!(ok7, "criterion 7 failed: {stretch_detail}");
}

#[test]
fn criterion_08_oblivious_spectral() {
    let t = Instant::now();
    let eps = 0.5;
    let (mut fresh_ok, mut pruned_ok) = (0, 0);
    for seed in 0..100u64 {
        let mut rng = dynsparse::rng(seed);
        let g = cycle_union(64, 24, &mut rng);
        let phi = normalized_lambda2(&g) / 2.0;
        let mut q = SpectralQuery::new(&g, eps, phi, SpectralConfig::default()).unwrap();
        let h = q.query(&mut rng).unwrap();
        fresh_ok += usize::from(verify_spectral(&g, &h.graph).unwrap().within_eps(eps));
        let mut wc = WcPruneState::new(&g, WcPruneConfig { phi: 0.2, gamma: 16, budget: None }).unwrap();
        let mut ids = g.edge_ids();
        ids.shuffle(&mut rng);
        for &id in &ids[..20] {
            let fresh = wc.delete(id).unwrap();
            q.delete(id, &fresh).unwrap();
        }
        let h = q.query(&mut rng).unwrap();
        pruned_ok += usize::from(verify_spectral(q.graph(), &h.graph).unwrap().within_eps(eps));
    }
    report(
        8,
        fresh_ok >= 95 && pruned_ok >= 95,
        t,
        format!("pencil within [e^-0.5, e^0.5] in {fresh_ok}/100 fresh and {pruned_ok}/100 after 20 pruned deletions"),
    );
}

#[test]
fn criterion_09_property_laws() {
    let t = Instant::now();
    let mut rng = dynsparse::rng(9);
    let mut bad = Vec::new();
    let mut total = 0;
    for law in Law::ALL {
        for kind in ProblemKind::ALL {
            for _ in 0..200 {
                let c = check_law(law, kind, &mut rng).unwrap();
                total += 1;
                if !c.holds {
                    bad.push(format!("{}/{}", law.name(), kind.name()));
                }
            }
        }
    }
    report(9, bad.is_empty(), t, format!("{} violations over {total} instances {bad:?}", bad.len()));
}

fn random_update(g: &DynamicGraph, rng: &mut dynsparse::Rng, max_w: f64, min_m: usize) -> UpdateKind {
    let n = g.n();
    if g.m() > min_m && rng.random_bool(0.5) {
        let ids = g.edge_ids();
        UpdateKind::DeleteEdge(ids[rng.random_range(0..ids.len())])
    } else {
        let u = rng.random_range(0..n);
        let v = (u + rng.random_range(1..n)) % n;
        UpdateKind::InsertEdge { u: VertexId(u), v: VertexId(v), w: (rng.random::<f64>() * max_w.ln()).exp() }
    }
}

/// Applies one update and checks change-set replay and membership.
fn step_ok(s: &mut dyn DynamicSparsifier, mirror: &mut DynamicGraph, upd: &UpdateKind, eps: f64) -> bool {
    let cs = s.apply(upd).unwrap();
    apply_changes(mirror, &cs).unwrap();
    mirror.edge_multiset() == s.output().edge_multiset() && s.kind().contains(s.input(), s.output(), eps).unwrap()
}

#[test]
fn criterion_10_composition_pipelines() {
    let t = Instant::now();
    let w = 2f64.exp();

    let mut amortized_bad = 0;
    for kind in ProblemKind::ALL {
        let mut rng = dynsparse::rng(10);
        let g = random_weighted(16, 48, w, &mut rng);
        let mut p = AmortizedPipeline::new(&g, kind, 0.5, 0.1, 3).unwrap();
        let mut mirror = p.output().clone();
        amortized_bad += usize::from(!kind.contains(p.input(), p.output(), p.eps()).unwrap());
        for _ in 0..50 {
            let upd = random_update(p.input(), &mut rng, w, 8);
            let eps = {
                let cs = p.apply(&upd).unwrap();
                apply_changes(&mut mirror, &cs).unwrap();
                p.eps()
            };
            let ok = mirror.edge_multiset() == p.output().edge_multiset() && kind.contains(p.input(), p.output(), eps).unwrap();
            amortized_bad += usize::from(!ok || !p.decompositions_consistent());
        }
    }

    let inner_eps = 0.1;
    let mut tree_bad = 0;
    for kind in ProblemKind::ALL {
        let mut rng = dynsparse::rng(11);
        let g = random_weighted(16, 40, w, &mut rng);
        let factory: Factory =
            Arc::new(move |g: &DynamicGraph| Ok(Box::new(MergeSparsifier::new(g, kind, inner_eps)) as Box<dyn DynamicSparsifier>));
        let mut tree = EppsteinTree::new(&g, kind, 2, 8, factory).unwrap();
        let mut mirror = tree.output().clone();
        assert_eq!(tree.depth(), 3);
        for _ in 0..100 {
            let upd = random_update(tree.input(), &mut rng, w, 8);
            let ok = step_ok(&mut tree, &mut mirror, &upd, 3.0 * inner_eps);
            tree_bad += usize::from(!ok || !tree.unions_consistent());
        }
    }

    let mut phased_bad = 0;
    let mut events = 0;
    for kind in ProblemKind::ALL {
        let mut rng = dynsparse::rng(12);
        let g = cycle_union(16, 4, &mut rng);
        let factory: Factory = Arc::new(move |g: &DynamicGraph| {
            Ok(Box::new(GrowingOutput::new(g, kind, GrowingConfig::new(1.0, 0.1), g.m() as u64)?) as Box<dyn DynamicSparsifier>)
        });
        let mut p = PhasedRebuild::new(&g, kind, 1.0, None, factory).unwrap();
        let mut mirror = p.output().clone();
        for _ in 0..2 * p.cycle_len() {
            let upd = random_update(p.input(), &mut rng, 1.0 + 1e-12, 24);
            let upd = match upd {
                UpdateKind::InsertEdge { u, v, .. } => UpdateKind::InsertEdge { u, v, w: 1.0 },
                other => other,
            };
            let eps = p.eps();
            let ok = step_ok(&mut p, &mut mirror, &upd, eps);
            let out = p.phases().iter().filter(|&&x| x != Phase::Serve).count();
            let cap_ok = p.last_step().moves <= p.last_step().move_cap;
            phased_bad += usize::from(!(ok && out <= 1 && cap_ok));
            events += 1;
        }
    }

    report(
        10,
        amortized_bad + tree_bad + phased_bad == 0,
        t,
        format!("violations amortized {amortized_bad}/153, tree {tree_bad}/300, phased {phased_bad}/{events}"),
    );
}

#[test]
fn criterion_11_flows() {
    let t = Instant::now();
    let mut infeasible = 0;
    let mut augmentations = 0;
    for seed in 0..20u64 {
        let mut rng = dynsparse::rng(seed);
        let (g, pairs) = random_instance(14, 12, 2, 8, &mut rng).unwrap();
        let th = max_throughput(&g, &pairs, 0.2, SpOracle::Exact).unwrap();
        let beta = beta_estimate(&g, &pairs).unwrap();
        let oracle = if seed % 2 == 0 { SpOracle::Exact } else { SpOracle::Spanner { t: 2.0 } };
        let cc = max_concurrent(&g, &pairs, 0.2, beta.beta_tilde, oracle).unwrap();
        augmentations += th.augmentations + cc.augmentations;
        for st in [&th, &cc] {
            infeasible += usize::from(!(st.is_feasible() && st.paths_valid(&g.graph)));
        }
    }

    let eps = 0.1;
    let mut short = Vec::new();
    let mut worst: f64 = f64::INFINITY;
    for seed in 0..20u64 {
        let mut rng = dynsparse::rng(100 + seed);
        let n = rng.random_range(10..=30);
        let (g, pairs) = random_instance(n, n, 1, 10, &mut rng).unwrap();
        let st = max_throughput(&g, &pairs, eps, SpOracle::Exact).unwrap();
        let opt = max_flow_oracle(&g.with_terminals(&pairs), pairs[0].s, pairs[0].t);
        let ratio = st.total_value() / opt;
        worst = worst.min(ratio);
        infeasible += usize::from(!st.is_feasible());
        augmentations += st.augmentations;
        if ratio < 1.0 - 3.0 * eps {
            short.push(seed);
        }
    }

    // Two equal paths: each sampled with probability one half.
    let g = DynamicGraph::from_edges(4, [(0, 1, 1.0), (1, 3, 1.0), (0, 2, 1.0), (2, 3, 1.0)]).unwrap();
    let g = dynsparse::flow::VertexCapGraph::new(g, vec![f64::INFINITY, 1.0, 1.0, f64::INFINITY]).unwrap();
    let pairs = [dynsparse::flow::DemandPair::new(0, 3, 1.0).unwrap()];
    let st = max_throughput(&g, &pairs, 0.2, SpOracle::Exact).unwrap().normalized().unwrap();
    let weights: Vec<f64> = st.commodities[0].paths.iter().map(|p| p.flow).collect();
    let trials = 10_000;
    let mut counts = vec![0usize; weights.len()];
    let mut rng = dynsparse::rng(11);
    for _ in 0..trials {
        counts[congestion_round(&st, &mut rng).unwrap().choices[0]] += 1;
    }
    let within = weights.iter().zip(&counts).all(|(&p, &c)| {
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        (c as f64 - trials as f64 * p).abs() <= 3.0 * sigma
    });

    report(
        11,
        infeasible == 0 && short.is_empty() && within && weights.len() == 2,
        t,
        format!(
            "infeasible outputs {infeasible}; single-pair worst value/max-flow {worst:.3} (seeds below 1-3eps {short:?}); {augmentations} monotone length updates; rounding weights {weights:.3?} counts {counts:?}"
        ),
    );
}
