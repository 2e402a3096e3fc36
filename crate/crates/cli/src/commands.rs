use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use dynsparse::adversary::{run_many, ExperimentConfig, InfoMode, MetricsRow, StrategySpec};
use dynsparse::decomp::{decompose_base, decompose_edges, decompose_uniform, local_graph, Certificate, Cluster};
use dynsparse::expander::{build_explicit_expander, margulis};
use dynsparse::flow::{
    beta_estimate, congestion_round, max_concurrent, max_throughput, DemandPair, SpOracle, VertexCapGraph,
};
use dynsparse::gen::{cycle_union, random_graph, random_trace, random_weighted, GraphSpec};
use dynsparse::io::{parse_edge_list, parse_trace, write_edge_list, write_trace};
use dynsparse::output::ProblemKind;
use dynsparse::proactive::NeighborPolicy;
use dynsparse::prune::{PruneState, WcPruneConfig, WcPruneState};
use dynsparse::reduction::eppstein::tree_depth;
use dynsparse::reduction::growing::GrowingConfig;
use dynsparse::reduction::{
    AmortizedPipeline, DynamicSparsifier, EppsteinTree, Factory, GrowingOutput, MergeSparsifier, PhasedRebuild,
};
use dynsparse::verify::{exact_conductance, verify_spanner, CutMode, EXACT_CUT_LIMIT};
use dynsparse::{DynamicGraph, EdgeId, Error, UpdateEvent, UpdateKind};

use crate::*;

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Gen(a) => gen(a, cli.seed),
        Command::Decompose(a) => decompose(a),
        Command::Prune(a) => prune(a, cli.seed),
        Command::Maintain(a) => maintain(a, cli.seed),
        Command::Trace(a) => trace(a, cli.seed),
        Command::Bench(a) => bench(a, cli.seed),
        Command::Verify(a) => verify(a, cli.seed),
        Command::Flow(a) => flow(a, cli.seed),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    emit(out, &s)
}

fn read_graph(p: &Path) -> Result<DynamicGraph> {
    let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
    parse_edge_list(&text).with_context(|| format!("parsing {}", p.display()))
}

fn read_trace(p: &Path) -> Result<Vec<UpdateEvent>> {
    let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
    parse_trace(&text).with_context(|| format!("parsing {}", p.display()))
}

fn kind_of(k: KindArg) -> ProblemKind {
    match k {
        KindArg::Cut => ProblemKind::Cut,
        KindArg::Spanner => ProblemKind::Spanner,
        KindArg::Spectral => ProblemKind::Spectral,
    }
}

fn op_name(kind: &UpdateKind) -> &'static str {
    match kind {
        UpdateKind::InsertEdge { .. } => "insert",
        UpdateKind::DeleteEdge(_) => "delete",
        UpdateKind::BatchDelete(_) => "batch_delete",
    }
}

fn outcome(ok: bool) -> Outcome {
    if ok {
        Outcome::Success
    } else {
        Outcome::VerificationFailed
    }
}

fn gen(a: &GenArgs, seed: u64) -> Result<Outcome> {
    let mut rng = dynsparse::rng(seed);
    let text = match a.family {
        Family::Expander => write_edge_list(&build_explicit_expander(a.n, a.d)?),
        Family::Margulis => write_edge_list(&margulis(a.k)?),
        Family::Random => write_edge_list(&random_graph(a.n, a.m, &mut rng)),
        Family::Cycles => write_edge_list(&cycle_union(a.n, a.k, &mut rng)),
        Family::Weighted => write_edge_list(&random_weighted(a.n, a.m, a.max_weight.unwrap_or(2f64.exp()), &mut rng)),
        Family::Trace => {
            let g = match &a.g {
                Some(p) => read_graph(p)?,
                None => DynamicGraph::new(a.n),
            };
            write_trace(&random_trace(&g, a.events, a.delete_frac, a.max_weight.unwrap_or(1.0), &mut rng)?)
        }
    };
    emit(a.out.as_deref(), &text)?;
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct ClusterReport {
    /// Global id of each local vertex, in local order.
    vertices: Vec<usize>,
    edges: Vec<usize>,
    conductance: f64,
    exact: bool,
    certified: bool,
    level: Option<usize>,
    file: Option<String>,
}

fn cluster_report(c: &Cluster, cert: &Certificate, phi: f64, level: Option<usize>) -> ClusterReport {
    ClusterReport {
        vertices: c.vertices.iter().map(|v| v.0).collect(),
        edges: c.edge_ids().iter().map(|e| e.0).collect(),
        conductance: cert.conductance,
        exact: cert.exact,
        certified: cert.certifies(phi),
        level,
        file: None,
    }
}

fn decompose(a: &DecomposeArgs) -> Result<Outcome> {
    let g = read_graph(&a.g)?;
    let mut graphs = Vec::new();
    let mut reports = Vec::new();
    let mut crossing = Vec::new();
    match a.mode {
        DecomposeMode::Base => {
            let p = decompose_base(&g, a.phi)?;
            crossing = p.crossing.iter().map(|e| e.0).collect();
            for (part, cert) in p.parts.iter().zip(&p.certificates) {
                let mut vertices = part.clone();
                vertices.sort();
                let inside: BTreeSet<_> = vertices.iter().copied().collect();
                let edges = g.edges().filter(|(_, e)| inside.contains(&e.u) && inside.contains(&e.v));
                let graph = local_graph(&vertices, edges.map(|(id, e)| (id, e.u, e.v, e.w)));
                let c = Cluster { vertices, graph, certificate: cert.clone() };
                reports.push(cluster_report(&c, cert, a.phi, None));
                graphs.push(c.graph);
            }
        }
        DecomposeMode::Edges => {
            for c in decompose_edges(&g, a.phi)?.clusters {
                reports.push(cluster_report(&c, &c.certificate, a.phi, None));
                graphs.push(c.graph);
            }
        }
        DecomposeMode::Uniform => {
            for u in decompose_uniform(&g, a.phi)?.clusters {
                reports.push(cluster_report(&u.cluster, &u.cluster.certificate, a.phi, Some(u.level)));
                graphs.push(u.cluster.graph);
            }
        }
    }
    let mut seen = BTreeSet::new();
    let disjoint = reports.iter().flat_map(|c| &c.edges).chain(&crossing).all(|&e| seen.insert(e));
    let expected: BTreeSet<usize> = match a.mode {
        DecomposeMode::Base => g.edge_ids().iter().map(|e| e.0).collect(),
        _ => g.edges().filter(|(_, e)| !e.is_loop()).map(|(id, _)| id.0).collect(),
    };
    let covered = expected.is_subset(&seen) && seen.iter().all(|&e| g.contains_edge(EdgeId(e)));
    let failed = reports.iter().filter(|c| c.exact && !c.certified).count();
    let ok = disjoint && covered && failed == 0;
    if let Some(dir) = &a.out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (i, (r, h)) in reports.iter_mut().zip(&graphs).enumerate() {
            let name = format!("cluster-{i}.el");
            std::fs::write(dir.join(&name), write_edge_list(h))?;
            r.file = Some(name);
        }
    }
    let manifest = json!({
        "phi": a.phi,
        "mode": format!("{:?}", a.mode).to_lowercase(),
        "clusters": reports,
        "crossing": crossing,
        "edge_disjoint": disjoint,
        "covers_input": covered,
        "uncertified_exact": failed,
        "ok": ok,
    });
    if let Some(dir) = &a.out {
        emit_json(Some(&dir.join("manifest.json")), &manifest)?;
    }
    emit_json(None, &manifest)?;
    Ok(outcome(ok))
}

fn deletion_order(g: &DynamicGraph, trace: Option<&Path>, seed: u64) -> Result<Vec<EdgeId>> {
    match trace {
        Some(p) => {
            let mut ids = Vec::new();
            for ev in read_trace(p)? {
                match ev.kind {
                    UpdateKind::DeleteEdge(id) => ids.push(id),
                    UpdateKind::BatchDelete(batch) => ids.extend(batch),
                    UpdateKind::InsertEdge { .. } => bail!("pruning traces may only delete (stage {})", ev.stage),
                }
            }
            Ok(ids)
        }
        None => {
            let mut ids = g.edge_ids();
            ids.shuffle(&mut dynsparse::rng(seed));
            Ok(ids)
        }
    }
}

fn parse_budget(s: Option<&str>) -> Result<Option<Option<usize>>> {
    match s {
        None => Ok(None),
        Some("none") => Ok(Some(None)),
        Some(x) => Ok(Some(Some(x.parse().with_context(|| format!("bad budget `{x}`"))?))),
    }
}

/// Exact conductance when the graph is small enough to enumerate.
fn small_conductance(g: &DynamicGraph) -> Result<Option<f64>> {
    if g.n() < 2 {
        return Ok(Some(f64::INFINITY));
    }
    if g.n() > EXACT_CUT_LIMIT {
        return Ok(None);
    }
    Ok(Some(exact_conductance(g)?.value))
}

fn prune(a: &PruneArgs, seed: u64) -> Result<Outcome> {
    let g = read_graph(&a.g)?;
    let order = deletion_order(&g, a.trace.as_deref(), seed)?;
    let budget = parse_budget(a.budget.as_deref())?;
    let f = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_default();
    let mut csv = String::from("stage,edge,new,total,volume,bound,survivor_check,ok\n");
    let mut all_ok = true;
    match a.mode {
        PruneModeArg::Amortized | PruneModeArg::Uniform => {
            let uniform = a.mode == PruneModeArg::Uniform;
            let mut s = if uniform { PruneState::uniform(&g, a.phi) } else { PruneState::amortized(&g, a.phi) };
            if let Some(b) = budget {
                s = s.with_budget(b);
            }
            let delta = g.min_degree();
            for (i, &id) in order.iter().enumerate() {
                let before = s.pruned().len();
                s.delete(id)?;
                let step = i + 1;
                let bound = if uniform { 30.0 } else { 8.0 } * step as f64 / a.phi;
                let vol = s.pruned_volume() + 0.0;
                let surv = s.survivor_graph();
                let (check, surv_ok) = if uniform {
                    let d = if surv.n() == 0 { f64::INFINITY } else { surv.min_degree() };
                    (Some(d), d >= a.phi * delta / 18.0)
                } else {
                    let c = small_conductance(&surv)?;
                    (c, c.is_none_or(|c| c >= a.phi / 6.0 * (1.0 - 1e-9)))
                };
                let ok = vol <= bound + 1e-9 && surv_ok;
                all_ok &= ok;
                writeln!(csv, "{step},{},{},{},{vol},{bound:.6},{},{ok}", id.0, s.pruned().len() - before, s.pruned().len(), f(check))?;
            }
        }
        PruneModeArg::Worstcase => {
            let mut cfg = WcPruneConfig { phi: a.phi, gamma: a.gamma, budget: None };
            if let Some(b) = budget {
                cfg.budget = Some(b.unwrap_or(usize::MAX));
            }
            let mut s = WcPruneState::new(&g, cfg)?;
            let limit = g.m().div_ceil(a.gamma.max(1));
            for (i, &id) in order.iter().enumerate() {
                let fresh = s.delete(id)?;
                let step = i + 1;
                let surv = s.survivor();
                let c = small_conductance(&surv.graph)?;
                let mut ok = fresh.len() <= a.gamma && c.is_none_or(|c| c >= (1.0 / a.gamma as f64) * (1.0 - 1e-9));
                if step >= limit {
                    ok &= s.all_pruned();
                }
                all_ok &= ok;
                writeln!(csv, "{step},{},{},{},{},{},{},{ok}", id.0, fresh.len(), s.pruned().len(), s.pruned().len(), a.gamma, f(c))?;
            }
        }
    }
    emit(a.out.as_deref(), &csv)?;
    Ok(outcome(all_ok))
}

fn build_sparsifier(
    g: &DynamicGraph,
    kind: ProblemKind,
    mode: MaintainMode,
    eps: f64,
    phi: f64,
    seed: u64,
) -> Result<Box<dyn DynamicSparsifier>> {
    Ok(match mode {
        MaintainMode::Amortized => Box::new(AmortizedPipeline::new(g, kind, eps, phi, seed)?),
        MaintainMode::Growing => Box::new(GrowingOutput::new(g, kind, GrowingConfig::new(eps, phi), seed)?),
        MaintainMode::Phased => {
            let factory: Factory = Arc::new(move |g: &DynamicGraph| {
                Ok(Box::new(GrowingOutput::new(g, kind, GrowingConfig::new(eps, phi), seed ^ g.m() as u64)?)
                    as Box<dyn DynamicSparsifier>)
            });
            Box::new(PhasedRebuild::new(g, kind, eps, None, factory)?)
        }
        MaintainMode::Eppstein => {
            let inner = eps / tree_depth(g.n(), 2) as f64;
            let factory: Factory =
                Arc::new(move |g: &DynamicGraph| Ok(Box::new(MergeSparsifier::new(g, kind, inner)) as Box<dyn DynamicSparsifier>));
            Box::new(EppsteinTree::new(g, kind, 2, g.n(), factory)?)
        }
        MaintainMode::Merge => Box::new(MergeSparsifier::new(g, kind, eps)),
    })
}

fn start_graph(g: Option<&Path>, n: Option<usize>, events: &[UpdateEvent]) -> Result<DynamicGraph> {
    if let Some(p) = g {
        return read_graph(p);
    }
    let inferred = events
        .iter()
        .filter_map(|e| match e.kind {
            UpdateKind::InsertEdge { u, v, .. } => Some(u.0.max(v.0) + 1),
            _ => None,
        })
        .max();
    match n.or(inferred) {
        Some(n) => Ok(DynamicGraph::new(n)),
        None => bail!("no --g given and the trace inserts nothing; pass --n"),
    }
}

fn maintain(a: &MaintainArgs, seed: u64) -> Result<Outcome> {
    let events = read_trace(&a.trace)?;
    let g = start_graph(a.g.as_deref(), a.n, &events)?;
    let kind = kind_of(a.kind);
    let mut s = build_sparsifier(&g, kind, a.mode, a.eps, a.phi, seed)?;
    let mut csv = format!("{}\n", MetricsRow::CSV_HEADER);
    let mut all_ok = true;
    let mut violations = 0;
    for (i, ev) in events.iter().enumerate() {
        let cs = s.apply(&ev.kind).with_context(|| format!("applying stage {}", ev.stage))?;
        let mut row = MetricsRow {
            stage: ev.stage as usize,
            op: op_name(&ev.kind).into(),
            h_size: s.output().m(),
            recourse: cs.len(),
            min_ratio: None,
            max_ratio: None,
            promise_ok: None,
            violations: 0,
            spanner_stretch: None,
        };
        if a.verify_every > 0 && (i + 1) % a.verify_every == 0 {
            let eps = s.eps();
            match kind.report(s.input(), s.output(), CutMode::default()) {
                Ok(r) => {
                    let ok = if kind == ProblemKind::Spanner { r.within(1.0, eps.exp()) } else { r.within_eps(eps) };
                    row.min_ratio = Some(r.min_ratio);
                    row.max_ratio = Some(r.max_ratio);
                    row.violations = usize::from(!ok);
                }
                Err(Error::KernelMismatch) => row.violations = 1,
                Err(e) => return Err(e.into()),
            }
        }
        all_ok &= row.violations == 0;
        violations += row.violations;
        csv.push_str(&row.to_csv());
        csv.push('\n');
    }
    emit(a.out.as_deref(), &csv)?;
    let eps = s.eps();
    let (lo, hi) = if kind == ProblemKind::Spanner { (1.0, eps.exp()) } else { ((-eps).exp(), eps.exp()) };
    let mut body = json!({
        "kind": kind.name(),
        "events": events.len(),
        "eps": eps,
        "lower": lo,
        "upper": hi,
        "input_edges": s.input().m(),
        "output_edges": s.output().m(),
        "violations": violations,
    });
    let final_ok = match kind.report(s.input(), s.output(), CutMode::default()) {
        Ok(r) => {
            let ok = r.within(lo, hi);
            body["report"] = serde_json::to_value(&r)?;
            ok
        }
        Err(e @ Error::KernelMismatch) => {
            body["error"] = e.to_string().into();
            false
        }
        Err(e) => return Err(e.into()),
    };
    all_ok &= final_ok;
    body["ok"] = all_ok.into();
    match (&a.report, &a.out) {
        (Some(p), _) => emit_json(Some(p), &body)?,
        (None, Some(_)) => emit_json(None, &body)?,
        (None, None) => {}
    }
    Ok(outcome(all_ok))
}

fn strategies(s: &str) -> Result<Vec<StrategySpec>> {
    if s == "all" {
        Ok(StrategySpec::all_default().to_vec())
    } else {
        s.split(',').map(|x| StrategySpec::parse(x.trim()).map_err(Into::into)).collect()
    }
}

fn trace(a: &TraceArgs, seed: u64) -> Result<Outcome> {
    let spec = GraphSpec::parse(&a.graph)?;
    let mut cfgs = Vec::new();
    for s in seed..seed + a.seeds {
        for strategy in strategies(&a.strategy)? {
            let mut c = ExperimentConfig::new(spec.clone(), strategy, s);
            c.steps = a.steps;
            c.phi = a.phi;
            c.verify_every = a.verify_every;
            c.info = match a.info {
                InfoArg::Output => InfoMode::OutputOnly,
                InfoArg::Randomness => InfoMode::RandomnessAdaptive,
            };
            c.policy = match a.policy {
                PolicyArg::Bulk => NeighborPolicy::Bulk,
                PolicyArg::RoundRobin => NeighborPolicy::RoundRobin,
            };
            cfgs.push(c);
        }
    }
    let traces = run_many(&cfgs)?;
    if let Some(dir) = &a.out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for t in &traces {
            let stem = format!("{}-seed{}", t.config.strategy.name(), t.config.graph_seed);
            std::fs::write(dir.join(format!("{stem}.csv")), t.to_csv())?;
            std::fs::write(dir.join(format!("{stem}.jsonl")), write_trace(&t.events))?;
        }
    }
    let failed = traces.iter().filter(|t| t.violations.iter().any(|v| v.bound != "stretch")).count();
    let stretch = traces.iter().flat_map(|t| &t.violations).filter(|v| v.bound == "stretch").count();
    let rate = failed as f64 / traces.len().max(1) as f64;
    let ok = rate <= a.max_failure_rate && stretch == 0;
    let runs: Vec<_> = traces
        .iter()
        .map(|t| {
            json!({
                "strategy": t.config.strategy.name(),
                "seed": t.config.graph_seed,
                "stages": t.rows.len(),
                "promise_stages": t.promise_stages,
                "exhausted": t.exhausted,
                "violations": t.violations,
            })
        })
        .collect();
    emit_json(
        None,
        &json!({
            "graph": a.graph,
            "runs": runs,
            "failed_runs": failed,
            "failure_rate": rate,
            "stretch_violations": stretch,
            "ok": ok,
        }),
    )?;
    Ok(outcome(ok))
}

#[derive(Serialize)]
struct BenchRun {
    seed: u64,
    build_ms: f64,
    update_us_mean: f64,
    recourse_mean: f64,
    final_output_size: usize,
}

fn bench(a: &BenchArgs, seed: u64) -> Result<Outcome> {
    let spec = GraphSpec::parse(&a.graph)?;
    let kind = kind_of(a.kind);
    let runs: Vec<BenchRun> = (seed..seed + a.seeds)
        .into_par_iter()
        .map(|s| -> Result<BenchRun> {
            let mut rng = dynsparse::rng(s);
            let g = spec.build(&mut rng)?;
            let max_w = if g.is_unweighted() { 1.0 } else { g.weight_ratio() };
            let events = random_trace(&g, a.events, 0.5, max_w, &mut rng)?;
            let t0 = Instant::now();
            let mut sp = build_sparsifier(&g, kind, a.mode, a.eps, a.phi, s)?;
            let build_ms = t0.elapsed().as_secs_f64() * 1e3;
            let t1 = Instant::now();
            let mut recourse = 0;
            for ev in &events {
                recourse += sp.apply(&ev.kind)?.len();
            }
            let per = events.len().max(1) as f64;
            Ok(BenchRun {
                seed: s,
                build_ms,
                update_us_mean: t1.elapsed().as_secs_f64() * 1e6 / per,
                recourse_mean: recourse as f64 / per,
                final_output_size: sp.output().m(),
            })
        })
        .collect::<Result<_>>()?;
    emit_json(
        a.out.as_deref(),
        &json!({
            "kind": kind.name(),
            "mode": format!("{:?}", a.mode).to_lowercase(),
            "graph": a.graph,
            "events": a.events,
            "runs": runs,
        }),
    )?;
    Ok(Outcome::Success)
}

fn verify(a: &VerifyArgs, seed: u64) -> Result<Outcome> {
    let g = read_graph(&a.g)?;
    let h = read_graph(&a.h)?;
    if g.n() != h.n() {
        bail!("graphs have {} and {} vertices", g.n(), h.n());
    }
    let kind = kind_of(a.kind);
    let mode = match a.cut_mode {
        CutModeArg::Auto => CutMode::Auto { samples: a.samples, seed },
        CutModeArg::Exact => CutMode::Exact,
        CutModeArg::Sampled => CutMode::Sampled { samples: a.samples, seed },
    };
    let (lo, hi) = match (kind, a.t, a.eps) {
        (ProblemKind::Spanner, Some(t), _) => (1.0, t),
        (ProblemKind::Spanner, None, Some(e)) => (1.0, e.exp()),
        (_, _, Some(e)) => ((-e).exp(), e.exp()),
        (ProblemKind::Spanner, None, None) => bail!("spanner verification needs --t or --eps"),
        _ => bail!("{} verification needs --eps", kind.name()),
    };
    let report = match kind {
        ProblemKind::Spanner => verify_spanner(&g, &h),
        _ => kind.report(&g, &h, mode),
    };
    let (body, ok) = match report {
        Ok(r) => {
            let ok = r.within(lo, hi);
            (json!({ "kind": kind.name(), "lower": lo, "upper": hi, "accuracy": r.accuracy(), "report": r, "ok": ok }), ok)
        }
        Err(e @ (Error::KernelMismatch | Error::NotSubgraph(..))) => {
            (json!({ "kind": kind.name(), "lower": lo, "upper": hi, "error": e.to_string(), "ok": false }), false)
        }
        Err(e) => return Err(e.into()),
    };
    emit_json(a.out.as_deref(), &body)?;
    Ok(outcome(ok))
}

fn read_lines(p: &Path) -> Result<Vec<(usize, Vec<String>)>> {
    let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
    Ok(text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i, l.split_whitespace().map(String::from).collect()))
        .collect())
}

fn field<T: std::str::FromStr>(parts: &[String], i: usize, line: usize, name: &str) -> Result<T> {
    let tok = parts.get(i).with_context(|| format!("line {line}: missing {name}"))?;
    tok.parse().map_err(|_| anyhow::anyhow!("line {line}: bad {name} `{tok}`"))
}

fn flow(a: &FlowArgs, seed: u64) -> Result<Outcome> {
    let graph = read_graph(&a.g)?;
    let mut cap = vec![1.0; graph.n()];
    if let Some(p) = &a.caps {
        for (line, parts) in read_lines(p)? {
            let v: usize = field(&parts, 0, line, "vertex")?;
            let c: f64 = field(&parts, 1, line, "capacity")?;
            *cap.get_mut(v).with_context(|| format!("line {line}: vertex {v} out of range"))? = c;
        }
    }
    let mut pairs = Vec::new();
    for (line, parts) in read_lines(&a.pairs)? {
        let d = if parts.len() > 2 { field(&parts, 2, line, "demand")? } else { 1.0 };
        pairs.push(DemandPair::new(field(&parts, 0, line, "s")?, field(&parts, 1, line, "t")?, d)?);
    }
    if pairs.is_empty() {
        bail!("no demand pairs in {}", a.pairs.display());
    }
    let g = VertexCapGraph::new(graph, cap)?.with_terminals(&pairs);
    let oracle = match a.sp {
        SpArg::Exact => SpOracle::Exact,
        SpArg::Spanner => SpOracle::Spanner { t: a.stretch },
    };
    let (state, beta) = match a.mode {
        FlowMode::Throughput => (max_throughput(&g, &pairs, a.eps, oracle)?, None),
        FlowMode::Concurrent => {
            let est = beta_estimate(&g, &pairs)?;
            let b = a.beta.unwrap_or(est.beta_tilde);
            (max_concurrent(&g, &pairs, a.eps, b, oracle)?, Some(json!({ "beta_tilde": b, "estimate": est })))
        }
    };
    let ok = state.is_feasible() && state.paths_valid(&g.graph);
    let rounding = if a.round {
        let r = congestion_round(&state.normalized()?, &mut dynsparse::rng(seed))?;
        Some(r)
    } else {
        None
    };
    let commodities: Vec<_> = state
        .commodities
        .iter()
        .map(|c| {
            json!({
                "s": c.pair.s.0,
                "t": c.pair.t.0,
                "demand": c.pair.demand,
                "value": c.value(),
                "paths": c.paths.iter().map(|p| json!({
                    "vertices": p.path.iter().map(|v| v.0).collect::<Vec<_>>(),
                    "flow": p.flow,
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    emit_json(
        a.out.as_deref(),
        &json!({
            "mode": format!("{:?}", a.mode).to_lowercase(),
            "eps": a.eps,
            "alpha": state.alpha,
            "delta": state.delta,
            "total_value": state.total_value(),
            "lambda": state.lambda,
            "congestion": state.congestion(),
            "feasible": ok,
            "metrics": {
                "augmentations": state.augmentations,
                "sp_calls": state.sp_calls,
                "demand_doublings": state.demand_doublings,
            },
            "beta": beta,
            "commodities": commodities,
            "rounding": rounding,
        }),
    )?;
    Ok(outcome(ok))
}
