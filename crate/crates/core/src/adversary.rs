//! Update generators, including adaptive attacks on the sampled output, and
//! the experiment loop that verifies the sampler against them.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::derive::{spanner_bound, spanner_of};
use crate::error::{Error, Result};
use crate::gen::GraphSpec;
use crate::graph::{DynamicGraph, EdgeId, UpdateEvent, UpdateKind, VertexId};
use crate::output::{ProblemKind, SparsifierOutput};
use crate::proactive::{DrawRecord, NeighborPolicy, SamplerConfig, SamplerState};
use crate::verify::{distance_ratios, exact_conductance, sampled_conductance, set_conductance, verify_cut_membership, CutMode, EXACT_CUT_LIMIT};
use crate::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InfoMode {
    OutputOnly,
    /// The view also carries every sample the algorithm has drawn.
    RandomnessAdaptive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum StrategySpec {
    /// Deletes in an order fixed from the initial graph.
    Oblivious,
    /// Resamples the neighbours of `target` until its output edges vanish.
    IsolationAttack { target: usize },
    /// Deletes crossing edges of a planted cut that are absent from the output,
    /// following a many-to-one matching of the outside onto the planted side.
    /// `side = None` plants the first `⌈√n⌉` vertices.
    MatchingCutAttack { side: Option<Vec<usize>> },
    /// Deletes crossing edges of a planted cut that are in the output, down to
    /// the conductance promise. `side = None` plants the first `n/2` vertices.
    CutDrain { side: Option<Vec<usize>> },
}

impl StrategySpec {
    pub fn name(&self) -> &'static str {
        match self {
            StrategySpec::Oblivious => "oblivious",
            StrategySpec::IsolationAttack { .. } => "isolation",
            StrategySpec::MatchingCutAttack { .. } => "matching-cut",
            StrategySpec::CutDrain { .. } => "cut-drain",
        }
    }

    /// Parses `oblivious`, `isolation[:x]`, `matching-cut` or `cut-drain`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        match parts.next().unwrap_or("") {
            "oblivious" => Ok(StrategySpec::Oblivious),
            "isolation" => {
                let target = parts.next().map(|x| x.parse().map_err(|_| Error::Parse(format!("bad target in {s}")))).transpose()?;
                Ok(StrategySpec::IsolationAttack { target: target.unwrap_or(0) })
            }
            "matching-cut" => Ok(StrategySpec::MatchingCutAttack { side: None }),
            "cut-drain" => Ok(StrategySpec::CutDrain { side: None }),
            other => Err(Error::Parse(format!("unknown strategy {other}"))),
        }
    }

    pub fn all_default() -> [StrategySpec; 4] {
        [
            StrategySpec::IsolationAttack { target: 0 },
            StrategySpec::MatchingCutAttack { side: None },
            StrategySpec::CutDrain { side: None },
            StrategySpec::Oblivious,
        ]
    }
}

/// Degree and conductance floors the adversary must not knowingly cross.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Promise {
    pub delta_min: f64,
    pub phi: f64,
}

/// What the adversary may read before choosing an update.
pub struct AdversaryView<'a> {
    pub graph: &'a DynamicGraph,
    pub output: &'a DynamicGraph,
    /// Present only in randomness-adaptive mode.
    pub draws: Option<&'a [DrawRecord]>,
}

impl<'a> AdversaryView<'a> {
    pub fn new(mode: InfoMode, sampler: &'a SamplerState, output: &'a DynamicGraph) -> Self {
        let draws = match mode {
            InfoMode::OutputOnly => None,
            InfoMode::RandomnessAdaptive => Some(sampler.draws()),
        };
        AdversaryView { graph: sampler.graph(), output, draws }
    }
}

pub struct Adversary {
    spec: StrategySpec,
    promise: Promise,
    rng: Rng,
    order: Vec<EdgeId>,
    pos: usize,
    cursor: usize,
    side: Vec<bool>,
    matched: Vec<Option<usize>>,
}

fn planted(n: usize, side: &Option<Vec<usize>>, default_size: usize) -> Vec<bool> {
    let mut s = vec![false; n];
    match side {
        Some(list) => list.iter().for_each(|&v| s[v] = true),
        None => s.iter_mut().take(default_size).for_each(|x| *x = true),
    }
    s
}

/// Most recent sample drawn for each vertex in the log.
fn latest_samples(draws: &[DrawRecord], n: usize) -> Vec<BTreeSet<EdgeId>> {
    let mut out = vec![BTreeSet::new(); n];
    for d in draws {
        out[d.vertex.0] = d.sample.iter().copied().collect();
    }
    out
}

impl Adversary {
    pub fn new(spec: StrategySpec, g: &DynamicGraph, promise: Promise, seed: u64) -> Self {
        let n = g.n();
        let mut rng = crate::rng(seed);
        let mut order = g.edge_ids();
        order.shuffle(&mut rng);
        let sqrt = ((n as f64).sqrt().ceil() as usize).max(1);
        let (side, matched) = match &spec {
            StrategySpec::MatchingCutAttack { side } => {
                let s = planted(n, side, sqrt);
                let inside: Vec<usize> = (0..n).filter(|&v| s[v]).collect();
                let mut k = 0;
                let matched = (0..n)
                    .map(|v| {
                        if s[v] || inside.is_empty() {
                            None
                        } else {
                            k += 1;
                            Some(inside[(k - 1) % inside.len()])
                        }
                    })
                    .collect();
                (s, matched)
            }
            StrategySpec::CutDrain { side } => (planted(n, side, n / 2), vec![None; n]),
            _ => (vec![false; n], vec![None; n]),
        };
        Adversary { spec, promise, rng, order, pos: 0, cursor: 0, side, matched }
    }

    pub fn spec(&self) -> &StrategySpec {
        &self.spec
    }

    pub fn planted_side(&self) -> &[bool] {
        &self.side
    }

    /// Deleting `id` keeps both endpoint degrees at or above the floor.
    fn keeps_degrees(&self, g: &DynamicGraph, id: EdgeId) -> bool {
        let Some(e) = g.edge(id) else { return false };
        if e.is_loop() {
            return g.degree(e.u) - e.w >= self.promise.delta_min;
        }
        g.degree(e.u) - e.w >= self.promise.delta_min && g.degree(e.v) - e.w >= self.promise.delta_min
    }

    /// Deleting the crossing edge `id` keeps the planted cut's conductance at
    /// or above the floor.
    fn keeps_planted(&self, g: &DynamicGraph, id: EdgeId) -> bool {
        let mut h = g.clone();
        h.delete_edge(id).expect("present edge");
        set_conductance(&h, &self.side) >= self.promise.phi
    }

    fn crossing(&self, g: &DynamicGraph, id: EdgeId) -> bool {
        g.edge(id).is_some_and(|e| self.side[e.u.0] != self.side[e.v.0])
    }

    fn pick(&mut self, cands: Vec<EdgeId>) -> Option<EdgeId> {
        if cands.is_empty() {
            None
        } else {
            Some(cands[self.rng.random_range(0..cands.len())])
        }
    }

    fn isolation(&mut self, target: usize, view: &AdversaryView) -> Option<EdgeId> {
        let g = view.graph;
        let x = VertexId(target);
        let nbrs = g.neighbors(x);
        if nbrs.is_empty() {
            return None;
        }
        let samples = view.draws.map(|d| latest_samples(d, g.n()));
        for _ in 0..nbrs.len() {
            let y = nbrs[self.cursor % nbrs.len()];
            let held: Vec<EdgeId> = g
                .incident(x)
                .filter(|&id| g.edge(id).is_some_and(|e| e.other(x) == y) && view.output.contains_edge(id))
                .collect();
            if !held.is_empty() {
                // Knowing the samples, attack whichever endpoint holds the edge.
                let from_x = samples.as_ref().is_some_and(|s| held.iter().all(|id| !s[y.0].contains(id) && s[x.0].contains(id)));
                let (pivot, avoid) = if from_x { (x, y) } else { (y, x) };
                let cands: Vec<EdgeId> = g
                    .incident(pivot)
                    .filter(|&id| g.edge(id).is_some_and(|e| !e.is_loop() && e.other(pivot) != avoid) && self.keeps_degrees(g, id))
                    .collect();
                if let Some(id) = self.pick(cands) {
                    return Some(id);
                }
            }
            self.cursor += 1;
        }
        None
    }

    fn matching_cut(&mut self, view: &AdversaryView) -> Option<EdgeId> {
        let g = view.graph;
        let base: Vec<EdgeId> = g
            .edge_ids()
            .into_iter()
            .filter(|&id| self.crossing(g, id) && !view.output.contains_edge(id) && self.keeps_degrees(g, id))
            .collect();
        let along: Vec<EdgeId> = base
            .iter()
            .copied()
            .filter(|&id| {
                let e = g.edge(id).expect("present");
                self.matched[e.u.0] == Some(e.v.0) || self.matched[e.v.0] == Some(e.u.0)
            })
            .collect();
        for pool in [along, base] {
            let legal: Vec<EdgeId> = pool.into_iter().filter(|&id| self.keeps_planted(g, id)).collect();
            if let Some(id) = self.pick(legal) {
                return Some(id);
            }
        }
        None
    }

    fn cut_drain(&mut self, view: &AdversaryView) -> Option<EdgeId> {
        let g = view.graph;
        let crossing: Vec<EdgeId> =
            g.edge_ids().into_iter().filter(|&id| self.crossing(g, id) && self.keeps_degrees(g, id) && self.keeps_planted(g, id)).collect();
        let (sampled, rest): (Vec<EdgeId>, Vec<EdgeId>) = crossing.into_iter().partition(|&id| view.output.contains_edge(id));
        let first = self.pick(sampled);
        first.or_else(|| self.pick(rest))
    }

    fn oblivious(&mut self, view: &AdversaryView) -> Option<EdgeId> {
        while self.pos < self.order.len() {
            let id = self.order[self.pos];
            self.pos += 1;
            if view.graph.contains_edge(id) && self.keeps_degrees(view.graph, id) {
                return Some(id);
            }
        }
        None
    }

    /// Chooses the next deletion, or fails with `StrategyExhausted` when no
    /// move keeps the promises.
    pub fn next_update(&mut self, view: &AdversaryView) -> Result<UpdateEvent> {
        if view.graph.m() == 0 {
            return Err(Error::StrategyExhausted);
        }
        let pick = match self.spec.clone() {
            StrategySpec::Oblivious => self.oblivious(view),
            StrategySpec::IsolationAttack { target } => self.isolation(target, view),
            StrategySpec::MatchingCutAttack { .. } => self.matching_cut(view),
            StrategySpec::CutDrain { .. } => self.cut_drain(view),
        };
        let id = pick.ok_or(Error::StrategyExhausted)?;
        Ok(UpdateEvent { kind: UpdateKind::DeleteEdge(id), stage: view.graph.stage() + 1 })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub graph: GraphSpec,
    pub graph_seed: u64,
    pub strategy: StrategySpec,
    pub info: InfoMode,
    pub policy: NeighborPolicy,
    /// Conductance promise.
    pub phi: f64,
    /// Degree promise as a fraction of the initial minimum degree.
    pub delta_min_frac: f64,
    pub steps: usize,
    /// Verify every this many stages; 0 verifies the initial state only.
    pub verify_every: usize,
    pub algo_seed: u64,
    pub adversary_seed: u64,
    /// Cuts must satisfy `w̃ ≥ lower·|E(X,X̄)|`.
    pub lower: f64,
    /// Cuts must satisfy `w̃ ≤ upper_c·log₂ n·|E(X,X̄)|`.
    pub upper_c: f64,
    pub check_spanner: bool,
}

impl ExperimentConfig {
    pub fn new(graph: GraphSpec, strategy: StrategySpec, seed: u64) -> Self {
        ExperimentConfig {
            graph,
            graph_seed: seed,
            strategy,
            info: InfoMode::OutputOnly,
            policy: NeighborPolicy::Bulk,
            phi: 0.3,
            delta_min_frac: 0.75,
            steps: 40,
            verify_every: 1,
            algo_seed: seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(1),
            adversary_seed: seed.wrapping_mul(0xc2b2_ae3d_27d4_eb4f).wrapping_add(2),
            lower: 0.5,
            upper_c: 8.0,
            check_spanner: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub stage: usize,
    pub op: String,
    pub h_size: usize,
    pub recourse: usize,
    pub min_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
    pub promise_ok: Option<bool>,
    pub violations: usize,
    pub spanner_stretch: Option<f64>,
}

impl MetricsRow {
    pub const CSV_HEADER: &'static str = "stage,op,|H|,recourse,min_ratio,max_ratio,promise_ok,violations";

    pub fn to_csv(&self) -> String {
        let f = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_default();
        let p = self.promise_ok.map(|b| b.to_string()).unwrap_or_default();
        format!("{},{},{},{},{},{},{},{}", self.stage, self.op, self.h_size, self.recourse, f(self.min_ratio), f(self.max_ratio), p, self.violations)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub stage: usize,
    pub bound: String,
    pub value: f64,
    pub limit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsTrace {
    pub config: ExperimentConfig,
    pub rho: f64,
    pub rows: Vec<MetricsRow>,
    pub events: Vec<UpdateEvent>,
    pub violations: Vec<Violation>,
    /// Verified stages at which the promises held.
    pub promise_stages: usize,
    pub exhausted: bool,
}

impl MetricsTrace {
    pub fn failed(&self) -> bool {
        !self.violations.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(MetricsRow::CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.to_csv());
            s.push('\n');
        }
        s
    }
}

/// Oracle check of the degree and conductance promises on `g`.
pub fn promise_holds(g: &DynamicGraph, promise: Promise) -> Result<bool> {
    if g.min_degree() < promise.delta_min {
        return Ok(false);
    }
    let phi = if g.n() <= EXACT_CUT_LIMIT { exact_conductance(g)?.value } else { sampled_conductance(g, 2000, &mut crate::rng(0)).value };
    Ok(phi >= promise.phi)
}

struct StageCheck {
    min_ratio: f64,
    max_ratio: f64,
    promise_ok: bool,
    stretch: Option<f64>,
    violations: Vec<Violation>,
}

fn check_stage(cfg: &ExperimentConfig, g: &DynamicGraph, sampler: &SamplerState, h: &DynamicGraph, promise: Promise, stage: usize) -> Result<StageCheck> {
    let report = verify_cut_membership(g, h, CutMode::Auto { samples: 2000, seed: stage as u64 })?;
    let promise_ok = promise_holds(g, promise)?;
    let n = g.n();
    let upper = cfg.upper_c * (n.max(2) as f64).log2();
    let mut violations = Vec::new();
    let mut stretch = None;
    if cfg.check_spanner {
        let out = SparsifierOutput::new(ProblemKind::Cut, upper.ln(), h.clone()).with_certificate(cfg.phi);
        let s = spanner_of(&out)?;
        stretch = Some(distance_ratios(g, &s).max_ratio);
    }
    if promise_ok {
        if report.min_ratio < cfg.lower * (1.0 - 1e-9) {
            violations.push(Violation { stage, bound: "lower".into(), value: report.min_ratio, limit: cfg.lower });
        }
        if report.max_ratio > upper * (1.0 + 1e-9) {
            violations.push(Violation { stage, bound: "upper".into(), value: report.max_ratio, limit: upper });
        }
        if let Some(st) = stretch {
            let limit = spanner_bound(upper, sampler.horizon(), cfg.phi);
            if st > limit {
                violations.push(Violation { stage, bound: "stretch".into(), value: st, limit });
            }
        }
    }
    Ok(StageCheck { min_ratio: report.min_ratio, max_ratio: report.max_ratio, promise_ok, stretch, violations })
}

/// Runs the sampler against the configured adversary, verifying at the
/// configured cadence. Promise labels come from the oracle alone.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<MetricsTrace> {
    let g = cfg.graph.build(&mut crate::rng(cfg.graph_seed))?;
    let promise = Promise { delta_min: (g.min_degree() * cfg.delta_min_frac).floor().max(1.0), phi: cfg.phi };
    let scfg = SamplerConfig::desk(g.n(), cfg.phi, promise.delta_min, g.max_degree().max(1.0)).with_policy(cfg.policy);
    let mut sampler = SamplerState::new(&g, scfg, crate::rng(cfg.algo_seed));
    let mut adversary = Adversary::new(cfg.strategy.clone(), &g, promise, cfg.adversary_seed);
    let mut h = sampler.current_sparsifier();
    let mut trace = MetricsTrace {
        config: cfg.clone(),
        rho: sampler.rho(),
        rows: Vec::new(),
        events: Vec::new(),
        violations: Vec::new(),
        promise_stages: 0,
        exhausted: false,
    };
    let record = |trace: &mut MetricsTrace, stage: usize, op: &str, recourse: usize, sampler: &SamplerState, h: &DynamicGraph, verify: bool| -> Result<()> {
        let mut row = MetricsRow { stage, op: op.into(), h_size: h.m(), recourse, min_ratio: None, max_ratio: None, promise_ok: None, violations: 0, spanner_stretch: None };
        if verify {
            let c = check_stage(cfg, sampler.graph(), sampler, h, promise, stage)?;
            row.min_ratio = Some(c.min_ratio);
            row.max_ratio = Some(c.max_ratio);
            row.promise_ok = Some(c.promise_ok);
            row.violations = c.violations.len();
            row.spanner_stretch = c.stretch;
            trace.promise_stages += usize::from(c.promise_ok);
            trace.violations.extend(c.violations);
        }
        trace.rows.push(row);
        Ok(())
    };
    record(&mut trace, 0, "init", h.m(), &sampler, &h, true)?;
    for step in 1..=cfg.steps {
        let ev = {
            let view = AdversaryView::new(cfg.info, &sampler, &h);
            match adversary.next_update(&view) {
                Ok(ev) => ev,
                Err(Error::StrategyExhausted) => {
                    trace.exhausted = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        };
        let UpdateKind::DeleteEdge(id) = ev.kind else { unreachable!("strategies only delete") };
        let cs = sampler.delete(id)?;
        crate::reduction::apply_changes(&mut h, &cs)?;
        trace.events.push(ev);
        let verify = cfg.verify_every > 0 && step % cfg.verify_every == 0;
        record(&mut trace, step, "delete", cs.len(), &sampler, &h, verify)?;
    }
    Ok(trace)
}

/// Runs independent experiments in parallel, in input order.
pub fn run_many(cfgs: &[ExperimentConfig]) -> Result<Vec<MetricsTrace>> {
    cfgs.par_iter().map(run_experiment).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(strategy: StrategySpec, seed: u64) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(GraphSpec::CycleUnion { n: 12, k: 8 }, strategy, seed);
        c.steps = 15;
        c
    }

    #[test]
    fn zero_steps_verify_initial_state_only() {
        let mut c = base(StrategySpec::Oblivious, 1);
        c.steps = 0;
        let t = run_experiment(&c).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert!(t.rows[0].promise_ok.is_some());
    }

    #[test]
    fn oblivious_replays_identically() {
        let c = base(StrategySpec::Oblivious, 4);
        let a = run_experiment(&c).unwrap();
        let b = run_experiment(&c).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn matching_attack_never_deletes_output_edges() {
        let c = base(StrategySpec::MatchingCutAttack { side: None }, 2);
        let g = c.graph.build(&mut crate::rng(c.graph_seed)).unwrap();
        let promise = Promise { delta_min: 10.0, phi: 0.2 };
        let scfg = SamplerConfig::desk(g.n(), 0.3, 12.0, 16.0);
        let mut s = SamplerState::new(&g, scfg, crate::rng(3));
        let mut adv = Adversary::new(c.strategy.clone(), &g, promise, 5);
        for _ in 0..10 {
            let h = s.current_sparsifier();
            let view = AdversaryView::new(InfoMode::OutputOnly, &s, &h);
            let Ok(ev) = adv.next_update(&view) else { break };
            let UpdateKind::DeleteEdge(id) = ev.kind else { panic!() };
            assert!(!h.contains_edge(id));
            assert!(set_conductance(s.graph(), adv.planted_side()) >= 0.2);
            s.delete(id).unwrap();
        }
    }

    #[test]
    fn isolation_targets_neighbour_edges_avoiding_target() {
        let g = crate::gen::cycle_union(10, 6, &mut crate::rng(7));
        let promise = Promise { delta_min: 6.0, phi: 0.1 };
        let s = SamplerState::new(&g, SamplerConfig::desk(10, 0.3, 9.0, 12.0), crate::rng(1));
        let h = s.current_sparsifier();
        let mut adv = Adversary::new(StrategySpec::IsolationAttack { target: 0 }, &g, promise, 9);
        let view = AdversaryView::new(InfoMode::OutputOnly, &s, &h);
        let ev = adv.next_update(&view).unwrap();
        let UpdateKind::DeleteEdge(id) = ev.kind else { panic!() };
        let e = g.edge(id).unwrap();
        assert!(e.u != VertexId(0) && e.v != VertexId(0));
    }

    #[test]
    fn output_only_view_hides_samples() {
        let g = crate::gen::cycle_union(8, 3, &mut crate::rng(0));
        let s = SamplerState::new(&g, SamplerConfig::desk(8, 0.3, 6.0, 6.0), crate::rng(0));
        let h = s.current_sparsifier();
        assert!(AdversaryView::new(InfoMode::OutputOnly, &s, &h).draws.is_none());
        assert!(AdversaryView::new(InfoMode::RandomnessAdaptive, &s, &h).draws.is_some());
    }

    #[test]
    fn degree_floor_exhausts_strategy() {
        let g = crate::gen::cycle_union(6, 1, &mut crate::rng(0));
        let promise = Promise { delta_min: 2.0, phi: 0.1 };
        let s = SamplerState::new(&g, SamplerConfig::desk(6, 0.3, 2.0, 2.0), crate::rng(0));
        let h = s.current_sparsifier();
        let mut adv = Adversary::new(StrategySpec::Oblivious, &g, promise, 0);
        let view = AdversaryView::new(InfoMode::OutputOnly, &s, &h);
        assert_eq!(adv.next_update(&view).unwrap_err(), Error::StrategyExhausted);
    }
}
