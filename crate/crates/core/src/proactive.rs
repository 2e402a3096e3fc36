//! Cut sparsifier for decremental near-uniform-degree expanders that stays
//! accurate against adaptive deletions by resampling vertices proactively.
//!
//! Each vertex keeps its own sample `S_v` of incident edges; the output is
//! `⋃ S_v` at weight `1/ρ` plus the pruned overlay at weight 1. A deletion
//! at stage `t` schedules its endpoints for resampling at `t + ⌈(1+ε)^i⌉`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ChangeSet, DynamicGraph, Edge, EdgeId, VertexId};
use crate::Rng;

/// Sample each index of `0..universe` independently with probability `p`,
/// skipping geometric gaps so the cost tracks the output size.
pub fn subset_sample<R: rand::Rng + ?Sized>(universe: usize, p: f64, rng: &mut R) -> Vec<usize> {
    if p <= 0.0 || universe == 0 {
        return Vec::new();
    }
    if p >= 1.0 {
        return (0..universe).collect();
    }
    let log_q = (1.0 - p).ln();
    let mut out = Vec::new();
    let mut next = 0usize;
    loop {
        let u: f64 = 1.0 - rng.random::<f64>();
        let skip = (u.ln() / log_q).floor();
        if !skip.is_finite() || skip >= (universe - next) as f64 {
            break;
        }
        next += skip as usize;
        out.push(next);
        next += 1;
        if next >= universe {
            break;
        }
    }
    out
}

/// How a vertex whose degree drops reschedules its neighbours.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NeighborPolicy {
    /// Every `ζ` incident deletions, all neighbours at once.
    Bulk,
    /// After every incident deletion, a window of about `Δ_max/ζ` neighbours.
    RoundRobin,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub alpha: f64,
    pub phi: f64,
    pub delta_min: f64,
    pub delta_max: f64,
    pub c_rho: f64,
    /// Schedule base: stages `t + ⌈(1+ε)^i⌉`; 1 gives powers of two.
    pub eps_sched: f64,
    pub policy: NeighborPolicy,
}

/// Scale multiplier in the proof of the sampler's guarantees.
pub const ASYMPTOTIC_C_RHO: f64 = 65536.0;

/// Expected sampled edges per vertex under desk constants.
pub const DESK_SAMPLES_PER_VERTEX: f64 = 20.0;

impl SamplerConfig {
    pub fn new(phi: f64, delta_min: f64, delta_max: f64) -> Self {
        SamplerConfig {
            alpha: 1.0,
            phi,
            delta_min,
            delta_max,
            c_rho: ASYMPTOTIC_C_RHO,
            eps_sched: 1.0,
            policy: NeighborPolicy::Bulk,
        }
    }

    /// Configuration whose `ρ·Δ_max` equals [`DESK_SAMPLES_PER_VERTEX`] on an
    /// `n`-vertex graph (capped at 1).
    pub fn desk(n: usize, phi: f64, delta_min: f64, delta_max: f64) -> Self {
        let mut cfg = Self::new(phi, delta_min, delta_max);
        let base = (cfg.alpha + 1.0) * (n.max(2) as f64).ln() * delta_max / (delta_min * delta_min * phi * phi);
        cfg.c_rho = DESK_SAMPLES_PER_VERTEX / delta_max / base;
        cfg
    }

    /// Desk configuration from an input graph's degree profile.
    pub fn desk_for(g: &DynamicGraph, phi: f64) -> Self {
        let dmin = g.min_degree().max(1.0);
        let dmax = g.max_degree().max(dmin);
        Self::desk(g.n(), phi, dmin, dmax)
    }

    pub fn with_policy(mut self, policy: NeighborPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_eps_sched(mut self, eps: f64) -> Self {
        self.eps_sched = eps;
        self
    }

    /// `ρ = min(1, c_ρ(α+1)·ln n·Δ_max / (Δ_min²φ²))`.
    pub fn rho(&self, n: usize) -> f64 {
        let r = self.c_rho * (self.alpha + 1.0) * (n.max(2) as f64).ln() * self.delta_max
            / (self.delta_min * self.delta_min * self.phi * self.phi);
        r.min(1.0)
    }

    /// `ζ = max(1, ⌈φ·Δ_min⌉)`.
    pub fn zeta(&self) -> usize {
        ((self.phi * self.delta_min).ceil() as usize).max(1)
    }
}

/// Offsets `⌈(1+ε)^i⌉` for `i = 0, 1, …`, deduplicated, with 0 prepended.
pub fn schedule_offsets(eps: f64, limit: usize) -> Vec<usize> {
    let mut out = vec![0];
    let base = 1.0 + eps;
    let mut x = 1.0f64;
    loop {
        let off = x.ceil() as usize;
        if off > limit {
            break;
        }
        if *out.last().expect("nonempty") != off {
            out.push(off);
        }
        x *= base;
    }
    out
}

/// Position of neighbour slots rescheduled by a round-robin step when the
/// current degree is `deg`: `i·⌊Δ_max/ζ⌋ + j` for `j ∈ [0, ⌈Δ_max/ζ⌉]`,
/// wrapped modulo the neighbour count.
pub fn round_robin_window(deg: usize, zeta: usize, delta_max: f64, neighbors: usize) -> Vec<usize> {
    if neighbors == 0 {
        return Vec::new();
    }
    let i = deg % zeta;
    let stride = (delta_max / zeta as f64).floor() as usize;
    let width = (delta_max / zeta as f64).ceil() as usize;
    (0..=width).map(|j| (i * stride + j) % neighbors).collect()
}

/// One call of the vertex sampler and the next stage that was scheduled for
/// the vertex at call time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResampleCall {
    pub stage: usize,
    pub next_scheduled: Option<usize>,
}

/// Sampled set drawn for a vertex; exposed to randomness-adaptive adversaries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrawRecord {
    pub stage: usize,
    pub vertex: VertexId,
    pub sample: Vec<EdgeId>,
}

#[derive(Clone, Debug)]
pub struct SamplerState {
    cfg: SamplerConfig,
    graph: DynamicGraph,
    rho: f64,
    zeta: usize,
    stage: usize,
    horizon: usize,
    offsets: Vec<usize>,
    samples: Vec<BTreeSet<EdgeId>>,
    holders: BTreeMap<EdgeId, u8>,
    schedule: Vec<BTreeSet<usize>>,
    degree_updates: Vec<Vec<usize>>,
    pruned: BTreeMap<EdgeId, Edge>,
    calls: Vec<Vec<ResampleCall>>,
    draws: Vec<DrawRecord>,
    stage_resamples: Vec<usize>,
    rng: Rng,
}

impl SamplerState {
    /// Samples every vertex once (stage 0).
    pub fn new(g: &DynamicGraph, cfg: SamplerConfig, rng: Rng) -> Self {
        let mut graph = g.clone();
        graph.reset_origin();
        let n = g.n();
        let horizon = g.m().max(1);
        let mut st = SamplerState {
            rho: cfg.rho(n),
            zeta: cfg.zeta(),
            offsets: schedule_offsets(cfg.eps_sched, horizon),
            cfg,
            graph,
            stage: 0,
            horizon,
            samples: vec![BTreeSet::new(); n],
            holders: BTreeMap::new(),
            schedule: vec![BTreeSet::new(); n],
            degree_updates: vec![Vec::new(); n],
            pruned: BTreeMap::new(),
            calls: vec![Vec::new(); n],
            draws: Vec::new(),
            stage_resamples: vec![n],
            rng,
        };
        for v in 0..n {
            st.draw(VertexId(v));
        }
        st
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.cfg
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn zeta(&self) -> usize {
        self.zeta
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// The current working graph (input minus deletions and pruned edges).
    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    pub fn sample_of(&self, v: VertexId) -> &BTreeSet<EdgeId> {
        &self.samples[v.0]
    }

    pub fn schedule_of(&self, v: VertexId) -> &BTreeSet<usize> {
        &self.schedule[v.0]
    }

    pub fn degree_updates_of(&self, v: VertexId) -> &[usize] {
        &self.degree_updates[v.0]
    }

    pub fn calls_of(&self, v: VertexId) -> &[ResampleCall] {
        &self.calls[v.0]
    }

    pub fn pruned(&self) -> &BTreeMap<EdgeId, Edge> {
        &self.pruned
    }

    /// Every draw made so far, in order.
    pub fn draws(&self) -> &[DrawRecord] {
        &self.draws
    }

    /// Number of vertex resamplings at each stage (index 0 is initialization).
    pub fn stage_resamples(&self) -> &[usize] {
        &self.stage_resamples
    }

    /// Weight of `e` in the output, if present.
    pub fn output_weight(&self, e: EdgeId) -> Option<f64> {
        if self.pruned.contains_key(&e) {
            Some(1.0)
        } else if self.holders.contains_key(&e) {
            Some(1.0 / self.rho)
        } else {
            None
        }
    }

    pub fn in_output(&self, e: EdgeId) -> bool {
        self.output_weight(e).is_some()
    }

    /// Sampled edges at weight `1/ρ` plus pruned edges at weight 1, ids kept.
    pub fn current_sparsifier(&self) -> DynamicGraph {
        let w = 1.0 / self.rho;
        let sampled = self.holders.keys().map(|&id| {
            let e = self.graph.edge(id).expect("sampled edges are present");
            (id, e.u.0, e.v.0, w)
        });
        let pruned = self.pruned.iter().map(|(&id, e)| (id, e.u.0, e.v.0, 1.0));
        DynamicGraph::from_edges_with_ids(self.graph.n(), sampled.chain(pruned).collect::<Vec<_>>())
            .expect("disjoint ids")
    }

    /// The graph the sparsifier approximates: working graph plus pruned edges.
    pub fn target_graph(&self) -> DynamicGraph {
        let mut g = self.graph.clone();
        for (&id, e) in &self.pruned {
            g.insert_edge_with_id(id, e.u, e.v, e.w).expect("pruned ids are free");
        }
        g
    }

    fn hold(&mut self, e: EdgeId) {
        *self.holders.entry(e).or_insert(0) += 1;
    }

    fn release(&mut self, e: EdgeId) {
        if let Some(c) = self.holders.get_mut(&e) {
            *c -= 1;
            if *c == 0 {
                self.holders.remove(&e);
            }
        }
    }

    fn draw(&mut self, v: VertexId) {
        let old = std::mem::take(&mut self.samples[v.0]);
        for e in old {
            self.release(e);
        }
        let inc: Vec<EdgeId> = self.graph.incident(v).collect();
        let picked = subset_sample(inc.len(), self.rho, &mut self.rng);
        let fresh: BTreeSet<EdgeId> = picked.into_iter().map(|i| inc[i]).collect();
        for &e in &fresh {
            self.hold(e);
        }
        self.draws.push(DrawRecord { stage: self.stage, vertex: v, sample: fresh.iter().copied().collect() });
        self.samples[v.0] = fresh;
    }

    /// Replaces `S_v` with a fresh draw and returns the change to the output.
    pub fn sample_vertex(&mut self, v: VertexId) -> Result<ChangeSet> {
        if !self.graph.has_vertex(v) {
            return Err(Error::UnknownVertex(v));
        }
        let mut tracker = Tracker::default();
        tracker.touch_all(self, self.graph.incident(v).collect());
        self.draw(v);
        Ok(tracker.finish(self))
    }

    fn schedule_from(&mut self, v: VertexId, t: usize) {
        let limit = self.horizon;
        for &off in &self.offsets {
            let s = t + off;
            if s > limit {
                break;
            }
            self.schedule[v.0].insert(s);
        }
    }

    /// Removes a present edge from the working graph and from both samples.
    fn remove_edge(&mut self, id: EdgeId, tracker: &mut Tracker) -> Result<Edge> {
        let e = *self.graph.edge(id).ok_or(Error::UnknownEdge(id))?;
        tracker.touch(self, id);
        for z in [e.u, e.v] {
            if self.samples[z.0].remove(&id) {
                self.release(id);
            }
        }
        self.graph.delete_edge(id)?;
        Ok(e)
    }

    /// Schedule updates for one removed edge `(u, v)` at stage `t`.
    fn reschedule(&mut self, e: Edge, t: usize) {
        let ends: Vec<VertexId> = if e.u == e.v { vec![e.u] } else { vec![e.u, e.v] };
        for z in ends {
            self.schedule_from(z, t);
            let deg = self.graph.incident_count(z);
            match self.cfg.policy {
                NeighborPolicy::Bulk => {
                    if deg.is_multiple_of(self.zeta) {
                        self.degree_updates[z.0].push(t);
                        for y in self.graph.neighbors(z) {
                            self.schedule_from(y, t);
                        }
                    }
                }
                NeighborPolicy::RoundRobin => {
                    let nbrs: Vec<VertexId> = self
                        .graph
                        .incident(z)
                        .map(|id| self.graph.edge(id).expect("incident").other(z))
                        .filter(|&y| y != z)
                        .collect();
                    if deg.is_multiple_of(self.zeta) {
                        self.degree_updates[z.0].push(t);
                    }
                    for pos in round_robin_window(deg, self.zeta, self.cfg.delta_max, nbrs.len()) {
                        self.schedule_from(nbrs[pos], t);
                    }
                }
            }
        }
    }

    fn run_stage(&mut self, t: usize, tracker: &mut Tracker) {
        let due: Vec<VertexId> =
            (0..self.graph.n()).filter(|&v| self.schedule[v].contains(&t)).map(VertexId).collect();
        for &v in &due {
            let next = self.schedule[v.0].range(t + 1..).next().copied();
            self.calls[v.0].push(ResampleCall { stage: t, next_scheduled: next });
            tracker.touch_all(self, self.graph.incident(v).collect());
            self.draw(v);
        }
        for s in &mut self.schedule {
            while s.first().is_some_and(|&x| x <= t) {
                s.pop_first();
            }
        }
        self.stage_resamples.push(due.len());
    }

    fn check_stage(&self, t: usize) -> Result<()> {
        if t != self.stage + 1 {
            return Err(Error::StageMismatch { last: self.stage as u64, got: t as u64 });
        }
        Ok(())
    }

    /// Adversarial deletion of `id` at stage `t`, which must follow the
    /// current stage.
    pub fn edge_deletion(&mut self, id: EdgeId, t: usize) -> Result<ChangeSet> {
        self.edge_deletion_pruned(id, t, &[])
    }

    /// Deletion at stage `t` together with pruned edges `pruned_now`, which
    /// are removed from the working graph and kept in the output at weight 1.
    /// Deleting an edge of the pruned overlay drops it from the output.
    pub fn edge_deletion_pruned(&mut self, id: EdgeId, t: usize, pruned_now: &[EdgeId]) -> Result<ChangeSet> {
        self.check_stage(t)?;
        let overlay = self.pruned.contains_key(&id);
        if !overlay && !self.graph.contains_edge(id) {
            return Err(Error::UnknownEdge(id));
        }
        if let Some(&dup) = pruned_now.iter().find(|p| self.pruned.contains_key(p)) {
            return Err(Error::DuplicateEdge(dup));
        }
        self.stage = t;
        let mut tracker = Tracker::default();
        if overlay {
            tracker.touch(self, id);
            self.pruned.remove(&id);
        } else {
            let e = self.remove_edge(id, &mut tracker)?;
            self.reschedule(e, t);
        }
        for &p in pruned_now {
            if p == id || !self.graph.contains_edge(p) {
                continue;
            }
            let pe = self.remove_edge(p, &mut tracker)?;
            self.reschedule(pe, t);
            self.pruned.insert(p, pe);
        }
        self.run_stage(t, &mut tracker);
        Ok(tracker.finish(self))
    }

    /// Deletion at the next stage.
    pub fn delete(&mut self, id: EdgeId) -> Result<ChangeSet> {
        self.edge_deletion(id, self.stage + 1)
    }

    /// Deletion at the next stage with a pruned set.
    pub fn delete_pruned(&mut self, id: EdgeId, pruned_now: &[EdgeId]) -> Result<ChangeSet> {
        self.edge_deletion_pruned(id, self.stage + 1, pruned_now)
    }

    /// Relevant resamplings of `v` for horizon `t`: non-initial calls at
    /// stage `≤ t` with no later scheduled stage `≤ t` at call time.
    pub fn relevant_count(&self, v: VertexId, t: usize) -> usize {
        self.calls[v.0]
            .iter()
            .filter(|c| c.stage >= 1 && c.stage <= t && c.next_scheduled.is_none_or(|n| n > t))
            .count()
    }

    /// Output edges are exactly the union of samples and the pruned overlay,
    /// every sample holds present incident edges and no schedule lies in the past.
    pub fn invariants_hold(&self) -> bool {
        let mut counts: BTreeMap<EdgeId, u8> = BTreeMap::new();
        for (v, s) in self.samples.iter().enumerate() {
            for &e in s {
                match self.graph.edge(e) {
                    Some(edge) if edge.u.0 == v || edge.v.0 == v => *counts.entry(e).or_insert(0) += 1,
                    _ => return false,
                }
            }
        }
        counts == self.holders
            && self.pruned.keys().all(|p| !self.graph.contains_edge(*p))
            && self.schedule.iter().all(|s| s.first().is_none_or(|&x| x > self.stage))
    }
}

/// Output weight and endpoints of an edge, either possibly absent.
type Snapshot = (Option<f64>, Option<(VertexId, VertexId)>);

/// Records output weights of touched edges before a mutation to build the
/// resulting change set.
#[derive(Default)]
struct Tracker {
    before: BTreeMap<EdgeId, Snapshot>,
}

impl Tracker {
    fn touch(&mut self, st: &SamplerState, e: EdgeId) {
        self.before.entry(e).or_insert_with(|| {
            let ends = st.graph.edge(e).map(|x| (x.u, x.v)).or_else(|| st.pruned.get(&e).map(|x| (x.u, x.v)));
            (st.output_weight(e), ends)
        });
    }

    fn touch_all(&mut self, st: &SamplerState, ids: Vec<EdgeId>) {
        for e in ids {
            self.touch(st, e);
        }
    }

    fn finish(self, st: &SamplerState) -> ChangeSet {
        let mut cs = ChangeSet::default();
        for (e, (before, ends)) in self.before {
            let after = st.output_weight(e);
            match (before, after) {
                (Some(_), None) => cs.deleted.push(e),
                (None, Some(w)) => {
                    let (u, v) = ends.expect("touched edge had endpoints");
                    cs.inserted.push((e, u, v, w));
                }
                (Some(a), Some(b)) if a != b => cs.reweighted.push((e, b)),
                _ => {}
            }
        }
        cs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;
    use crate::output::diff;

    #[test]
    fn subset_sample_extremes() {
        let mut rng = crate::rng(1);
        assert!(subset_sample(100, 0.0, &mut rng).is_empty());
        assert_eq!(subset_sample(7, 1.0, &mut rng), (0..7).collect::<Vec<_>>());
        let s = subset_sample(1000, 0.5, &mut rng);
        assert!(s.windows(2).all(|w| w[0] < w[1]) && s.iter().all(|&i| i < 1000));
    }

    #[test]
    fn subset_sample_mean_is_binomial() {
        let mut rng = crate::rng(7);
        let (n, p, trials) = (10_000usize, 0.3, 10_000usize);
        let total: usize = (0..trials).map(|_| subset_sample(n, p, &mut rng).len()).sum();
        let mean = total as f64 / trials as f64;
        let sigma_of_mean = (n as f64 * p * (1.0 - p) / trials as f64).sqrt();
        assert!((mean - 3000.0).abs() <= 3.0 * sigma_of_mean, "mean {mean}");
    }

    #[test]
    fn doubling_schedule_from_stage_five() {
        let offs = schedule_offsets(1.0, 40);
        let stages: Vec<usize> = offs.iter().map(|o| 5 + o).filter(|&s| s <= 40).collect();
        assert_eq!(stages, vec![5, 6, 7, 9, 13, 21, 37]);
        assert_eq!(schedule_offsets(0.5, 10), vec![0, 1, 2, 3, 4, 6, 8]);
    }

    #[test]
    fn round_robin_window_indices() {
        assert_eq!(round_robin_window(5, 4, 12.0, 20), vec![3, 4, 5, 6]);
        for zeta in 1..6 {
            for dmax in [zeta, 2 * zeta + 1, 12] {
                let mut covered = BTreeSet::new();
                for deg in 0..zeta {
                    covered.extend(round_robin_window(deg, zeta, dmax as f64, dmax));
                }
                assert_eq!(covered.len(), dmax, "zeta {zeta} dmax {dmax}");
            }
        }
    }

    #[test]
    fn rho_one_keeps_everything() {
        let g = crate::expander::margulis(4).unwrap();
        let mut cfg = SamplerConfig::new(0.1, 8.0, 8.0);
        cfg.c_rho = 1.0;
        assert_eq!(cfg.rho(16), 1.0);
        let st = SamplerState::new(&g, cfg, crate::rng(0));
        assert_eq!(st.current_sparsifier().edge_multiset(), g.edge_multiset());
    }

    #[test]
    fn desk_constants_target_twenty_per_vertex() {
        let cfg = SamplerConfig::desk(16, 0.3, 40.0, 44.0);
        assert!((cfg.rho(16) * 44.0 - DESK_SAMPLES_PER_VERTEX).abs() < 1e-9);
        assert_eq!(cfg.zeta(), 12);
    }

    fn dense_graph(seed: u64) -> DynamicGraph {
        let mut rng = crate::rng(seed);
        let n = 12;
        let mut edges = Vec::new();
        for _ in 0..6 {
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                perm.swap(i, rng.random_range(0..=i));
            }
            for k in 0..n {
                edges.push((perm[k], perm[(k + 1) % n], 1.0));
            }
        }
        DynamicGraph::from_edges(n, edges).unwrap()
    }

    #[test]
    fn changesets_replay_the_output() {
        for policy in [NeighborPolicy::Bulk, NeighborPolicy::RoundRobin] {
            let g = dense_graph(3);
            let cfg = SamplerConfig::desk(g.n(), 0.2, g.min_degree(), g.max_degree()).with_policy(policy);
            let mut cfg = cfg;
            cfg.c_rho *= 0.2;
            let mut st = SamplerState::new(&g, cfg, crate::rng(5));
            let mut rng = crate::rng(9);
            for _ in 0..40 {
                let before = st.current_sparsifier();
                let ids = st.graph().edge_ids();
                let id = ids[rng.random_range(0..ids.len())];
                let extra: Vec<EdgeId> = if rng.random_bool(0.3) {
                    ids.iter().copied().filter(|&x| x != id).take(1).collect()
                } else {
                    Vec::new()
                };
                let cs = st.delete_pruned(id, &extra).unwrap();
                let after = st.current_sparsifier();
                let expect = diff(&before, &after);
                let norm = |mut c: ChangeSet| {
                    c.inserted.sort_by_key(|x| x.0);
                    c.deleted.sort();
                    c.reweighted.sort_by_key(|x| x.0);
                    c
                };
                assert_eq!(norm(cs), norm(expect));
                assert!(st.invariants_hold());
            }
        }
    }

    #[test]
    fn relevant_calls_are_logarithmic() {
        let g = dense_graph(11);
        let mut cfg = SamplerConfig::desk(g.n(), 0.2, g.min_degree(), g.max_degree());
        cfg.c_rho *= 0.3;
        let mut st = SamplerState::new(&g, cfg, crate::rng(2));
        let mut rng = crate::rng(4);
        while st.graph().m() > 0 {
            let ids = st.graph().edge_ids();
            st.delete(ids[rng.random_range(0..ids.len())]).unwrap();
        }
        for t in 1..=st.stage() {
            let bound = (t as f64).log2().ceil() as usize + 1;
            for v in 0..g.n() {
                assert!(st.relevant_count(VertexId(v), t) <= bound, "v {v} t {t}");
            }
        }
    }

    #[test]
    fn stage_must_advance_by_one() {
        let g = dense_graph(1);
        let mut st = SamplerState::new(&g, SamplerConfig::desk_for(&g, 0.2), crate::rng(0));
        assert_eq!(st.edge_deletion(EdgeId(0), 2).unwrap_err(), Error::StageMismatch { last: 0, got: 2 });
        st.edge_deletion(EdgeId(0), 1).unwrap();
        assert_eq!(st.delete(EdgeId(0)).unwrap_err(), Error::UnknownEdge(EdgeId(0)));
    }

    #[test]
    fn resampling_one_side_keeps_the_other_copy() {
        let g = dense_graph(2);
        let mut cfg = SamplerConfig::desk_for(&g, 0.2);
        cfg.c_rho *= 0.3;
        let mut st = SamplerState::new(&g, cfg, crate::rng(3));
        let (v, e) = (0..g.n())
            .flat_map(|v| st.sample_of(VertexId(v)).iter().map(move |&e| (v, e)))
            .next()
            .unwrap();
        let edge = *g.edge(e).unwrap();
        let other = edge.other(VertexId(v));
        for _ in 0..20 {
            st.sample_vertex(other).unwrap();
            assert!(st.in_output(e));
        }
        assert_eq!(st.sample_vertex(VertexId(99)).unwrap_err(), Error::UnknownVertex(VertexId(99)));
    }
}
