//! Expander pruning under edge deletions.
//!
//! [`PruneState`] keeps a monotone pruned vertex set so that the surviving
//! induced graph stays an expander (optionally also with a minimum degree).
//! [`WcPruneState`] layers several such trims with staggered recomputation
//! times and releases a bounded number of pruned edges per deletion.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expander::{delta_reduce, ContractionMap};
use crate::graph::{DynamicGraph, EdgeId, VertexId};
use crate::verify::{exact_conductance, sampled_conductance, EXACT_CUT_LIMIT};

/// Largest survivor size trimmed with exact cut enumeration.
pub const TRIM_EXACT_LIMIT: usize = 18;

/// Degree of every vertex inside `G[alive]` (self-loops counted once).
fn induced_degrees(g: &DynamicGraph, alive: &[bool]) -> Vec<f64> {
    let mut deg = vec![0.0; g.n()];
    for (_, e) in g.edges() {
        if alive[e.u.0] && alive[e.v.0] {
            deg[e.u.0] += e.w;
            if e.u != e.v {
                deg[e.v.0] += e.w;
            }
        }
    }
    deg
}

/// Removes vertices from `alive` until `G[alive]` has no cut of
/// conductance below `threshold` and, when `min_degree` is set, no vertex of
/// smaller induced degree. Isolated vertices are always removed. Each
/// violating cut loses its smaller-volume side; on a volume tie the side
/// without the smallest surviving id goes. Returns the removed vertices in
/// removal order.
pub fn trim(g: &DynamicGraph, alive: &mut [bool], threshold: f64, min_degree: Option<f64>) -> Vec<VertexId> {
    let mut removed = Vec::new();
    loop {
        let mut changed = true;
        while changed {
            changed = false;
            let deg = induced_degrees(g, alive);
            for v in 0..g.n() {
                if alive[v] && (deg[v] <= 0.0 || min_degree.is_some_and(|d| deg[v] < d)) {
                    alive[v] = false;
                    removed.push(VertexId(v));
                    changed = true;
                }
            }
        }
        let members: Vec<VertexId> = (0..g.n()).filter(|&v| alive[v]).map(VertexId).collect();
        if members.len() < 2 {
            return removed;
        }
        let h = g.induced(&members);
        let (value, witness) = if members.len() <= TRIM_EXACT_LIMIT.min(EXACT_CUT_LIMIT) {
            let c = exact_conductance(&h).expect("within the exact limit");
            (c.value, c.witness)
        } else {
            let c = sampled_conductance(&h, 16, &mut crate::rng(members.len() as u64));
            (c.value, c.witness)
        };
        if value >= threshold || witness.is_empty() {
            return removed;
        }
        let mut side = vec![false; members.len()];
        for v in &witness {
            side[v.0] = true;
        }
        let vol_in: f64 = (0..members.len()).filter(|&i| side[i]).map(|i| h.degree(VertexId(i))).sum();
        let vol_out = h.total_volume() - vol_in;
        let drop_inside = if (vol_in - vol_out).abs() <= 1e-12 * h.total_volume().max(1.0) { !side[0] } else { vol_in < vol_out };
        for (i, &v) in members.iter().enumerate() {
            if side[i] == drop_inside {
                alive[v.0] = false;
                removed.push(v);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PruneMode {
    /// Survivor conductance at least `φ/6`.
    Amortized,
    /// As amortized, and survivor degrees at least `Δ/3`.
    Uniform { delta: f64 },
}

/// Monotone vertex pruning on a decremental expander.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PruneState {
    graph: DynamicGraph,
    phi: f64,
    mode: PruneMode,
    alive: Vec<bool>,
    pruned: Vec<VertexId>,
    deletions: usize,
    budget: Option<usize>,
    initial_degree: Vec<f64>,
}

impl PruneState {
    /// Amortized pruning with the default deletion budget `⌊φm/10⌋`.
    pub fn amortized(g: &DynamicGraph, phi: f64) -> Self {
        Self::new(g, phi, PruneMode::Amortized)
    }

    /// Uniform-degree pruning with `Δ` the initial minimum degree.
    pub fn uniform(g: &DynamicGraph, phi: f64) -> Self {
        Self::new(g, phi, PruneMode::Uniform { delta: g.min_degree() })
    }

    pub fn new(g: &DynamicGraph, phi: f64, mode: PruneMode) -> Self {
        let mut graph = g.clone();
        graph.reset_origin();
        PruneState {
            phi,
            mode,
            alive: vec![true; g.n()],
            pruned: Vec::new(),
            deletions: 0,
            budget: Some((phi * g.m() as f64 / 10.0).floor() as usize),
            initial_degree: g.degrees().to_vec(),
            graph,
        }
    }

    /// Replaces the deletion budget; `None` lifts it.
    pub fn with_budget(mut self, budget: Option<usize>) -> Self {
        self.budget = budget;
        self
    }

    pub fn threshold(&self) -> f64 {
        self.phi / 6.0
    }

    pub fn min_degree_rule(&self) -> Option<f64> {
        match self.mode {
            PruneMode::Amortized => None,
            PruneMode::Uniform { delta } => Some(delta / 3.0),
        }
    }

    pub fn mode(&self) -> PruneMode {
        self.mode
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Deletes an edge and returns the newly pruned vertices.
    pub fn delete(&mut self, id: EdgeId) -> Result<Vec<VertexId>> {
        if let Some(b) = self.budget {
            if self.deletions >= b {
                return Err(Error::DeletionBudgetExceeded { budget: b });
            }
        }
        self.graph.delete_edge(id)?;
        self.deletions += 1;
        let (threshold, rule) = (self.threshold(), self.min_degree_rule());
        let fresh = trim(&self.graph, &mut self.alive, threshold, rule);
        self.pruned.extend(fresh.iter().copied());
        Ok(fresh)
    }

    /// Removes every edge touching a pruned vertex without counting it as a
    /// deletion; returns the removed ids in ascending order.
    pub fn release_pruned_edges(&mut self) -> Vec<EdgeId> {
        let leaving: Vec<EdgeId> = self
            .graph
            .edges()
            .filter(|(_, e)| !self.alive[e.u.0] || !self.alive[e.v.0])
            .map(|(id, _)| id)
            .collect();
        for &id in &leaving {
            self.graph.delete_edge(id).expect("present edge");
        }
        leaving
    }

    pub fn deletions(&self) -> usize {
        self.deletions
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    pub fn is_pruned(&self, v: VertexId) -> bool {
        !self.alive[v.0]
    }

    /// Pruned vertices in pruning order.
    pub fn pruned(&self) -> &[VertexId] {
        &self.pruned
    }

    pub fn survivors(&self) -> Vec<VertexId> {
        (0..self.alive.len()).filter(|&v| self.alive[v]).map(VertexId).collect()
    }

    /// Volume of the pruned set measured with initial degrees.
    pub fn pruned_volume(&self) -> f64 {
        self.pruned.iter().map(|v| self.initial_degree[v.0]).sum()
    }

    /// Current edges between pruned and surviving vertices.
    pub fn boundary_edges(&self) -> usize {
        self.graph.edges().filter(|(_, e)| self.alive[e.u.0] != self.alive[e.v.0]).count()
    }

    /// The current graph induced on the survivors (local ids in ascending
    /// global order).
    pub fn survivor_graph(&self) -> DynamicGraph {
        self.graph.induced(&self.survivors())
    }
}

/// Level `i` of the worst-case scheduler: its vertex set of the split graph
/// and the deletion count of the snapshot it was trimmed on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelState {
    pub alive: Vec<bool>,
    pub time: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WcPruneConfig {
    pub phi: f64,
    pub gamma: usize,
    /// Deletions allowed before `DeletionBudgetExceeded`; defaults to
    /// `max(1, ⌊φm/10⌋)`.
    pub budget: Option<usize>,
}

impl WcPruneConfig {
    pub fn new(phi: f64) -> Self {
        WcPruneConfig { phi, gamma: 64, budget: None }
    }
}

/// Surviving expander certified by the worst-case scheduler: the largest
/// non-singleton component of the current graph minus the edges touching
/// trimmed split vertices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WcSurvivor {
    pub vertices: Vec<VertexId>,
    pub graph: DynamicGraph,
    pub non_singleton_components: usize,
}

/// Worst-case edge pruning: node trims on the 9-split graph at `ℓ+1`
/// levels, released edges capped at `γ` per deletion, and a forced fill in
/// ascending edge id so every edge is pruned after `⌈m/γ⌉` deletions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WcPruneState {
    cfg: WcPruneConfig,
    original: DynamicGraph,
    current: DynamicGraph,
    split0: DynamicGraph,
    map: ContractionMap,
    deleted: Vec<EdgeId>,
    levels: Vec<LevelState>,
    trimmed_nodes: Vec<bool>,
    pruned: BTreeSet<EdgeId>,
    increments: Vec<usize>,
    big_t: f64,
    ell: usize,
    delta_lvl: f64,
    budget: usize,
}

impl WcPruneState {
    pub fn new(g: &DynamicGraph, cfg: WcPruneConfig) -> Result<Self> {
        if cfg.gamma == 0 {
            return Err(Error::ParameterTooSmall("gamma must be positive".into()));
        }
        let (split0, map) = delta_reduce(g, 9)?;
        let m = g.m().max(2);
        let big_t = ((cfg.phi * g.m() as f64 / 10.0).floor()).max(1.0);
        let ell = ((m as f64).log2().sqrt().ceil() as usize).max(1);
        let delta_lvl = big_t.powf(1.0 / ell as f64);
        let levels = (0..=ell + 1).map(|_| LevelState { alive: vec![true; split0.n()], time: 0 }).collect();
        let mut original = g.clone();
        original.reset_origin();
        Ok(WcPruneState {
            budget: cfg.budget.unwrap_or(big_t as usize),
            cfg,
            current: original.clone(),
            original,
            trimmed_nodes: vec![false; split0.n()],
            split0,
            map,
            deleted: Vec::new(),
            levels,
            pruned: BTreeSet::new(),
            increments: Vec::new(),
            big_t,
            ell,
            delta_lvl,
        })
    }

    pub fn levels_count(&self) -> usize {
        self.ell
    }

    pub fn big_t(&self) -> f64 {
        self.big_t
    }

    pub fn delta_lvl(&self) -> f64 {
        self.delta_lvl
    }

    pub fn gamma(&self) -> usize {
        self.cfg.gamma
    }

    /// Conductance target `φ/6^i` of level `i`.
    pub fn level_phi(&self, i: usize) -> f64 {
        self.cfg.phi / 6f64.powi(i as i32)
    }

    /// Threshold of the per-deletion top level.
    pub fn top_threshold(&self) -> f64 {
        self.level_phi(self.ell + 1).max(1.0 / self.cfg.gamma as f64)
    }

    /// Length `T/Δ^i` of a level-`i` window.
    pub fn window(&self, i: usize) -> f64 {
        self.big_t / self.delta_lvl.powi(i as i32)
    }

    pub fn round(&self, i: usize, tau: usize) -> f64 {
        round_level(tau, self.big_t, self.delta_lvl, i)
    }

    /// Levels `0..=ℓ+1`; level 0 is the whole split graph.
    pub fn levels(&self) -> &[LevelState] {
        &self.levels
    }

    pub fn pruned(&self) -> &BTreeSet<EdgeId> {
        &self.pruned
    }

    /// Size of each deletion's increment of the pruned edge set.
    pub fn increments(&self) -> &[usize] {
        &self.increments
    }

    pub fn deletions(&self) -> usize {
        self.deleted.len()
    }

    pub fn current(&self) -> &DynamicGraph {
        &self.current
    }

    pub fn all_pruned(&self) -> bool {
        self.pruned.len() == self.original.m()
    }

    fn split_at(&self, time: usize) -> DynamicGraph {
        let gone: BTreeSet<EdgeId> = self.deleted[..time].iter().copied().collect();
        self.split0.edge_subgraph(|id, _| !gone.contains(&id))
    }

    /// Deletes an edge and returns the newly pruned edges of the original
    /// graph (which may include already deleted ones).
    pub fn delete(&mut self, id: EdgeId) -> Result<Vec<EdgeId>> {
        if self.deleted.len() >= self.budget && !self.all_pruned() {
            return Err(Error::DeletionBudgetExceeded { budget: self.budget });
        }
        self.current.delete_edge(id)?;
        self.deleted.push(id);
        let tau = self.deleted.len();
        for i in 1..=self.ell {
            let w = self.window(i);
            let boundary = (tau as f64 / w).floor() > ((tau - 1) as f64 / w).floor();
            if !boundary || (tau as f64) <= w {
                continue;
            }
            let time = (self.round(i, tau - 1).floor() as usize).max(self.levels[i - 1].time);
            let snapshot = self.split_at(time);
            let mut alive = self.levels[i - 1].alive.clone();
            trim(&snapshot, &mut alive, self.level_phi(i), None);
            self.levels[i] = LevelState { alive, time };
        }
        let top = self.ell + 1;
        let snapshot = self.split_at(tau);
        let mut alive = self.levels[self.ell].alive.clone();
        trim(&snapshot, &mut alive, self.top_threshold(), None);
        self.levels[top] = LevelState { alive, time: tau };
        for v in 0..self.trimmed_nodes.len() {
            if !self.levels[top].alive[v] {
                self.trimmed_nodes[v] = true;
            }
        }
        let mut fresh = Vec::new();
        for (eid, e) in self.split0.edges() {
            if self.map.internal_edges.contains(&eid) || self.pruned.contains(&eid) {
                continue;
            }
            if self.trimmed_nodes[e.u.0] || self.trimmed_nodes[e.v.0] {
                fresh.push(eid);
            }
        }
        for &eid in &fresh {
            self.pruned.insert(eid);
        }
        for (eid, _) in self.original.edges() {
            if fresh.len() >= self.cfg.gamma {
                break;
            }
            if self.pruned.insert(eid) {
                fresh.push(eid);
            }
        }
        fresh.sort();
        self.increments.push(fresh.len());
        Ok(fresh)
    }

    /// Edges of the current graph touching a trimmed split vertex.
    pub fn certificate_removed(&self) -> BTreeSet<EdgeId> {
        self.split0
            .edges()
            .filter(|(id, e)| {
                !self.map.internal_edges.contains(id)
                    && self.current.contains_edge(*id)
                    && (!self.levels[self.ell + 1].alive[e.u.0] || !self.levels[self.ell + 1].alive[e.v.0])
            })
            .map(|(id, _)| id)
            .collect()
    }

    pub fn survivor(&self) -> WcSurvivor {
        let removed = self.certificate_removed();
        let rest = self.current.edge_subgraph(|id, _| !removed.contains(&id));
        let comps: Vec<Vec<VertexId>> = rest.components().into_iter().filter(|c| rest.volume(c.iter().copied()) > 0.0 && c.len() > 1).collect();
        let count = comps.len();
        let best = comps
            .into_iter()
            .max_by(|a, b| rest.volume(a.iter().copied()).total_cmp(&rest.volume(b.iter().copied())).then(b[0].cmp(&a[0])))
            .unwrap_or_default();
        WcSurvivor { graph: rest.induced(&best), vertices: best, non_singleton_components: count }
    }

    /// Every level set is contained in the one below and trimmed on a
    /// snapshot no older than it.
    pub fn levels_nested(&self) -> bool {
        self.levels.windows(2).all(|w| {
            w[1].time >= w[0].time && w[1].alive.iter().zip(&w[0].alive).all(|(&hi, &lo)| !hi || lo)
        })
    }
}

/// `⌊τ/(T/Δ^i)⌋ · T/Δ^i`, the last level-`i` window start at or before `τ`.
pub fn round_level(tau: usize, big_t: f64, delta: f64, i: usize) -> f64 {
    let w = big_t / delta.powi(i as i32);
    (tau as f64 / w + 1e-9).floor() * w
}
