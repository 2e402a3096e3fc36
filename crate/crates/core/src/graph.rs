//! Weighted multigraph with stable edge identifiers, a degree cache and an
//! append-only update log.
//!
//! A self-loop adds its weight once to the degree of its endpoint and never
//! contributes to a cut.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub w: f64,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.u == self.v
    }

    /// The endpoint opposite to `x`.
    pub fn other(&self, x: VertexId) -> VertexId {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum UpdateKind {
    InsertEdge { u: VertexId, v: VertexId, w: f64 },
    DeleteEdge(EdgeId),
    BatchDelete(Vec<EdgeId>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpdateEvent {
    pub kind: UpdateKind,
    pub stage: u64,
}

/// Exact description of one mutation of a graph.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ChangeSet {
    pub inserted: Vec<(EdgeId, VertexId, VertexId, f64)>,
    pub deleted: Vec<EdgeId>,
    pub reweighted: Vec<(EdgeId, f64)>,
}

impl ChangeSet {
    pub fn len(&self) -> usize {
        self.inserted.len() + self.deleted.len() + self.reweighted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn extend(&mut self, other: ChangeSet) {
        self.inserted.extend(other.inserted);
        self.deleted.extend(other.deleted);
        self.reweighted.extend(other.reweighted);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub event: UpdateEvent,
    /// Id assigned to the inserted edge, for insertions.
    pub assigned: Option<EdgeId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Snapshot {
    n: usize,
    edges: Vec<(EdgeId, Edge)>,
    degree: Vec<f64>,
    next_edge: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DynamicGraph {
    n: usize,
    edges: BTreeMap<EdgeId, Edge>,
    incident: Vec<BTreeSet<EdgeId>>,
    degree: Vec<f64>,
    next_edge: usize,
    stage: u64,
    log: Vec<LogEntry>,
    initial: Snapshot,
}

fn check_weight(w: f64) -> Result<()> {
    if w > 0.0 && w.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveWeight(w))
    }
}

impl DynamicGraph {
    pub fn new(n: usize) -> Self {
        DynamicGraph {
            n,
            edges: BTreeMap::new(),
            incident: vec![BTreeSet::new(); n],
            degree: vec![0.0; n],
            next_edge: 0,
            stage: 0,
            log: Vec::new(),
            initial: Snapshot { n, edges: Vec::new(), degree: vec![0.0; n], next_edge: 0 },
        }
    }

    /// Builds a graph whose edges get ids `0, 1, ...` in iteration order.
    /// The result is the replay origin; its log is empty.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut g = DynamicGraph::new(n);
        for (u, v, w) in edges {
            let id = EdgeId(g.next_edge);
            g.raw_insert(id, VertexId(u), VertexId(v), w)?;
        }
        g.reset_origin();
        Ok(g)
    }

    /// Builds a graph that keeps the given edge ids.
    pub fn from_edges_with_ids<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (EdgeId, usize, usize, f64)>,
    {
        let mut g = DynamicGraph::new(n);
        for (id, u, v, w) in edges {
            g.raw_insert(id, VertexId(u), VertexId(v), w)?;
        }
        g.reset_origin();
        Ok(g)
    }

    /// Makes the current state the replay origin and clears the log.
    pub fn reset_origin(&mut self) {
        self.log.clear();
        self.stage = 0;
        self.initial = Snapshot {
            n: self.n,
            edges: self.edges.iter().map(|(&id, &e)| (id, e)).collect(),
            degree: self.degree.clone(),
            next_edge: self.next_edge,
        };
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn stage(&self) -> u64 {
        self.stage
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    pub fn next_edge_id(&self) -> EdgeId {
        EdgeId(self.next_edge)
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges.get(&id)
    }

    pub fn contains_edge(&self, id: EdgeId) -> bool {
        self.edges.contains_key(&id)
    }

    /// Edges in ascending id order.
    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, &Edge)> + '_ {
        self.edges.iter().map(|(&id, e)| (id, e))
    }

    pub fn edge_ids(&self) -> Vec<EdgeId> {
        self.edges.keys().copied().collect()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.n).map(VertexId)
    }

    pub fn has_vertex(&self, v: VertexId) -> bool {
        v.0 < self.n
    }

    pub fn degree(&self, v: VertexId) -> f64 {
        self.degree[v.0]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degree
    }

    pub fn volume<I: IntoIterator<Item = VertexId>>(&self, set: I) -> f64 {
        set.into_iter().map(|v| self.degree[v.0]).sum()
    }

    pub fn total_volume(&self) -> f64 {
        self.degree.iter().sum()
    }

    pub fn min_degree(&self) -> f64 {
        self.degree.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_degree(&self) -> f64 {
        self.degree.iter().copied().fold(0.0, f64::max)
    }

    /// Incident edge ids of `v` in ascending order.
    pub fn incident(&self, v: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        self.incident[v.0].iter().copied()
    }

    pub fn incident_count(&self, v: VertexId) -> usize {
        self.incident[v.0].len()
    }

    /// Incident edges of `v` as `(id, neighbor, weight)` sorted by id.
    pub fn snapshot_incident(&self, v: VertexId) -> Result<Vec<(EdgeId, VertexId, f64)>> {
        if !self.has_vertex(v) {
            return Err(Error::UnknownVertex(v));
        }
        Ok(self.incident[v.0]
            .iter()
            .map(|id| {
                let e = &self.edges[id];
                (*id, e.other(v), e.w)
            })
            .collect())
    }

    /// Distinct neighbors of `v` (excluding `v`) ordered by their first
    /// incident edge id.
    pub fn neighbors(&self, v: VertexId) -> Vec<VertexId> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for id in &self.incident[v.0] {
            let y = self.edges[id].other(v);
            if y != v && seen.insert(y) {
                out.push(y);
            }
        }
        out
    }

    pub fn is_unweighted(&self) -> bool {
        self.edges.values().all(|e| e.w == 1.0)
    }

    /// Ratio of the largest to the smallest edge weight (1 when empty).
    pub fn weight_ratio(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for e in self.edges.values() {
            lo = lo.min(e.w);
            hi = hi.max(e.w);
        }
        if self.edges.is_empty() {
            1.0
        } else {
            hi / lo
        }
    }

    fn raw_insert(&mut self, id: EdgeId, u: VertexId, v: VertexId, w: f64) -> Result<()> {
        for x in [u, v] {
            if !self.has_vertex(x) {
                return Err(Error::UnknownVertex(x));
            }
        }
        check_weight(w)?;
        if self.edges.contains_key(&id) {
            return Err(Error::DuplicateEdge(id));
        }
        self.edges.insert(id, Edge { u, v, w });
        self.incident[u.0].insert(id);
        self.degree[u.0] += w;
        if u != v {
            self.incident[v.0].insert(id);
            self.degree[v.0] += w;
        }
        self.next_edge = self.next_edge.max(id.0 + 1);
        Ok(())
    }

    fn raw_delete(&mut self, id: EdgeId) -> Result<Edge> {
        let e = self.edges.remove(&id).ok_or(Error::UnknownEdge(id))?;
        self.incident[e.u.0].remove(&id);
        self.incident[e.v.0].remove(&id);
        self.degree[e.u.0] -= e.w;
        if e.u != e.v {
            self.degree[e.v.0] -= e.w;
        }
        if self.incident[e.u.0].is_empty() {
            self.degree[e.u.0] = 0.0;
        }
        if self.incident[e.v.0].is_empty() {
            self.degree[e.v.0] = 0.0;
        }
        Ok(e)
    }

    fn push_log(&mut self, kind: UpdateKind, assigned: Option<EdgeId>) {
        self.stage += 1;
        self.log.push(LogEntry { event: UpdateEvent { kind, stage: self.stage }, assigned });
    }

    /// Applies an event at the next stage.
    pub fn apply(&mut self, kind: UpdateKind) -> Result<ChangeSet> {
        let stage = self.stage + 1;
        self.apply_update(UpdateEvent { kind, stage })
    }

    /// Applies an event; its stage must exceed every logged stage.
    pub fn apply_update(&mut self, ev: UpdateEvent) -> Result<ChangeSet> {
        if ev.stage <= self.stage {
            return Err(Error::StageMismatch { last: self.stage, got: ev.stage });
        }
        let mut cs = ChangeSet::default();
        let mut assigned = None;
        match &ev.kind {
            UpdateKind::InsertEdge { u, v, w } => {
                let id = EdgeId(self.next_edge);
                self.raw_insert(id, *u, *v, *w)?;
                cs.inserted.push((id, *u, *v, *w));
                assigned = Some(id);
            }
            UpdateKind::DeleteEdge(id) => {
                self.raw_delete(*id)?;
                cs.deleted.push(*id);
            }
            UpdateKind::BatchDelete(ids) => {
                let distinct: BTreeSet<EdgeId> = ids.iter().copied().collect();
                if let Some(bad) = distinct.iter().find(|id| !self.edges.contains_key(id)) {
                    return Err(Error::UnknownEdge(*bad));
                }
                for id in distinct {
                    self.raw_delete(id)?;
                    cs.deleted.push(id);
                }
            }
        }
        self.log.push(LogEntry { event: ev.clone(), assigned });
        self.stage = ev.stage;
        Ok(cs)
    }

    pub fn insert_edge(&mut self, u: VertexId, v: VertexId, w: f64) -> Result<EdgeId> {
        let cs = self.apply(UpdateKind::InsertEdge { u, v, w })?;
        Ok(cs.inserted[0].0)
    }

    /// Inserts an edge under a caller-chosen id.
    pub fn insert_edge_with_id(&mut self, id: EdgeId, u: VertexId, v: VertexId, w: f64) -> Result<()> {
        self.raw_insert(id, u, v, w)?;
        self.push_log(UpdateKind::InsertEdge { u, v, w }, Some(id));
        Ok(())
    }

    pub fn delete_edge(&mut self, id: EdgeId) -> Result<Edge> {
        let e = *self.edges.get(&id).ok_or(Error::UnknownEdge(id))?;
        self.apply(UpdateKind::DeleteEdge(id))?;
        Ok(e)
    }

    /// Recomputes every degree from scratch and compares with the cache.
    pub fn degree_cache_consistent(&self) -> bool {
        let mut d = vec![0.0; self.n];
        for e in self.edges.values() {
            d[e.u.0] += e.w;
            if e.u != e.v {
                d[e.v.0] += e.w;
            }
        }
        d.iter().zip(&self.degree).all(|(a, b)| (a - b).abs() <= 1e-9 * a.abs().max(1.0))
    }

    /// Rebuilds the graph from its origin by re-applying the log.
    pub fn replay(&self) -> Result<DynamicGraph> {
        let mut g = DynamicGraph::new(self.initial.n);
        for (id, e) in &self.initial.edges {
            g.raw_insert(*id, e.u, e.v, e.w)?;
        }
        g.next_edge = self.initial.next_edge;
        g.degree = self.initial.degree.clone();
        g.reset_origin();
        for entry in &self.log {
            match (&entry.event.kind, entry.assigned) {
                (UpdateKind::InsertEdge { u, v, w }, Some(id)) => {
                    g.raw_insert(id, *u, *v, *w)?;
                    g.log.push(entry.clone());
                    g.stage = entry.event.stage;
                }
                _ => {
                    g.apply_update(entry.event.clone())?;
                }
            }
        }
        Ok(g)
    }

    /// Bit-exact structural equality of the current state.
    pub fn same_state(&self, other: &DynamicGraph) -> bool {
        self.n == other.n
            && self.edges.len() == other.edges.len()
            && self.edges.iter().zip(other.edges.iter()).all(|((a, ea), (b, eb))| {
                a == b && ea.u == eb.u && ea.v == eb.v && ea.w.to_bits() == eb.w.to_bits()
            })
            && self.degree.iter().zip(&other.degree).all(|(a, b)| a.to_bits() == b.to_bits())
    }

    /// Multiset of `(min endpoint, max endpoint, weight bits)` triples.
    pub fn edge_multiset(&self) -> BTreeMap<(usize, usize, u64), usize> {
        let mut out = BTreeMap::new();
        for e in self.edges.values() {
            let (a, b) = if e.u <= e.v { (e.u.0, e.v.0) } else { (e.v.0, e.u.0) };
            *out.entry((a, b, e.w.to_bits())).or_insert(0) += 1;
        }
        out
    }

    /// Subgraph on the same vertex set keeping only edges in `keep`.
    pub fn edge_subgraph<F: Fn(EdgeId, &Edge) -> bool>(&self, keep: F) -> DynamicGraph {
        let edges = self
            .edges
            .iter()
            .filter(|(id, e)| keep(**id, e))
            .map(|(&id, e)| (id, e.u.0, e.v.0, e.w));
        DynamicGraph::from_edges_with_ids(self.n, edges).expect("edges come from a valid graph")
    }

    /// Induced subgraph on `set`, with local vertex ids in the order of `set`.
    /// Edge ids are preserved.
    pub fn induced(&self, set: &[VertexId]) -> DynamicGraph {
        let mut local = vec![usize::MAX; self.n];
        for (i, v) in set.iter().enumerate() {
            local[v.0] = i;
        }
        let mut edges = Vec::new();
        for (&id, e) in &self.edges {
            let (a, b) = (local[e.u.0], local[e.v.0]);
            if a != usize::MAX && b != usize::MAX {
                edges.push((id, a, b, e.w));
            }
        }
        DynamicGraph::from_edges_with_ids(set.len(), edges).expect("edges come from a valid graph")
    }

    /// Connected components (ignoring self-loops), each sorted, ordered by
    /// smallest member.
    pub fn components(&self) -> Vec<Vec<VertexId>> {
        let mut comp = vec![usize::MAX; self.n];
        let mut out = Vec::new();
        for s in 0..self.n {
            if comp[s] != usize::MAX {
                continue;
            }
            let c = out.len();
            let mut members = vec![VertexId(s)];
            comp[s] = c;
            let mut i = 0;
            while i < members.len() {
                let x = members[i];
                i += 1;
                for id in &self.incident[x.0] {
                    let y = self.edges[id].other(x);
                    if comp[y.0] == usize::MAX {
                        comp[y.0] = c;
                        members.push(y);
                    }
                }
            }
            members.sort();
            out.push(members);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: usize) -> VertexId {
        VertexId(i)
    }

    #[test]
    fn delete_only_edge_of_k2() {
        let mut g = DynamicGraph::from_edges(2, [(0, 1, 1.0)]).unwrap();
        let cs = g.apply(UpdateKind::DeleteEdge(EdgeId(0))).unwrap();
        assert_eq!(cs.deleted, vec![EdgeId(0)]);
        assert_eq!(g.degrees(), &[0.0, 0.0]);
        assert_eq!(g.m(), 0);
    }

    #[test]
    fn parallel_inserts_get_distinct_ids() {
        let mut g = DynamicGraph::new(2);
        let a = g.insert_edge(v(0), v(1), 1.0).unwrap();
        let b = g.insert_edge(v(0), v(1), 1.0).unwrap();
        assert_ne!(a, b);
        assert_eq!(g.degree(v(0)), 2.0);
    }

    #[test]
    fn batch_delete_triangle() {
        let mut g = DynamicGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]).unwrap();
        let cs = g.apply(UpdateKind::BatchDelete(vec![EdgeId(0), EdgeId(1), EdgeId(2)])).unwrap();
        assert_eq!(cs.deleted.len(), 3);
        assert!(g.degrees().iter().all(|&d| d == 0.0));
    }

    #[test]
    fn batch_delete_is_atomic_on_unknown_edge() {
        let mut g = DynamicGraph::from_edges(3, [(0, 1, 1.0)]).unwrap();
        let err = g.apply(UpdateKind::BatchDelete(vec![EdgeId(0), EdgeId(9)])).unwrap_err();
        assert_eq!(err, Error::UnknownEdge(EdgeId(9)));
        assert_eq!(g.m(), 1);
    }

    #[test]
    fn errors_on_bad_input() {
        let mut g = DynamicGraph::new(2);
        assert_eq!(g.insert_edge(v(0), v(5), 1.0).unwrap_err(), Error::UnknownVertex(v(5)));
        assert_eq!(g.insert_edge(v(0), v(1), 0.0).unwrap_err(), Error::NonPositiveWeight(0.0));
        assert_eq!(g.delete_edge(EdgeId(3)).unwrap_err(), Error::UnknownEdge(EdgeId(3)));
    }

    #[test]
    fn stages_must_increase() {
        let mut g = DynamicGraph::new(2);
        g.apply_update(UpdateEvent { kind: UpdateKind::InsertEdge { u: v(0), v: v(1), w: 1.0 }, stage: 4 })
            .unwrap();
        let err = g
            .apply_update(UpdateEvent { kind: UpdateKind::DeleteEdge(EdgeId(0)), stage: 4 })
            .unwrap_err();
        assert_eq!(err, Error::StageMismatch { last: 4, got: 4 });
    }

    #[test]
    fn incident_snapshots() {
        let g = DynamicGraph::from_edges(6, (1..5).map(|i| (0, i, 1.0))).unwrap();
        assert!(g.snapshot_incident(v(5)).unwrap().is_empty());
        let star = g.snapshot_incident(v(0)).unwrap();
        assert_eq!(star.len(), 4);
        assert!(star.windows(2).all(|w| w[0].0 < w[1].0));

        let looped = DynamicGraph::from_edges(1, [(0, 0, 2.0)]).unwrap();
        assert_eq!(looped.snapshot_incident(v(0)).unwrap(), vec![(EdgeId(0), v(0), 2.0)]);
        assert_eq!(looped.degree(v(0)), 2.0);
    }

    #[test]
    fn replay_reproduces_state() {
        let mut g = DynamicGraph::from_edges(4, [(0, 1, 1.0), (1, 2, 2.5), (2, 3, 1.0)]).unwrap();
        g.insert_edge(v(3), v(0), 0.5).unwrap();
        g.delete_edge(EdgeId(1)).unwrap();
        g.insert_edge_with_id(EdgeId(40), v(1), v(1), 3.0).unwrap();
        g.apply(UpdateKind::BatchDelete(vec![EdgeId(0), EdgeId(3)])).unwrap();
        let r = g.replay().unwrap();
        assert!(r.same_state(&g));
        assert_eq!(r.log(), g.log());
    }
}
