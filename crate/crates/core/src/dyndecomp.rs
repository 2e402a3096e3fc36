//! Fully dynamic expander decomposition over power-of-two edge buckets.
//!
//! Bucket `i` holds at most `2^i` edges. Insertions enter bucket 1 and
//! overflow upward; a deletion prunes the owning cluster and sends the
//! pruned edges back through bucket 1. Clusters only lose edges between
//! creation and removal.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::decomp::{certify, decompose_edges, decompose_uniform, Certificate, Cluster};
use crate::error::Result;
use crate::expander::ContractionMap;
use crate::graph::{DynamicGraph, EdgeId, UpdateEvent, UpdateKind, VertexId};
use crate::prune::{PruneMode, PruneState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClusterId(pub usize);

/// Output stream toward consumers of the decomposition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum DecompEvent {
    EdgeDeleted { cluster: ClusterId, edge: EdgeId },
    ClusterRemoved { cluster: ClusterId },
    ClusterAdded { cluster: ClusterId },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ClusterLog {
    Added,
    EdgeDeleted(EdgeId),
    Removed,
}

/// Companion data of a cluster in the uniform variant, in cluster-local ids.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CompanionState {
    pub companion: DynamicGraph,
    pub map: ContractionMap,
    pub delta: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DynCluster {
    pub id: ClusterId,
    pub bucket: usize,
    /// Global ids of the cluster's vertices at creation (local id = index).
    pub vertices: Vec<VertexId>,
    pub initial_certificate: Certificate,
    pub initial_min_degree: f64,
    pub initial_edges: usize,
    pub deletions: usize,
    pub prune: PruneState,
    pub companion: Option<CompanionState>,
}

impl DynCluster {
    /// The cluster's current graph (local ids).
    pub fn graph(&self) -> &DynamicGraph {
        self.prune.graph()
    }

    /// Current cluster graph restricted to surviving vertices.
    pub fn live_graph(&self) -> DynamicGraph {
        self.prune.survivor_graph()
    }

    pub fn edge_ids(&self) -> Vec<EdgeId> {
        self.graph().edge_ids()
    }

    pub fn local_of(&self, v: VertexId) -> Option<VertexId> {
        self.vertices.binary_search(&v).ok().map(VertexId)
    }

    /// Conductance evidence for the non-isolated part of the current graph.
    pub fn live_certificate(&self) -> Certificate {
        let g = self.graph();
        let active: Vec<VertexId> = g.vertices().filter(|&v| g.degree(v) > 0.0).collect();
        certify(&g.induced(&active))
    }

    /// Current minimum degree over non-isolated vertices, relative to the
    /// minimum degree at creation.
    pub fn min_degree_ratio(&self) -> f64 {
        let g = self.graph();
        let live = g.vertices().map(|v| g.degree(v)).filter(|&d| d > 0.0).fold(f64::INFINITY, f64::min);
        if live.is_finite() && self.initial_min_degree > 0.0 {
            live / self.initial_min_degree
        } else {
            1.0
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DynDecomposition {
    phi: f64,
    uniform: bool,
    graph: DynamicGraph,
    buckets: BTreeMap<usize, Vec<ClusterId>>,
    clusters: BTreeMap<ClusterId, DynCluster>,
    owner: BTreeMap<EdgeId, ClusterId>,
    logs: BTreeMap<ClusterId, Vec<ClusterLog>>,
    next_cluster: usize,
}

/// Index of the bucket populated at initialization: `max(1, ⌈log₂ m⌉)`.
pub fn initial_bucket(m: usize) -> usize {
    if m <= 1 {
        1
    } else {
        ((m as f64).log2().ceil() as usize).max(1)
    }
}

impl DynDecomposition {
    pub fn new(g: &DynamicGraph, phi: f64, uniform: bool) -> Result<(Self, Vec<DecompEvent>)> {
        let mut graph = g.clone();
        graph.reset_origin();
        let mut state = DynDecomposition {
            phi,
            uniform,
            graph,
            buckets: BTreeMap::new(),
            clusters: BTreeMap::new(),
            owner: BTreeMap::new(),
            logs: BTreeMap::new(),
            next_cluster: 0,
        };
        let mut events = Vec::new();
        if g.m() > 0 {
            let ids = g.edge_ids();
            state.build_bucket(initial_bucket(g.m()), &ids, &mut events)?;
        }
        Ok((state, events))
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    pub fn cluster(&self, id: ClusterId) -> Option<&DynCluster> {
        self.clusters.get(&id)
    }

    pub fn clusters(&self) -> impl Iterator<Item = &DynCluster> {
        self.clusters.values()
    }

    pub fn owner_of(&self, e: EdgeId) -> Option<ClusterId> {
        self.owner.get(&e).copied()
    }

    pub fn logs(&self) -> &BTreeMap<ClusterId, Vec<ClusterLog>> {
        &self.logs
    }

    /// Number of edges in each nonempty bucket.
    pub fn bucket_sizes(&self) -> BTreeMap<usize, usize> {
        self.buckets
            .iter()
            .map(|(&i, ids)| (i, ids.iter().map(|c| self.clusters[c].graph().m()).sum()))
            .filter(|&(_, s)| s > 0)
            .collect()
    }

    fn bucket_edges(&self, i: usize) -> Vec<EdgeId> {
        let mut ids: Vec<EdgeId> =
            self.buckets.get(&i).into_iter().flatten().flat_map(|c| self.clusters[c].edge_ids()).collect();
        ids.sort();
        ids
    }

    /// Dissolution threshold on deletions for a cluster created with `k` edges.
    pub fn removal_threshold(&self, k: usize) -> usize {
        if self.uniform {
            (self.phi * k as f64).floor() as usize
        } else {
            (self.phi * k as f64 / 10.0).floor() as usize
        }
    }

    fn add_cluster(&mut self, bucket: usize, cluster: Cluster, companion: Option<CompanionState>, min_degree: f64, events: &mut Vec<DecompEvent>) {
        let id = ClusterId(self.next_cluster);
        self.next_cluster += 1;
        for e in cluster.edge_ids() {
            self.owner.insert(e, id);
        }
        let mode = if self.uniform { PruneMode::Uniform { delta: min_degree } } else { PruneMode::Amortized };
        let prune = PruneState::new(&cluster.graph, self.phi, mode).with_budget(None);
        let dc = DynCluster {
            id,
            bucket,
            initial_edges: cluster.graph.m(),
            initial_min_degree: min_degree,
            initial_certificate: cluster.certificate,
            vertices: cluster.vertices,
            deletions: 0,
            prune,
            companion,
        };
        self.clusters.insert(id, dc);
        self.buckets.entry(bucket).or_default().push(id);
        self.logs.insert(id, vec![ClusterLog::Added]);
        events.push(DecompEvent::ClusterAdded { cluster: id });
    }

    fn remove_cluster(&mut self, id: ClusterId, events: &mut Vec<DecompEvent>) -> Vec<EdgeId> {
        let c = self.clusters.remove(&id).expect("live cluster");
        if let Some(list) = self.buckets.get_mut(&c.bucket) {
            list.retain(|&x| x != id);
        }
        let ids = c.edge_ids();
        for e in &ids {
            self.owner.remove(e);
        }
        self.logs.get_mut(&id).expect("logged").push(ClusterLog::Removed);
        events.push(DecompEvent::ClusterRemoved { cluster: id });
        ids
    }

    fn build_bucket(&mut self, bucket: usize, ids: &[EdgeId], events: &mut Vec<DecompEvent>) -> Result<()> {
        let keep: std::collections::BTreeSet<EdgeId> = ids.iter().copied().collect();
        let sub = self.graph.edge_subgraph(|id, _| keep.contains(&id));
        if self.uniform {
            let d = decompose_uniform(&sub, self.phi)?;
            for uc in d.clusters {
                let comp = CompanionState { companion: uc.companion, map: uc.map, delta: uc.delta };
                self.add_cluster(bucket, uc.cluster, Some(comp), uc.min_degree, events);
            }
        } else {
            let d = decompose_edges(&sub, self.phi)?;
            for c in d.clusters {
                let min_degree = c.graph.min_degree();
                self.add_cluster(bucket, c, None, min_degree, events);
            }
        }
        Ok(())
    }

    /// Places `incoming` edges (already in the graph) starting at bucket 1,
    /// overflowing upward until a bucket can absorb them.
    fn cascade(&mut self, incoming: Vec<EdgeId>, events: &mut Vec<DecompEvent>) -> Result<()> {
        if incoming.is_empty() {
            return Ok(());
        }
        let mut carry = incoming;
        let mut i = 1;
        loop {
            let resident = self.bucket_edges(i);
            for id in self.buckets.get(&i).cloned().unwrap_or_default() {
                self.remove_cluster(id, events);
            }
            carry.extend(resident);
            if carry.len() <= 1usize << i.min(62) {
                carry.sort();
                return self.build_bucket(i, &carry, events);
            }
            i += 1;
        }
    }

    pub fn insert(&mut self, u: VertexId, v: VertexId, w: f64) -> Result<(EdgeId, Vec<DecompEvent>)> {
        let id = self.graph.insert_edge(u, v, w)?;
        let mut events = Vec::new();
        self.cascade(vec![id], &mut events)?;
        Ok((id, events))
    }

    pub fn insert_with_id(&mut self, id: EdgeId, u: VertexId, v: VertexId, w: f64) -> Result<Vec<DecompEvent>> {
        self.graph.insert_edge_with_id(id, u, v, w)?;
        let mut events = Vec::new();
        self.cascade(vec![id], &mut events)?;
        Ok(events)
    }

    pub fn delete(&mut self, id: EdgeId) -> Result<Vec<DecompEvent>> {
        self.graph.delete_edge(id)?;
        let cid = self.owner.remove(&id).expect("every edge has an owning cluster");
        let mut events = vec![DecompEvent::EdgeDeleted { cluster: cid, edge: id }];
        self.logs.get_mut(&cid).expect("logged").push(ClusterLog::EdgeDeleted(id));
        let threshold = {
            let c = &self.clusters[&cid];
            self.removal_threshold(c.initial_edges)
        };
        let c = self.clusters.get_mut(&cid).expect("live cluster");
        c.deletions += 1;
        let pruned = c.prune.delete(id)?;
        if let Some(comp) = c.companion.as_mut() {
            comp.companion.delete_edge(id)?;
        }
        if c.deletions > threshold {
            let rest = self.remove_cluster(cid, &mut events);
            return self.cascade(rest, &mut events).map(|_| events);
        }
        let mut released = Vec::new();
        if !pruned.is_empty() {
            let c = self.clusters.get_mut(&cid).expect("live cluster");
            released = c.prune.release_pruned_edges();
            if let Some(comp) = c.companion.as_mut() {
                for &eid in &released {
                    comp.companion.delete_edge(eid)?;
                }
            }
            for &eid in &released {
                self.owner.remove(&eid);
                self.logs.get_mut(&cid).expect("logged").push(ClusterLog::EdgeDeleted(eid));
                events.push(DecompEvent::EdgeDeleted { cluster: cid, edge: eid });
            }
        }
        if self.clusters[&cid].graph().m() == 0 {
            self.remove_cluster(cid, &mut events);
        }
        self.cascade(released, &mut events)?;
        Ok(events)
    }

    pub fn apply(&mut self, kind: &UpdateKind) -> Result<Vec<DecompEvent>> {
        match kind {
            UpdateKind::InsertEdge { u, v, w } => self.insert(*u, *v, *w).map(|(_, ev)| ev),
            UpdateKind::DeleteEdge(id) => self.delete(*id),
            UpdateKind::BatchDelete(ids) => {
                let mut events = Vec::new();
                for &id in ids {
                    events.extend(self.delete(id)?);
                }
                Ok(events)
            }
        }
    }

    pub fn apply_event(&mut self, ev: &UpdateEvent) -> Result<Vec<DecompEvent>> {
        self.apply(&ev.kind)
    }

    /// The cluster edge ids, all together, equal the graph's edge ids.
    pub fn conserved(&self) -> bool {
        let mut ids: Vec<EdgeId> = self.clusters.values().flat_map(|c| c.edge_ids()).collect();
        ids.sort();
        let before = ids.len();
        ids.dedup();
        ids.len() == before && ids == self.graph.edge_ids() && ids.iter().all(|e| self.owner.contains_key(e))
    }

    /// Every cluster's edges match the graph edge by edge (endpoints and weight).
    pub fn clusters_match_graph(&self) -> bool {
        self.clusters.values().all(|c| {
            c.graph().edges().all(|(id, e)| {
                self.graph.edge(id).is_some_and(|ge| {
                    let (a, b) = (c.vertices[e.u.0], c.vertices[e.v.0]);
                    ((a, b) == (ge.u, ge.v) || (a, b) == (ge.v, ge.u)) && ge.w == e.w
                })
            })
        })
    }

    /// Each cluster log is `Added, EdgeDeleted*, [Removed]`.
    pub fn logs_deletion_only(&self) -> bool {
        self.logs.iter().all(|(id, log)| {
            let removed = matches!(log.last(), Some(ClusterLog::Removed));
            log.first() == Some(&ClusterLog::Added)
                && log[1..log.len() - usize::from(removed)].iter().all(|l| matches!(l, ClusterLog::EdgeDeleted(_)))
                && removed != self.clusters.contains_key(id)
        })
    }

    /// Every live cluster's companion contracts back to the cluster graph.
    pub fn companions_consistent(&self) -> bool {
        self.clusters.values().all(|c| match &c.companion {
            None => true,
            Some(comp) => {
                let image = comp.companion.edge_subgraph(|id, _| !comp.map.internal_edges.contains(&id));
                crate::expander::contract(&image, &comp.map).is_ok_and(|g| g.edge_multiset() == c.graph().edge_multiset())
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    fn v(i: usize) -> VertexId {
        VertexId(i)
    }

    #[test]
    fn third_insert_overflows_into_bucket_two() {
        let g = DynamicGraph::new(4);
        let (mut d, ev) = DynDecomposition::new(&g, 0.2, false).unwrap();
        assert!(ev.is_empty());
        d.insert(v(0), v(1), 1.0).unwrap();
        d.insert(v(1), v(2), 1.0).unwrap();
        assert_eq!(d.bucket_sizes(), BTreeMap::from([(1, 2)]));
        d.insert(v(2), v(3), 1.0).unwrap();
        assert_eq!(d.bucket_sizes(), BTreeMap::from([(2, 3)]));
        assert!(d.conserved());
    }

    #[test]
    fn initial_bucket_follows_log_m() {
        assert_eq!(initial_bucket(0), 1);
        assert_eq!(initial_bucket(2), 1);
        assert_eq!(initial_bucket(3), 2);
        assert_eq!(initial_bucket(64), 6);
        assert_eq!(initial_bucket(65), 7);
    }

    fn random_trace(seed: u64, uniform: bool) {
        let mut rng = crate::rng(seed);
        let n = 10;
        let mut edges = Vec::new();
        for _ in 0..25 {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a != b {
                edges.push((a, b, 1.0));
            }
        }
        let g = DynamicGraph::from_edges(n, edges).unwrap();
        let phi = 0.2;
        let (mut d, _) = DynDecomposition::new(&g, phi, uniform).unwrap();
        for _ in 0..100 {
            let ids = d.graph().edge_ids();
            if !ids.is_empty() && rng.random_bool(0.5) {
                let id = ids[rng.random_range(0..ids.len())];
                d.delete(id).unwrap();
            } else {
                let a = rng.random_range(0..n);
                let b = (a + 1 + rng.random_range(0..n - 1)) % n;
                d.insert(v(a), v(b), 1.0).unwrap();
            }
            assert!(d.conserved());
            assert!(d.clusters_match_graph());
            assert!(d.logs_deletion_only());
            assert!(d.companions_consistent());
            for c in d.clusters() {
                let cert = c.live_certificate();
                assert!(!cert.exact || cert.conductance >= phi / 6.0 - 1e-9, "cluster {:?} {}", c.id, cert.conductance);
            }
        }
    }

    #[test]
    fn random_traces_keep_invariants() {
        for seed in 0..4 {
            random_trace(seed, false);
        }
    }

    #[test]
    fn uniform_traces_keep_companions() {
        for seed in 0..3 {
            random_trace(seed, true);
        }
    }

    #[test]
    fn deletion_emits_owner_event_first() {
        let g = crate::expander::margulis(3).unwrap();
        let (mut d, _) = DynDecomposition::new(&g, 0.1, false).unwrap();
        let id = g.edges().find(|(_, e)| e.u != e.v).unwrap().0;
        let owner = d.owner_of(id).unwrap();
        let ev = d.delete(id).unwrap();
        assert_eq!(ev[0], DecompEvent::EdgeDeleted { cluster: owner, edge: id });
        assert!(d.conserved());
    }
}
