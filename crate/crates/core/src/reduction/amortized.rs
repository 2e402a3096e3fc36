//! Fully dynamic sparsifier with amortized guarantees: weight buckets, a
//! dynamic uniform-degree decomposition per bucket, and a decremental
//! sampler on every cluster's degree-split companion.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng as _;

use crate::derive::{spanner_bound, SpectralConfig, SpectralQuery};
use crate::dyndecomp::{ClusterId, DecompEvent, DynCluster, DynDecomposition};
use crate::error::Result;
use crate::graph::{ChangeSet, DynamicGraph, EdgeId, VertexId};
use crate::output::ProblemKind;
use crate::proactive::{SamplerConfig, SamplerState};
use crate::Rng;

use super::buckets::{bucket_index, bucket_scale};
use super::{swap_edges, DynamicSparsifier};

/// Cut approximation advertised for a sampler on an `n`-vertex expander:
/// `max(2, 8·log₂ n)`.
pub fn sampler_alpha(n: usize) -> f64 {
    (8.0 * (n.max(2) as f64).log2()).max(2.0)
}

pub(crate) type Contribution = Vec<(EdgeId, VertexId, VertexId, f64)>;

enum ClusterInner {
    Sampler(SamplerState),
    Spectral { query: SpectralQuery, current: DynamicGraph, rng: Rng },
}

impl ClusterInner {
    fn build(kind: ProblemKind, companion: &DynamicGraph, phi: f64, eps: f64, mut rng: Rng) -> Result<Self> {
        Ok(match kind {
            ProblemKind::Spectral => {
                let query = SpectralQuery::new(companion, eps.min(0.5), phi, SpectralConfig::default())?;
                let current = query.query(&mut rng)?.graph;
                ClusterInner::Spectral { query, current, rng }
            }
            _ => ClusterInner::Sampler(SamplerState::new(companion, SamplerConfig::desk_for(companion, phi), rng)),
        })
    }

    fn delete(&mut self, id: EdgeId) -> Result<()> {
        match self {
            ClusterInner::Sampler(s) => s.delete(id).map(|_| ()),
            ClusterInner::Spectral { query, current, rng } => {
                query.delete(id, &[])?;
                *current = query.query(rng)?.graph;
                Ok(())
            }
        }
    }

    fn output(&self) -> DynamicGraph {
        match self {
            ClusterInner::Sampler(s) => s.current_sparsifier(),
            ClusterInner::Spectral { current, .. } => current.clone(),
        }
    }
}

struct BucketState {
    decomp: DynDecomposition,
    inners: BTreeMap<ClusterId, ClusterInner>,
    contributions: BTreeMap<ClusterId, Contribution>,
}

fn contract_output(c: &DynCluster, out: &DynamicGraph, kind: ProblemKind, scale: f64) -> Contribution {
    let comp = c.companion.as_ref().expect("uniform clusters carry companions");
    contract_companion(&c.vertices, &comp.map.owner, out, kind, scale)
}

/// Maps a companion output back onto global vertices: gadget edges become
/// loops and are dropped, original edges keep their ids. Spanner outputs
/// take unit weights before scaling.
pub(crate) fn contract_companion(
    vertices: &[VertexId],
    owner: &[VertexId],
    out: &DynamicGraph,
    kind: ProblemKind,
    scale: f64,
) -> Contribution {
    out.edges()
        .filter_map(|(id, e)| {
            let a = vertices[owner[e.u.0].0];
            let b = vertices[owner[e.v.0].0];
            if a == b {
                return None;
            }
            let w = if kind == ProblemKind::Spanner { 1.0 } else { e.w };
            Some((id, a, b, w * scale))
        })
        .collect()
}

/// Amortized fully dynamic sparsifier for any [`ProblemKind`].
pub struct AmortizedPipeline {
    kind: ProblemKind,
    eps: f64,
    phi: f64,
    input: DynamicGraph,
    output: DynamicGraph,
    buckets: BTreeMap<i64, BucketState>,
    bucket_of: BTreeMap<EdgeId, i64>,
    rng: Rng,
}

impl AmortizedPipeline {
    pub fn new(g: &DynamicGraph, kind: ProblemKind, eps: f64, phi: f64, seed: u64) -> Result<Self> {
        let mut input = g.clone();
        input.reset_origin();
        let mut p = AmortizedPipeline {
            kind,
            eps,
            phi,
            output: DynamicGraph::new(g.n()),
            input: DynamicGraph::new(g.n()),
            buckets: BTreeMap::new(),
            bucket_of: BTreeMap::new(),
            rng: crate::rng(seed),
        };
        let mut groups: BTreeMap<i64, Vec<(EdgeId, usize, usize, f64)>> = BTreeMap::new();
        for (id, e) in input.edges() {
            if !e.is_loop() {
                let k = bucket_index(e.w, eps);
                groups.entry(k).or_default().push((id, e.u.0, e.v.0, 1.0));
                p.bucket_of.insert(id, k);
            }
        }
        for (k, edges) in groups {
            let bg = DynamicGraph::from_edges_with_ids(g.n(), edges)?;
            let (decomp, events) = DynDecomposition::new(&bg, phi, true)?;
            p.buckets.insert(k, BucketState { decomp, inners: BTreeMap::new(), contributions: BTreeMap::new() });
            p.route(k, &events)?;
        }
        p.input = input;
        Ok(p)
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Number of live clusters summed over buckets.
    pub fn cluster_count(&self) -> usize {
        self.buckets.values().map(|b| b.decomp.clusters().count()).sum()
    }

    pub fn bucket_count(&self) -> usize {
        self.buckets.len()
    }

    /// Accuracy of the per-cluster outputs before weight rounding.
    pub fn inner_eps(&self) -> f64 {
        let n = self.input.n();
        match self.kind {
            ProblemKind::Cut => sampler_alpha(n).ln(),
            ProblemKind::Spanner => spanner_bound(sampler_alpha(n), self.input.m().max(n), self.phi).ln(),
            ProblemKind::Spectral => self.eps.min(0.5),
        }
    }

    /// Feeds decomposition events to the cluster samplers and refreshes the
    /// output for every touched cluster.
    fn route(&mut self, k: i64, events: &[DecompEvent]) -> Result<ChangeSet> {
        let scale = bucket_scale(k, self.eps);
        let b = self.buckets.get_mut(&k).expect("bucket exists");
        let mut touched = BTreeSet::new();
        for ev in events {
            match *ev {
                DecompEvent::ClusterAdded { cluster } => {
                    let c = b.decomp.cluster(cluster).expect("added cluster is live");
                    let comp = &c.companion.as_ref().expect("uniform clusters carry companions").companion;
                    let inner = ClusterInner::build(self.kind, comp, self.phi, self.eps, crate::rng(self.rng.random()))?;
                    b.inners.insert(cluster, inner);
                    touched.insert(cluster);
                }
                DecompEvent::EdgeDeleted { cluster, edge } => {
                    b.inners.get_mut(&cluster).expect("cluster has a sampler").delete(edge)?;
                    touched.insert(cluster);
                }
                DecompEvent::ClusterRemoved { cluster } => {
                    b.inners.remove(&cluster);
                    touched.insert(cluster);
                }
            }
        }
        let mut old = Vec::new();
        let mut new = Vec::new();
        for id in touched {
            if let Some(c) = b.contributions.remove(&id) {
                old.extend(c);
            }
            if let (Some(inner), Some(c)) = (b.inners.get(&id), b.decomp.cluster(id)) {
                let contrib = contract_output(c, &inner.output(), self.kind, scale);
                new.extend(contrib.iter().copied());
                b.contributions.insert(id, contrib);
            }
        }
        swap_edges(&mut self.output, &old, &new)
    }

    /// Output edge count per bucket.
    pub fn bucket_output_sizes(&self) -> BTreeMap<i64, usize> {
        self.buckets.iter().map(|(&k, b)| (k, b.contributions.values().map(Vec::len).sum())).collect()
    }

    /// Every bucket's decomposition conserves its edges.
    pub fn decompositions_consistent(&self) -> bool {
        self.buckets.values().all(|b| b.decomp.conserved() && b.decomp.companions_consistent())
    }
}

impl DynamicSparsifier for AmortizedPipeline {
    fn kind(&self) -> ProblemKind {
        self.kind
    }

    /// Inner accuracy composed with the `ε/2` weight rounding.
    fn eps(&self) -> f64 {
        self.inner_eps() + self.eps / 2.0
    }

    fn input(&self) -> &DynamicGraph {
        &self.input
    }

    fn output(&self) -> &DynamicGraph {
        &self.output
    }

    fn insert(&mut self, id: EdgeId, u: VertexId, v: VertexId, w: f64) -> Result<ChangeSet> {
        self.input.insert_edge_with_id(id, u, v, w)?;
        if u == v {
            return Ok(ChangeSet::default());
        }
        let k = bucket_index(w, self.eps);
        self.bucket_of.insert(id, k);
        let n = self.input.n();
        let phi = self.phi;
        let events = match self.buckets.get_mut(&k) {
            Some(b) => b.decomp.insert_with_id(id, u, v, 1.0)?,
            None => {
                let mut bg = DynamicGraph::new(n);
                bg.insert_edge_with_id(id, u, v, 1.0)?;
                let (decomp, events) = DynDecomposition::new(&bg, phi, true)?;
                self.buckets.insert(k, BucketState { decomp, inners: BTreeMap::new(), contributions: BTreeMap::new() });
                events
            }
        };
        self.route(k, &events)
    }

    fn delete(&mut self, id: EdgeId) -> Result<ChangeSet> {
        self.input.delete_edge(id)?;
        let Some(k) = self.bucket_of.remove(&id) else {
            return Ok(ChangeSet::default());
        };
        let events = self.buckets.get_mut(&k).expect("bucket exists").decomp.delete(id)?;
        self.route(k, &events)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::UpdateKind;
    use crate::reduction::apply_changes;

    #[test]
    fn static_expander_output_passes() {
        let g = crate::expander::margulis(3).unwrap();
        for kind in ProblemKind::ALL {
            let p = AmortizedPipeline::new(&g, kind, 0.5, 0.1, 1).unwrap();
            assert!(kind.contains(p.input(), p.output(), p.eps()).unwrap(), "{kind:?}");
            assert!(p.decompositions_consistent());
        }
    }

    #[test]
    fn weighted_trace_keeps_membership_and_changesets() {
        let mut rng = crate::rng(8);
        let g = crate::gen::random_weighted(10, 30, 2f64.exp(), &mut rng);
        for kind in ProblemKind::ALL {
            let mut p = AmortizedPipeline::new(&g, kind, 0.5, 0.1, 2).unwrap();
            let mut mirror = p.output().clone();
            for step in 0..30 {
                let upd = if step % 3 == 0 || p.input().m() < 5 {
                    let u = rng.random_range(0..10);
                    let v = (u + rng.random_range(1..10)) % 10;
                    UpdateKind::InsertEdge { u: VertexId(u), v: VertexId(v), w: (rng.random::<f64>() * 2.0).exp() }
                } else {
                    let ids = p.input().edge_ids();
                    UpdateKind::DeleteEdge(ids[rng.random_range(0..ids.len())])
                };
                let cs = p.apply(&upd).unwrap();
                apply_changes(&mut mirror, &cs).unwrap();
                assert!(mirror.same_state(p.output()) || mirror.edge_multiset() == p.output().edge_multiset());
                assert!(kind.contains(p.input(), p.output(), p.eps()).unwrap(), "{kind:?} step {step}");
            }
            assert!(p.decompositions_consistent());
        }
    }
}
