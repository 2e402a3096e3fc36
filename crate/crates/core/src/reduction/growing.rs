//! Fully dynamic wrapper with worst-case guarantees for a bounded number of
//! updates: a static uniform-degree decomposition whose clusters run
//! worst-case pruning feeding pruned-input samplers. Insertions go straight
//! into the output.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng as _;

use crate::decomp::decompose_uniform;
use crate::derive::{spanner_bound, SpectralBound};
use crate::error::{Error, Result};
use crate::graph::{ChangeSet, DynamicGraph, EdgeId, VertexId};
use crate::output::ProblemKind;
use crate::proactive::{NeighborPolicy, SamplerConfig, SamplerState};
use crate::prune::{WcPruneConfig, WcPruneState};

use super::amortized::{contract_companion, sampler_alpha, Contribution};
use super::buckets::{bucket_by_weight, bucket_scale};
use super::{swap_edges, DynamicSparsifier};

/// Extra incident edges pruned at each endpoint of a freshly pruned edge.
const EXTRA_PER_ENDPOINT: usize = 2;

struct WcCluster {
    vertices: Vec<VertexId>,
    owner: Vec<VertexId>,
    scale: f64,
    prune: WcPruneState,
    sampler: SamplerState,
    contribution: Contribution,
}

impl WcCluster {
    /// Worst-case pruning picks the edges to move into the sampler's pruned
    /// overlay; every freshly pruned edge also drags a few present incident
    /// edges at both endpoints along.
    fn delete(&mut self, id: EdgeId) -> Result<()> {
        let fresh = self.prune.delete(id)?;
        let g = self.sampler.graph();
        let mut set: BTreeSet<EdgeId> = fresh.iter().copied().filter(|&e| e != id && g.contains_edge(e)).collect();
        for &e in &fresh {
            let Some(edge) = g.edge(e).copied() else { continue };
            for x in [edge.u, edge.v] {
                let extra: Vec<EdgeId> = g.incident(x).filter(|&f| f != id && !set.contains(&f)).take(EXTRA_PER_ENDPOINT).collect();
                set.extend(extra);
            }
        }
        let pruned: Vec<EdgeId> = set.into_iter().collect();
        self.sampler.delete_pruned(id, &pruned)?;
        Ok(())
    }

    fn refresh(&mut self, kind: ProblemKind) -> (Contribution, Contribution) {
        let new = contract_companion(&self.vertices, &self.owner, &self.sampler.current_sparsifier(), kind, self.scale);
        let old = std::mem::replace(&mut self.contribution, new.clone());
        (old, new)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowingConfig {
    pub eps: f64,
    pub phi: f64,
    pub gamma: usize,
}

impl GrowingConfig {
    pub fn new(eps: f64, phi: f64) -> Self {
        GrowingConfig { eps, phi, gamma: 16 }
    }
}

pub struct GrowingOutput {
    kind: ProblemKind,
    cfg: GrowingConfig,
    input: DynamicGraph,
    output: DynamicGraph,
    clusters: Vec<WcCluster>,
    owner: BTreeMap<EdgeId, usize>,
    inserted: BTreeSet<EdgeId>,
    n_ref: usize,
    m_ref: usize,
}

impl GrowingOutput {
    pub fn new(g: &DynamicGraph, kind: ProblemKind, cfg: GrowingConfig, seed: u64) -> Result<Self> {
        let mut rng = crate::rng(seed);
        let mut input = g.clone();
        input.reset_origin();
        let plain = input.edge_subgraph(|_, e| !e.is_loop());
        let buckets = bucket_by_weight(&plain, cfg.eps);
        let mut clusters = Vec::new();
        let mut owner = BTreeMap::new();
        let mut output = DynamicGraph::new(g.n());
        for (&k, bg) in &buckets.graphs {
            let d = decompose_uniform(bg, cfg.phi)?;
            for uc in d.clusters {
                let prune = WcPruneState::new(
                    &uc.companion,
                    WcPruneConfig { phi: cfg.phi, gamma: cfg.gamma, budget: Some(usize::MAX) },
                )?;
                let scfg = SamplerConfig::desk_for(&uc.companion, cfg.phi).with_policy(NeighborPolicy::RoundRobin);
                let sampler = SamplerState::new(&uc.companion, scfg, crate::rng(rng.random()));
                for id in uc.cluster.edge_ids() {
                    owner.insert(id, clusters.len());
                }
                let mut c = WcCluster {
                    owner: uc.map.owner.clone(),
                    vertices: uc.cluster.vertices,
                    scale: bucket_scale(k, cfg.eps),
                    prune,
                    sampler,
                    contribution: Vec::new(),
                };
                let (_, new) = c.refresh(kind);
                swap_edges(&mut output, &[], &new)?;
                clusters.push(c);
            }
        }
        Ok(GrowingOutput { kind, cfg, n_ref: g.n(), m_ref: g.m(), input, output, clusters, owner, inserted: BTreeSet::new() })
    }

    /// Cut approximation of each cluster's sampler output.
    pub fn alpha(&self) -> f64 {
        sampler_alpha(self.n_ref)
    }

    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }

    /// Pruned edge counts per cluster.
    pub fn pruned_counts(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.prune.pruned().len()).collect()
    }
}

impl DynamicSparsifier for GrowingOutput {
    fn kind(&self) -> ProblemKind {
        self.kind
    }

    fn eps(&self) -> f64 {
        let inner = match self.kind {
            ProblemKind::Cut => self.alpha().ln(),
            ProblemKind::Spanner => spanner_bound(self.alpha(), self.m_ref.max(self.n_ref), self.cfg.phi).ln(),
            ProblemKind::Spectral => SpectralBound::default().value(self.alpha(), self.cfg.phi).ln(),
        };
        inner + self.cfg.eps / 2.0
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
        self.inserted.insert(id);
        swap_edges(&mut self.output, &[], &[(id, u, v, w)])
    }

    fn delete(&mut self, id: EdgeId) -> Result<ChangeSet> {
        let e = self.input.delete_edge(id)?;
        if self.inserted.remove(&id) {
            let w = self.output.edge(id).map_or(e.w, |x| x.w);
            return swap_edges(&mut self.output, &[(id, e.u, e.v, w)], &[]);
        }
        let Some(ci) = self.owner.remove(&id) else {
            return if e.is_loop() { Ok(ChangeSet::default()) } else { Err(Error::UnknownEdge(id)) };
        };
        let c = &mut self.clusters[ci];
        c.delete(id)?;
        let (old, new) = c.refresh(self.kind);
        swap_edges(&mut self.output, &old, &new)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deletions_keep_membership_for_each_kind() {
        let mut rng = crate::rng(4);
        let g = crate::gen::cycle_union(12, 4, &mut rng);
        for kind in ProblemKind::ALL {
            let mut s = GrowingOutput::new(&g, kind, GrowingConfig::new(0.5, 0.1), 3).unwrap();
            assert!(kind.contains(s.input(), s.output(), s.eps()).unwrap());
            let ids = g.edge_ids();
            for (i, id) in ids.iter().enumerate().take(30) {
                if i % 4 == 3 {
                    let nid = s.input().next_edge_id();
                    s.insert(nid, VertexId(i % 12), VertexId((i + 5) % 12), 1.0).unwrap();
                }
                s.delete(*id).unwrap();
                assert!(kind.contains(s.input(), s.output(), s.eps()).unwrap(), "{kind:?} step {i}");
            }
        }
    }
}
