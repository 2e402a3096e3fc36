//! Simple fully dynamic sparsifiers used as inner algorithms.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::graph::{ChangeSet, DynamicGraph, EdgeId, VertexId};
use crate::output::ProblemKind;

use super::{swap_edges, DynamicSparsifier};

/// `e^{ε⌈ln w/ε⌉}`: `w` rounded up onto the grid of powers of `e^ε`.
pub fn round_up(w: f64, eps: f64) -> f64 {
    (eps * (w.ln() / eps - 1e-9).ceil()).exp()
}

/// Output is the input with each weight rounded up onto an `e^ε` grid.
#[derive(Clone, Debug)]
pub struct RoundingSparsifier {
    kind: ProblemKind,
    eps: f64,
    input: DynamicGraph,
    output: DynamicGraph,
}

impl RoundingSparsifier {
    pub fn new(g: &DynamicGraph, kind: ProblemKind, eps: f64) -> Self {
        let edges: Vec<_> = g.edges().map(|(id, e)| (id, e.u.0, e.v.0, round_up(e.w, eps))).collect();
        let output = DynamicGraph::from_edges_with_ids(g.n(), edges).expect("valid copy");
        RoundingSparsifier { kind, eps, input: g.clone(), output }
    }
}

impl DynamicSparsifier for RoundingSparsifier {
    fn kind(&self) -> ProblemKind {
        self.kind
    }

    fn eps(&self) -> f64 {
        self.eps
    }

    fn input(&self) -> &DynamicGraph {
        &self.input
    }

    fn output(&self) -> &DynamicGraph {
        &self.output
    }

    fn insert(&mut self, id: EdgeId, u: VertexId, v: VertexId, w: f64) -> Result<ChangeSet> {
        self.input.insert_edge_with_id(id, u, v, w)?;
        let w2 = round_up(w, self.eps);
        self.output.insert_edge_with_id(id, u, v, w2)?;
        Ok(ChangeSet { inserted: vec![(id, u, v, w2)], ..Default::default() })
    }

    fn delete(&mut self, id: EdgeId) -> Result<ChangeSet> {
        self.input.delete_edge(id)?;
        self.output.delete_edge(id)?;
        Ok(ChangeSet { deleted: vec![id], ..Default::default() })
    }
}

/// Merges parallel edges into one edge per vertex pair (summing weights for
/// cuts and spectra, keeping the lightest for spanners), drops self-loops
/// and rounds weights up onto an `e^ε` grid.
#[derive(Clone, Debug)]
pub struct MergeSparsifier {
    kind: ProblemKind,
    eps: f64,
    input: DynamicGraph,
    output: DynamicGraph,
    pair_edges: BTreeMap<(VertexId, VertexId), BTreeSet<EdgeId>>,
    pair_out: BTreeMap<(VertexId, VertexId), EdgeId>,
    next_id: usize,
}

fn key(u: VertexId, v: VertexId) -> (VertexId, VertexId) {
    (u.min(v), u.max(v))
}

impl MergeSparsifier {
    pub fn new(g: &DynamicGraph, kind: ProblemKind, eps: f64) -> Self {
        let mut s = MergeSparsifier {
            kind,
            eps,
            input: DynamicGraph::new(g.n()),
            output: DynamicGraph::new(g.n()),
            pair_edges: BTreeMap::new(),
            pair_out: BTreeMap::new(),
            next_id: 0,
        };
        for (id, e) in g.edges() {
            s.insert(id, e.u, e.v, e.w).expect("fresh ids");
        }
        s
    }

    fn aggregate(&self, k: (VertexId, VertexId)) -> Option<f64> {
        let ids = self.pair_edges.get(&k)?;
        let ws = ids.iter().map(|id| self.input.edge(*id).expect("tracked").w);
        let w = match self.kind {
            ProblemKind::Spanner => ws.fold(f64::INFINITY, f64::min),
            _ => ws.sum(),
        };
        Some(round_up(w, self.eps))
    }

    fn refresh(&mut self, k: (VertexId, VertexId)) -> Result<ChangeSet> {
        let old: Vec<_> = self
            .pair_out
            .get(&k)
            .map(|&id| {
                let e = self.output.edge(id).expect("output edge");
                (id, e.u, e.v, e.w)
            })
            .into_iter()
            .collect();
        let new: Vec<_> = match self.aggregate(k) {
            None => {
                self.pair_out.remove(&k);
                Vec::new()
            }
            Some(w) => {
                let id = match self.pair_out.get(&k) {
                    Some(&id) => id,
                    None => {
                        let id = EdgeId(self.next_id);
                        self.next_id += 1;
                        self.pair_out.insert(k, id);
                        id
                    }
                };
                vec![(id, k.0, k.1, w)]
            }
        };
        swap_edges(&mut self.output, &old, &new)
    }
}

impl DynamicSparsifier for MergeSparsifier {
    fn kind(&self) -> ProblemKind {
        self.kind
    }

    fn eps(&self) -> f64 {
        self.eps
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
        self.pair_edges.entry(key(u, v)).or_default().insert(id);
        self.refresh(key(u, v))
    }

    fn delete(&mut self, id: EdgeId) -> Result<ChangeSet> {
        let e = self.input.delete_edge(id)?;
        if e.u == e.v {
            return Ok(ChangeSet::default());
        }
        let k = key(e.u, e.v);
        let set = self.pair_edges.get_mut(&k).ok_or(Error::UnknownEdge(id))?;
        set.remove(&id);
        if set.is_empty() {
            self.pair_edges.remove(&k);
        }
        self.refresh(k)
    }
}
