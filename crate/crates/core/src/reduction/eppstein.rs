//! Sparsification tree: edges live in `d^L` leaves, and every internal node
//! sparsifies the union of its children's outputs.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{ChangeSet, DynamicGraph, EdgeId, VertexId};
use crate::output::ProblemKind;

use super::{DynamicSparsifier, Factory};

/// `⌈log N / log d⌉`, at least 1.
pub fn tree_depth(n_cap: usize, d: usize) -> usize {
    let l = ((n_cap.max(2) as f64).ln() / (d as f64).ln() - 1e-9).ceil() as usize;
    l.max(1)
}

struct Node {
    inner: Box<dyn DynamicSparsifier>,
    /// (child index, child output id) to id in this node's input.
    ids: BTreeMap<(usize, EdgeId), EdgeId>,
    next_id: usize,
}

impl Node {
    fn map_in(&mut self, child: usize, id: EdgeId) -> EdgeId {
        let nid = EdgeId(self.next_id);
        self.next_id += 1;
        self.ids.insert((child, id), nid);
        nid
    }

    /// Feeds a child's change set into this node and returns its own.
    fn absorb(&mut self, child: usize, cs: &ChangeSet, child_out: &DynamicGraph) -> Result<ChangeSet> {
        let mut out = ChangeSet::default();
        for &id in &cs.deleted {
            let nid = self.ids.remove(&(child, id)).ok_or(Error::UnknownEdge(id))?;
            out.extend(self.inner.delete(nid)?);
        }
        for &(id, w) in &cs.reweighted {
            let nid = self.ids.remove(&(child, id)).ok_or(Error::UnknownEdge(id))?;
            out.extend(self.inner.delete(nid)?);
            let e = child_out.edge(id).ok_or(Error::UnknownEdge(id))?;
            let fresh = self.map_in(child, id);
            out.extend(self.inner.insert(fresh, e.u, e.v, w)?);
        }
        for &(id, u, v, w) in &cs.inserted {
            let fresh = self.map_in(child, id);
            out.extend(self.inner.insert(fresh, u, v, w)?);
        }
        Ok(out)
    }
}

pub struct EppsteinTree {
    kind: ProblemKind,
    d: usize,
    depth: usize,
    leaf_cap: usize,
    input: DynamicGraph,
    /// Raw edge sets of the leaves, global ids.
    leaves: Vec<DynamicGraph>,
    leaf_of: BTreeMap<EdgeId, usize>,
    /// `levels[l][j]` is node `j` at depth `l`; depth 0 is the root.
    levels: Vec<Vec<Node>>,
    recourse: Vec<usize>,
    last_recourse: Vec<usize>,
}

impl EppsteinTree {
    pub fn new(g: &DynamicGraph, kind: ProblemKind, d: usize, n_cap: usize, factory: Factory) -> Result<Self> {
        if d < 2 {
            return Err(Error::ParameterTooSmall(format!("arity must be at least 2, got {d}")));
        }
        let depth = tree_depth(n_cap, d);
        let width = d.pow(depth as u32);
        let leaf_cap = g.n().max((2 * g.m()).div_ceil(width));
        let mut input = g.clone();
        input.reset_origin();
        let mut leaves = vec![DynamicGraph::new(g.n()); width];
        let mut leaf_of = BTreeMap::new();
        for (i, (id, e)) in input.edges().enumerate() {
            leaves[i % width].insert_edge_with_id(id, e.u, e.v, e.w)?;
            leaf_of.insert(id, i % width);
        }
        let mut levels: Vec<Vec<Node>> = (0..depth).map(|_| Vec::new()).collect();
        let mut below: Vec<DynamicGraph> = leaves.clone();
        for l in (0..depth).rev() {
            let count = d.pow(l as u32);
            let mut nodes = Vec::with_capacity(count);
            let mut outputs = Vec::with_capacity(count);
            for j in 0..count {
                let mut ids = BTreeMap::new();
                let mut union = DynamicGraph::new(g.n());
                for c in 0..d {
                    for (cid, e) in below[j * d + c].edges() {
                        let nid = union.insert_edge(e.u, e.v, e.w)?;
                        ids.insert((c, cid), nid);
                    }
                }
                let next_id = union.next_edge_id().0;
                let inner = factory(&union)?;
                outputs.push(inner.output().clone());
                nodes.push(Node { inner, ids, next_id });
            }
            levels[l] = nodes;
            below = outputs;
        }
        Ok(EppsteinTree { kind, d, depth, leaf_cap, input, leaves, leaf_of, levels, recourse: vec![0; depth], last_recourse: vec![0; depth] })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn leaf_capacity(&self) -> usize {
        self.leaf_cap
    }

    pub fn leaf_sizes(&self) -> Vec<usize> {
        self.leaves.iter().map(|l| l.m()).collect()
    }

    /// Output changes per depth (root first) over all updates so far.
    pub fn recourse(&self) -> &[usize] {
        &self.recourse
    }

    /// Output changes per depth (root first) caused by the last update.
    pub fn last_recourse(&self) -> &[usize] {
        &self.last_recourse
    }

    /// Every internal node's input equals the union of its children's
    /// outputs as edge multisets.
    pub fn unions_consistent(&self) -> bool {
        (0..self.depth).all(|l| {
            self.levels[l].iter().enumerate().all(|(j, node)| {
                let mut union = DynamicGraph::new(self.input.n());
                for c in 0..self.d {
                    let child = self.child_output(l, j * self.d + c);
                    for (_, e) in child.edges() {
                        union.insert_edge(e.u, e.v, e.w).expect("valid edge");
                    }
                }
                union.edge_multiset() == node.inner.input().edge_multiset()
            })
        })
    }

    fn child_output(&self, l: usize, idx: usize) -> &DynamicGraph {
        if l + 1 == self.depth {
            &self.leaves[idx]
        } else {
            self.levels[l + 1][idx].inner.output()
        }
    }

    /// Pushes a leaf change set up to the root.
    fn propagate(&mut self, leaf: usize, cs: ChangeSet) -> Result<ChangeSet> {
        let mut cs = cs;
        let mut idx = leaf;
        self.last_recourse = vec![0; self.depth];
        for l in (0..self.depth).rev() {
            let parent = idx / self.d;
            let child = idx % self.d;
            let child_out = if l + 1 == self.depth { self.leaves[idx].clone() } else { self.levels[l + 1][idx].inner.output().clone() };
            cs = self.levels[l][parent].absorb(child, &cs, &child_out)?;
            self.last_recourse[l] = cs.len();
            self.recourse[l] += cs.len();
            idx = parent;
        }
        Ok(cs)
    }
}

impl DynamicSparsifier for EppsteinTree {
    fn kind(&self) -> ProblemKind {
        self.kind
    }

    /// `L` times the inner accuracy.
    fn eps(&self) -> f64 {
        self.depth as f64 * self.levels[0][0].inner.eps()
    }

    fn input(&self) -> &DynamicGraph {
        &self.input
    }

    fn output(&self) -> &DynamicGraph {
        self.levels[0][0].inner.output()
    }

    fn insert(&mut self, id: EdgeId, u: VertexId, v: VertexId, w: f64) -> Result<ChangeSet> {
        let (leaf, size) = self.leaves.iter().enumerate().map(|(i, l)| (i, l.m())).min_by_key(|&(i, m)| (m, i)).expect("at least one leaf");
        if size >= self.leaf_cap {
            return Err(Error::CapacityExceeded);
        }
        self.input.insert_edge_with_id(id, u, v, w)?;
        self.leaves[leaf].insert_edge_with_id(id, u, v, w)?;
        self.leaf_of.insert(id, leaf);
        self.propagate(leaf, ChangeSet { inserted: vec![(id, u, v, w)], ..Default::default() })
    }

    fn delete(&mut self, id: EdgeId) -> Result<ChangeSet> {
        self.input.delete_edge(id)?;
        let leaf = self.leaf_of.remove(&id).ok_or(Error::UnknownEdge(id))?;
        self.leaves[leaf].delete_edge(id)?;
        self.propagate(leaf, ChangeSet { deleted: vec![id], ..Default::default() })
    }
}
