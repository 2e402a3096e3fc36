//! Problem kinds, maintained sparsifier outputs and the assemblers that
//! combine them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ChangeSet, DynamicGraph, Edge, EdgeId, VertexId};
use crate::verify::{distance_ratios, verify_cut_membership, verify_spectral, CutMode, VerificationReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProblemKind {
    Cut,
    Spanner,
    Spectral,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 3] = [ProblemKind::Cut, ProblemKind::Spanner, ProblemKind::Spectral];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Cut => "cut",
            ProblemKind::Spanner => "spanner",
            ProblemKind::Spectral => "spectral",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "cut" => Ok(ProblemKind::Cut),
            "spanner" => Ok(ProblemKind::Spanner),
            "spectral" => Ok(ProblemKind::Spectral),
            other => Err(Error::Parse(format!("unknown kind {other}"))),
        }
    }

    /// Ratio report of `h` against `g` for this kind.
    pub fn report(self, g: &DynamicGraph, h: &DynamicGraph, mode: CutMode) -> Result<VerificationReport> {
        match self {
            ProblemKind::Cut => verify_cut_membership(g, h, mode),
            ProblemKind::Spanner => Ok(distance_ratios(g, h)),
            ProblemKind::Spectral => verify_spectral(g, h),
        }
    }

    /// Membership `h ∈ H(g, ε)`: every ratio lies in `[e^{-ε}, e^{ε}]`, and for
    /// spanners additionally `dist_h ≥ dist_g`.
    pub fn contains(self, g: &DynamicGraph, h: &DynamicGraph, eps: f64) -> Result<bool> {
        let r = match self.report(g, h, CutMode::Auto { samples: 2000, seed: 0 }) {
            Ok(r) => r,
            Err(Error::KernelMismatch) => return Ok(false),
            Err(e) => return Err(e),
        };
        Ok(match self {
            ProblemKind::Spanner => r.within(1.0, eps.exp()),
            _ => r.within_eps(eps),
        })
    }
}

/// A maintained sparsifier together with its advertised accuracy.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SparsifierOutput {
    pub kind: ProblemKind,
    /// Advertised accuracy: the output should lie in `H(G, eps)`.
    pub eps: f64,
    pub graph: DynamicGraph,
    /// Conductance of the expander the output was derived on, when known.
    pub certificate: Option<f64>,
}

impl SparsifierOutput {
    pub fn new(kind: ProblemKind, eps: f64, graph: DynamicGraph) -> Self {
        SparsifierOutput { kind, eps, graph, certificate: None }
    }

    pub fn with_certificate(mut self, phi: f64) -> Self {
        self.certificate = Some(phi);
        self
    }

    pub fn size(&self) -> usize {
        self.graph.m()
    }

    /// Oracle check against the current input graph at the advertised accuracy.
    pub fn check(&self, g: &DynamicGraph) -> Result<bool> {
        self.kind.contains(g, &self.graph, self.eps)
    }
}

/// Copy of `g` with every weight multiplied by `s`; edge ids are kept.
pub fn scale_graph(g: &DynamicGraph, s: f64) -> DynamicGraph {
    let edges: Vec<_> = g.edges().map(|(id, e)| (id, e.u.0, e.v.0, e.w * s)).collect();
    DynamicGraph::from_edges_with_ids(g.n(), edges).expect("scaled copy of a valid graph")
}

/// Weighted union of scaled graphs over a shared vertex set. Edge ids are
/// reassigned in part order.
pub fn union_graphs<'a, I>(parts: I) -> DynamicGraph
where
    I: IntoIterator<Item = (&'a DynamicGraph, f64)>,
{
    let parts: Vec<_> = parts.into_iter().collect();
    let n = parts.iter().map(|(g, _)| g.n()).max().unwrap_or(0);
    let mut out = DynamicGraph::new(n);
    for (g, s) in parts {
        if s <= 0.0 {
            continue;
        }
        for (_, e) in g.edges() {
            out.insert_edge(e.u, e.v, e.w * s).expect("positive weight");
        }
    }
    out.reset_origin();
    out
}

/// `⋃ s_i·H_i` with the kind checked across parts and accuracy the maximum
/// of the parts' accuracies.
pub fn union_scaled(parts: &[(&SparsifierOutput, f64)]) -> Result<SparsifierOutput> {
    let Some((first, _)) = parts.first() else {
        return Ok(SparsifierOutput::new(ProblemKind::Cut, 0.0, DynamicGraph::new(0)));
    };
    if parts.iter().any(|(p, _)| p.kind != first.kind) {
        return Err(Error::KindMismatch);
    }
    let eps = parts.iter().map(|(p, _)| p.eps).fold(0.0, f64::max);
    let graph = union_graphs(parts.iter().map(|(p, s)| (&p.graph, *s)));
    Ok(SparsifierOutput::new(first.kind, eps, graph))
}

/// Maps every vertex through `owner` into a graph on `n_out` vertices; edges
/// inside a class become self-loops. Edge ids are kept.
pub fn contract_by(g: &DynamicGraph, owner: &[usize], n_out: usize) -> DynamicGraph {
    let edges: Vec<_> = g.edges().map(|(id, e)| (id, owner[e.u.0], owner[e.v.0], e.w)).collect();
    DynamicGraph::from_edges_with_ids(n_out, edges).expect("owner maps into range")
}

/// Contracts the vertex set `w` into its smallest member and relabels the
/// remaining vertices densely.
pub fn contract_set(g: &DynamicGraph, w: &[VertexId]) -> DynamicGraph {
    let mut inside = vec![false; g.n()];
    for v in w {
        inside[v.0] = true;
    }
    let rep = w.iter().map(|v| v.0).min();
    let mut owner = vec![0; g.n()];
    let mut next = 0;
    for v in 0..g.n() {
        if inside[v] && Some(v) != rep {
            continue;
        }
        owner[v] = next;
        next += 1;
    }
    if let Some(r) = rep {
        for v in w {
            owner[v.0] = owner[r];
        }
    }
    contract_by(g, &owner, next)
}

/// Exact difference between two graphs keyed by edge id.
pub fn diff(before: &DynamicGraph, after: &DynamicGraph) -> ChangeSet {
    let a: BTreeMap<EdgeId, &Edge> = before.edges().collect();
    let b: BTreeMap<EdgeId, &Edge> = after.edges().collect();
    let mut cs = ChangeSet::default();
    for (id, e) in &a {
        match b.get(id) {
            None => cs.deleted.push(*id),
            Some(f) if f.u != e.u || f.v != e.v => {
                cs.deleted.push(*id);
                cs.inserted.push((*id, f.u, f.v, f.w));
            }
            Some(f) if f.w != e.w => cs.reweighted.push((*id, f.w)),
            _ => {}
        }
    }
    for (id, f) in &b {
        if !a.contains_key(id) {
            cs.inserted.push((*id, f.u, f.v, f.w));
        }
    }
    cs
}

/// Number of edge multiset changes between two graphs, ignoring ids.
pub fn multiset_recourse(before: &DynamicGraph, after: &DynamicGraph) -> usize {
    let a = before.edge_multiset();
    let b = after.edge_multiset();
    let mut total = 0;
    for (k, &c) in &a {
        total += c.abs_diff(b.get(k).copied().unwrap_or(0));
    }
    for (k, &c) in &b {
        if !a.contains_key(k) {
            total += c;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k4() -> DynamicGraph {
        DynamicGraph::from_edges(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)]).unwrap()
    }

    #[test]
    fn identity_is_member_of_every_kind() {
        let g = k4();
        for kind in ProblemKind::ALL {
            assert!(kind.contains(&g, &g, 1e-12).unwrap(), "{kind:?}");
        }
    }

    #[test]
    fn doubled_graph_needs_ln_two() {
        let g = k4();
        let h = scale_graph(&g, 2.0);
        assert!(!ProblemKind::Cut.contains(&g, &h, 0.69).unwrap());
        assert!(ProblemKind::Cut.contains(&g, &h, 0.7).unwrap());
        assert!(ProblemKind::Spanner.contains(&g, &h, 0.7).unwrap());
        assert!(!ProblemKind::Spanner.contains(&h, &g, 5.0).unwrap());
    }

    #[test]
    fn union_rejects_mixed_kinds() {
        let g = k4();
        let a = SparsifierOutput::new(ProblemKind::Cut, 0.1, g.clone());
        let b = SparsifierOutput::new(ProblemKind::Spanner, 0.1, g);
        assert_eq!(union_scaled(&[(&a, 1.0), (&b, 1.0)]).unwrap_err(), Error::KindMismatch);
        let u = union_scaled(&[(&a, 1.0)]).unwrap();
        assert_eq!(u.graph.edge_multiset(), a.graph.edge_multiset());
    }

    #[test]
    fn contraction_merges_into_loops() {
        let g = k4();
        let c = contract_set(&g, &[VertexId(1), VertexId(3)]);
        assert_eq!(c.n(), 3);
        assert_eq!(c.edges().filter(|(_, e)| e.is_loop()).count(), 1);
        assert_eq!(c.degree(VertexId(1)), 5.0);
    }

    #[test]
    fn diff_counts_each_kind() {
        let g = k4();
        let mut h = scale_graph(&g, 1.0);
        h.delete_edge(EdgeId(0)).unwrap();
        h.insert_edge(VertexId(0), VertexId(0), 1.0).unwrap();
        let h2 = scale_graph(&h, 1.0);
        let cs = diff(&g, &h2);
        assert_eq!((cs.deleted.len(), cs.inserted.len(), cs.reweighted.len()), (1, 1, 0));
        assert_eq!(multiset_recourse(&g, &h2), 2);
    }
}
