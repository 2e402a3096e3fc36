//! Explicit Margulis-Gabber-Galil expanders and the degree-splitting
//! reduction that replaces high-degree vertices by small expanders.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DynamicGraph, EdgeId, VertexId};

/// The 8-regular Margulis-Gabber-Galil multigraph on `Z_k × Z_k`, vertex
/// `(x, y)` numbered `x·k + y`. Each of the four forward maps contributes an
/// edge `(v, f(v))`; a map fixing `v` contributes two unit self-loops so
/// every vertex has degree exactly 8.
pub fn margulis(k: usize) -> Result<DynamicGraph> {
    if k < 2 {
        return Err(Error::ParameterTooSmall(format!("margulis needs k >= 2, got {k}")));
    }
    DynamicGraph::from_edges(k * k, margulis_edges(k))
}

fn margulis_edges(k: usize) -> Vec<(usize, usize, f64)> {
    let id = |x: usize, y: usize| (x % k) * k + (y % k);
    let mut edges = Vec::with_capacity(4 * k * k);
    for x in 0..k {
        for y in 0..k {
            let v = id(x, y);
            let images = [id(x + 2 * y, y), id(x + 2 * y + 1, y), id(x, y + 2 * x), id(x, y + 2 * x + 1)];
            for w in images {
                if w == v {
                    edges.push((v, v, 1.0));
                    edges.push((v, v, 1.0));
                } else {
                    edges.push((v, w, 1.0));
                }
            }
        }
    }
    edges
}

/// Multiset of the eight neighbor entries of `(x, y)` in the Margulis graph
/// on `Z_k × Z_k`, from the forward and inverse maps.
pub fn margulis_neighbors(k: usize, x: usize, y: usize) -> Vec<(usize, usize)> {
    let (xi, yi, ki) = (x as i64, y as i64, k as i64);
    let m = |a: i64| a.rem_euclid(ki) as usize;
    vec![
        (m(xi + 2 * yi), y),
        (m(xi - 2 * yi), y),
        (m(xi + 2 * yi + 1), y),
        (m(xi - 2 * yi - 1), y),
        (x, m(yi + 2 * xi)),
        (x, m(yi - 2 * xi)),
        (x, m(yi + 2 * xi + 1)),
        (x, m(yi - 2 * xi - 1)),
    ]
}

/// Expander on `n` vertices with every degree in `[d-8, 2d]`: the Margulis
/// graph on `Z_k²` with `k = ⌈√n⌉`, vertices `n..k²` merged into `0..k²-n`,
/// repeated `⌊d/8⌋` times.
pub fn build_explicit_expander(n: usize, d: usize) -> Result<DynamicGraph> {
    if n < 10 || d < 9 {
        return Err(Error::ParameterTooSmall(format!("explicit expander needs n >= 10 and d >= 9, got n={n}, d={d}")));
    }
    let mut k = (n as f64).sqrt().ceil() as usize;
    while k * k < n {
        k += 1;
    }
    while k > 1 && (k - 1) * (k - 1) >= n {
        k -= 1;
    }
    let fold = |v: usize| if v >= n { v - n } else { v };
    let base: Vec<(usize, usize, f64)> = margulis_edges(k).into_iter().map(|(u, v, w)| (fold(u), fold(v), w)).collect();
    let copies = d / 8;
    DynamicGraph::from_edges(n, (0..copies).flat_map(|_| base.iter().copied()))
}

/// Correspondence between a graph and its degree-split version: every
/// original vertex `u` owns a block `X_u` of new vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionMap {
    /// `X_u` for each original vertex, as contiguous ascending ids.
    pub super_nodes: Vec<Vec<VertexId>>,
    /// Original vertex for each new vertex.
    pub owner: Vec<VertexId>,
    /// For each original edge, its group index at `u` and at `v`.
    pub edge_groups: BTreeMap<EdgeId, (usize, usize)>,
    /// Edges of the gadgets inside split vertices.
    pub internal_edges: BTreeSet<EdgeId>,
}

impl ContractionMap {
    pub fn identity(n: usize) -> Self {
        ContractionMap {
            super_nodes: (0..n).map(|v| vec![VertexId(v)]).collect(),
            owner: (0..n).map(VertexId).collect(),
            edge_groups: BTreeMap::new(),
            internal_edges: BTreeSet::new(),
        }
    }

    pub fn original_n(&self) -> usize {
        self.super_nodes.len()
    }

    pub fn split_n(&self) -> usize {
        self.owner.len()
    }

    pub fn is_split(&self, u: VertexId) -> bool {
        self.super_nodes[u.0].len() > 1
    }
}

/// Replaces every vertex `u` with `deg(u) ≥ 10Δ` by an explicit expander on
/// `⌈deg(u)/Δ⌉` vertices. Incident edges of `u` are taken in ascending id
/// order and chunked into groups of `Δ`; group `i` attaches to the `i`-th
/// vertex of `X_u`. Original edges keep their ids; gadget edges get fresh
/// ids above every id of `g`.
pub fn delta_reduce(g: &DynamicGraph, delta: usize) -> Result<(DynamicGraph, ContractionMap)> {
    if delta < 9 {
        return Err(Error::ParameterTooSmall(format!("degree reduction needs delta >= 9, got {delta}")));
    }
    if !g.is_unweighted() {
        return Err(Error::WeightedInput);
    }
    let n = g.n();
    let mut super_nodes = Vec::with_capacity(n);
    let mut owner = Vec::new();
    let mut group_of: BTreeMap<(EdgeId, VertexId), usize> = BTreeMap::new();
    for u in g.vertices() {
        let inc: Vec<EdgeId> = g.incident(u).collect();
        let blocks = if g.degree(u) >= (10 * delta) as f64 { inc.len().div_ceil(delta) } else { 1 };
        let base = owner.len();
        super_nodes.push((base..base + blocks).map(VertexId).collect::<Vec<_>>());
        owner.extend(std::iter::repeat_n(u, blocks));
        if blocks > 1 {
            for (pos, &id) in inc.iter().enumerate() {
                group_of.insert((id, u), pos / delta);
            }
        }
    }
    let group = |id: EdgeId, u: VertexId| group_of.get(&(id, u)).copied().unwrap_or(0);
    let mut edges = Vec::new();
    let mut edge_groups = BTreeMap::new();
    for (id, e) in g.edges() {
        let (gu, gv) = (group(id, e.u), group(id, e.v));
        edge_groups.insert(id, (gu, gv));
        edges.push((id, super_nodes[e.u.0][gu], super_nodes[e.v.0][gv], e.w));
    }
    let mut next = g.next_edge_id().0;
    let mut internal_edges = BTreeSet::new();
    for u in g.vertices() {
        let block = &super_nodes[u.0];
        if block.len() < 2 {
            continue;
        }
        let gadget = build_explicit_expander(block.len(), delta)?;
        for (_, e) in gadget.edges() {
            edges.push((EdgeId(next), block[e.u.0], block[e.v.0], e.w));
            internal_edges.insert(EdgeId(next));
            next += 1;
        }
    }
    let split = DynamicGraph::from_edges_with_ids(owner.len(), edges.into_iter().map(|(id, u, v, w)| (id, u.0, v.0, w)))?;
    Ok((split, ContractionMap { super_nodes, owner, edge_groups, internal_edges }))
}

/// Collapses each block `X_u` back to `u`, keeping edge ids and weights.
/// Edges inside one block become self-loops.
pub fn contract(h: &DynamicGraph, map: &ContractionMap) -> Result<DynamicGraph> {
    let mut edges = Vec::with_capacity(h.m());
    for (id, e) in h.edges() {
        let u = *map.owner.get(e.u.0).ok_or(Error::UncoveredVertex(e.u))?;
        let v = *map.owner.get(e.v.0).ok_or(Error::UncoveredVertex(e.v))?;
        edges.push((id, u.0, v.0, e.w));
    }
    DynamicGraph::from_edges_with_ids(map.original_n(), edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::exact_conductance;

    #[test]
    fn margulis_neighbor_formula_at_one_one() {
        let mut got = margulis_neighbors(3, 1, 1);
        got.sort();
        let mut want = vec![(0, 1), (2, 1), (1, 1), (1, 1), (1, 0), (1, 2), (1, 1), (1, 1)];
        want.sort();
        assert_eq!(got, want);
        let g = margulis(3).unwrap();
        let v = VertexId(4);
        let loops = g.incident(v).filter(|&id| g.edge(id).unwrap().is_loop()).count();
        assert_eq!(loops, 4);
        assert!(g.degrees().iter().all(|&d| d == 8.0));
    }

    #[test]
    fn explicit_expander_degree_window() {
        for (n, d) in [(10, 9), (16, 16), (17, 16), (64, 16), (100, 32), (50, 23)] {
            let g = build_explicit_expander(n, d).unwrap();
            assert_eq!(g.n(), n);
            for v in g.vertices() {
                let deg = g.degree(v);
                assert!(deg >= (d - 8) as f64 && deg <= (2 * d) as f64, "n={n} d={d} deg={deg}");
            }
        }
        assert!(build_explicit_expander(9, 16).is_err());
        assert!(build_explicit_expander(16, 8).is_err());
    }

    #[test]
    fn explicit_expander_conductance() {
        let g = build_explicit_expander(16, 16).unwrap();
        assert!(exact_conductance(&g).unwrap().value >= 0.1);
    }

    #[test]
    fn star_center_splits_into_twelve() {
        let g = DynamicGraph::from_edges(101, (1..=100).map(|v| (0, v, 1.0))).unwrap();
        let (split, map) = delta_reduce(&g, 9).unwrap();
        assert_eq!(map.super_nodes[0].len(), 12);
        assert_eq!(split.n(), 112);
        let deg = |v: usize| split.degree(VertexId(v));
        for &x in &map.super_nodes[0] {
            assert!(deg(x.0) >= 1.0 && deg(x.0) <= 36.0);
        }
        let image = split.edge_subgraph(|id, _| !map.internal_edges.contains(&id));
        assert!(contract(&image, &map).unwrap().same_state(&g));
    }

    #[test]
    fn low_degree_graphs_are_unchanged() {
        let g = DynamicGraph::from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        let (split, map) = delta_reduce(&g, 9).unwrap();
        assert!(split.same_state(&g));
        assert_eq!(map.super_nodes, ContractionMap::identity(4).super_nodes);
        assert!(contract(&g, &ContractionMap::identity(4)).unwrap().same_state(&g));
    }

    #[test]
    fn reduction_rejects_bad_input() {
        let g = DynamicGraph::from_edges(2, [(0, 1, 2.0)]).unwrap();
        assert_eq!(delta_reduce(&g, 9).unwrap_err(), Error::WeightedInput);
        assert!(delta_reduce(&g, 8).is_err());
        let h = DynamicGraph::from_edges(3, [(0, 2, 1.0)]).unwrap();
        assert_eq!(contract(&h, &ContractionMap::identity(2)).unwrap_err(), Error::UncoveredVertex(VertexId(2)));
    }

    #[test]
    fn contraction_turns_block_edges_into_loops() {
        let map = ContractionMap {
            super_nodes: vec![vec![VertexId(0), VertexId(1)], vec![VertexId(2)]],
            owner: vec![VertexId(0), VertexId(0), VertexId(1)],
            edge_groups: BTreeMap::new(),
            internal_edges: BTreeSet::new(),
        };
        let h = DynamicGraph::from_edges(3, [(0, 1, 2.5), (1, 2, 1.0)]).unwrap();
        let c = contract(&h, &map).unwrap();
        assert!(c.edge(EdgeId(0)).unwrap().is_loop());
        assert_eq!(c.edge(EdgeId(0)).unwrap().w, 2.5);
        assert_eq!(c.degree(VertexId(0)), 3.5);
    }

    #[test]
    fn parallel_edges_split_both_endpoints() {
        let g = DynamicGraph::from_edges(2, (0..90).map(|_| (0, 1, 1.0))).unwrap();
        let (split, map) = delta_reduce(&g, 9).unwrap();
        assert_eq!(split.n(), 20);
        assert!(split.n() as f64 <= g.n() as f64 + 2.0 * g.m() as f64 / 9.0);
        let image = split.edge_subgraph(|id, _| !map.internal_edges.contains(&id));
        assert!(contract(&image, &map).unwrap().same_state(&g));
    }
}
