//! Seeded graph generators.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DynamicGraph, UpdateEvent, UpdateKind, VertexId};
use crate::Rng;

/// Uniform random multigraph with `m` non-loop unit edges.
pub fn random_graph(n: usize, m: usize, rng: &mut Rng) -> DynamicGraph {
    let mut edges = Vec::with_capacity(m);
    while edges.len() < m && n >= 2 {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v {
            edges.push((u, v, 1.0));
        }
    }
    DynamicGraph::from_edges(n, edges).expect("valid endpoints")
}

/// Union of `k` random Hamiltonian cycles: a `2k`-regular multigraph.
pub fn cycle_union(n: usize, k: usize, rng: &mut Rng) -> DynamicGraph {
    let mut edges = Vec::with_capacity(n * k);
    let mut perm: Vec<usize> = (0..n).collect();
    for _ in 0..k {
        perm.shuffle(rng);
        for i in 0..n {
            edges.push((perm[i], perm[(i + 1) % n], 1.0));
        }
    }
    DynamicGraph::from_edges(n, edges).expect("valid endpoints")
}

/// Random weighted multigraph with weights `e^{U(0, ln W)}`.
pub fn random_weighted(n: usize, m: usize, max_weight: f64, rng: &mut Rng) -> DynamicGraph {
    let g = random_graph(n, m, rng);
    let edges: Vec<_> = g
        .edges()
        .map(|(_, e)| (e.u.0, e.v.0, (rng.random::<f64>() * max_weight.ln()).exp()))
        .collect();
    DynamicGraph::from_edges(n, edges).expect("positive weights")
}

/// Mixed trace starting from `g`: each event deletes a random live edge with
/// probability `delete_frac` (when one exists) and otherwise inserts a
/// non-loop edge with log-uniform weight in `[1, max_weight]`. Stages count
/// from `g.stage() + 1`.
pub fn random_trace(g: &DynamicGraph, events: usize, delete_frac: f64, max_weight: f64, rng: &mut Rng) -> Result<Vec<UpdateEvent>> {
    if g.n() < 2 {
        return Err(Error::ParameterTooSmall("a trace needs at least 2 vertices".into()));
    }
    let mut sim = g.clone();
    let mut out = Vec::with_capacity(events);
    for i in 0..events {
        let kind = if sim.m() > 0 && rng.random_bool(delete_frac.clamp(0.0, 1.0)) {
            let ids = sim.edge_ids();
            UpdateKind::DeleteEdge(ids[rng.random_range(0..ids.len())])
        } else {
            let u = rng.random_range(0..g.n());
            let v = (u + rng.random_range(1..g.n())) % g.n();
            let w = if max_weight > 1.0 { (rng.random::<f64>() * max_weight.ln()).exp() } else { 1.0 };
            UpdateKind::InsertEdge { u: VertexId(u), v: VertexId(v), w }
        };
        let ev = UpdateEvent { kind, stage: g.stage() + 1 + i as u64 };
        sim.apply_update(ev.clone())?;
        out.push(ev);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GraphSpec {
    Random { n: usize, m: usize },
    CycleUnion { n: usize, k: usize },
    Margulis { k: usize },
    Explicit { n: usize, d: usize },
    Weighted { n: usize, m: usize, max_weight: f64 },
}

impl GraphSpec {
    pub fn build(&self, rng: &mut Rng) -> Result<DynamicGraph> {
        match *self {
            GraphSpec::Random { n, m } => Ok(random_graph(n, m, rng)),
            GraphSpec::CycleUnion { n, k } => Ok(cycle_union(n, k, rng)),
            GraphSpec::Margulis { k } => crate::expander::margulis(k),
            GraphSpec::Explicit { n, d } => crate::expander::build_explicit_expander(n, d),
            GraphSpec::Weighted { n, m, max_weight } => Ok(random_weighted(n, m, max_weight, rng)),
        }
    }

    /// Parses `random:n:m`, `cycles:n:k`, `margulis:k`, `explicit:n:d` or
    /// `weighted:n:m:W`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<usize> {
            parts.get(i).and_then(|x| x.parse().ok()).ok_or_else(|| Error::Parse(format!("bad graph spec {s}")))
        };
        match parts[0] {
            "random" => Ok(GraphSpec::Random { n: num(1)?, m: num(2)? }),
            "cycles" => Ok(GraphSpec::CycleUnion { n: num(1)?, k: num(2)? }),
            "margulis" => Ok(GraphSpec::Margulis { k: num(1)? }),
            "explicit" => Ok(GraphSpec::Explicit { n: num(1)?, d: num(2)? }),
            "weighted" => {
                let w = parts.get(3).and_then(|x| x.parse().ok()).ok_or_else(|| Error::Parse(format!("bad graph spec {s}")))?;
                Ok(GraphSpec::Weighted { n: num(1)?, m: num(2)?, max_weight: w })
            }
            _ => Err(Error::Parse(format!("bad graph spec {s}"))),
        }
    }
}
