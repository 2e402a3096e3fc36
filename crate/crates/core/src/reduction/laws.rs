//! Randomized checks of the closure laws shared by every [`ProblemKind`]:
//! perturbation, union, contraction, transition and transitivity.
//!
//! Premises are built from certified members: graphs whose accuracy against
//! their parent is measured by the exact oracle. Conclusions are checked by
//! the same oracle.

use std::collections::BTreeSet;

use rand::seq::IteratorRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DynamicGraph, EdgeId, VertexId};
use crate::output::{contract_set, scale_graph, union_graphs, ProblemKind};
use crate::proactive::{SamplerConfig, SamplerState};
use crate::verify::{dijkstra, CutMode, TOL};
use crate::Rng;

/// Accuracy slack added to composed bounds.
const SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Law {
    Perturbation,
    Union,
    Contraction,
    Transition,
    Transitivity,
}

impl Law {
    pub const ALL: [Law; 5] = [Law::Perturbation, Law::Union, Law::Contraction, Law::Transition, Law::Transitivity];

    pub fn name(self) -> &'static str {
        match self {
            Law::Perturbation => "perturbation",
            Law::Union => "union",
            Law::Contraction => "contraction",
            Law::Transition => "transition",
            Law::Transitivity => "transitivity",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LawCheck {
    pub law: Law,
    pub kind: ProblemKind,
    pub n: usize,
    /// Accuracy the conclusion was checked at.
    pub eps: f64,
    pub holds: bool,
}

/// Connected instance on 4 to 9 vertices: either a weighted random graph or
/// a unit-weight union of three Hamiltonian cycles.
pub fn law_instance(n: usize, rng: &mut Rng) -> DynamicGraph {
    if rng.random_bool(0.5) {
        return crate::gen::cycle_union(n, 3, rng);
    }
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((v, rng.random_range(0..v), rng.random::<f64>().exp()));
    }
    for _ in 0..rng.random_range(0..2 * n) {
        let u = rng.random_range(0..n);
        let v = (u + rng.random_range(1..n)) % n;
        edges.push((u, v, rng.random::<f64>().exp()));
    }
    DynamicGraph::from_edges(n, edges).expect("valid endpoints")
}

/// Exact accuracy of `h` against `g` for `kind`, or `None` when `h` is not a
/// member at any accuracy.
pub fn measured_accuracy(kind: ProblemKind, g: &DynamicGraph, h: &DynamicGraph) -> Result<Option<f64>> {
    let r = match kind.report(g, h, CutMode::Exact) {
        Ok(r) => r,
        Err(Error::KernelMismatch) => return Ok(None),
        Err(e) => return Err(e),
    };
    if kind == ProblemKind::Spanner && r.min_ratio < 1.0 - TOL {
        return Ok(None);
    }
    let eps = r.accuracy();
    Ok(eps.is_finite().then_some(eps))
}

fn perturbed(kind: ProblemKind, g: &DynamicGraph, rng: &mut Rng) -> DynamicGraph {
    let a: f64 = rng.random_range(0.05..0.8);
    let mut h = DynamicGraph::new(g.n());
    for (_, e) in g.edges() {
        let lo = if kind == ProblemKind::Spanner { 0.0 } else { -a };
        let w = e.w * rng.random_range(lo..=a).exp();
        if kind != ProblemKind::Spanner && rng.random_bool(0.2) {
            h.insert_edge(e.u, e.v, w / 2.0).expect("valid edge");
            h.insert_edge(e.u, e.v, w / 2.0).expect("valid edge");
        } else {
            h.insert_edge(e.u, e.v, w).expect("valid edge");
        }
    }
    if kind == ProblemKind::Spanner && g.n() >= 2 {
        let u = rng.random_range(0..g.n());
        let v = (u + rng.random_range(1..g.n())) % g.n();
        let d = dijkstra(g, u)[v];
        if d.is_finite() {
            h.insert_edge(VertexId(u), VertexId(v), d * rng.random_range(1.0..2.0)).expect("valid edge");
        }
    }
    h
}

fn sampled(kind: ProblemKind, g: &DynamicGraph, rng: &mut Rng) -> DynamicGraph {
    let st = SamplerState::new(g, SamplerConfig::desk_for(g, 0.2), crate::rng(rng.random()));
    let h = st.current_sparsifier();
    if kind == ProblemKind::Spanner {
        scale_to_unit(&h)
    } else {
        h
    }
}

fn scale_to_unit(h: &DynamicGraph) -> DynamicGraph {
    let edges: Vec<_> = h.edges().map(|(id, e)| (id, e.u.0, e.v.0, 1.0)).collect();
    DynamicGraph::from_edges_with_ids(h.n(), edges).expect("unit weights")
}

/// A member of `H(g, ε)` with its exact accuracy `ε`. Unit-weight inputs may
/// get a sampler output; everything else a bounded per-edge perturbation.
pub fn certified_member(kind: ProblemKind, g: &DynamicGraph, rng: &mut Rng) -> Result<(DynamicGraph, f64)> {
    if g.is_unweighted() && g.m() > 0 && rng.random_bool(0.5) {
        let h = sampled(kind, g, rng);
        if let Some(eps) = measured_accuracy(kind, g, &h)? {
            return Ok((h, eps));
        }
    }
    let h = perturbed(kind, g, rng);
    let eps = measured_accuracy(kind, g, &h)?.expect("perturbations are members");
    Ok((h, eps))
}

/// Builds one random premise for `law` and checks its conclusion.
pub fn check_law(law: Law, kind: ProblemKind, rng: &mut Rng) -> Result<LawCheck> {
    let n = rng.random_range(4..=9);
    let g = law_instance(n, rng);
    let (eps, holds) = match law {
        Law::Perturbation => {
            let a = rng.random_range(0.05..1.0f64);
            let edges: Vec<_> = g.edges().map(|(id, e)| (id, e.u.0, e.v.0, e.w * rng.random_range(0.0..=a).exp())).collect();
            let up = DynamicGraph::from_edges_with_ids(n, edges)?;
            let back = scale_graph(&g, a.exp());
            (a, kind.contains(&g, &up, a + SLACK)? && kind.contains(&up, &back, a + SLACK)?)
        }
        Law::Union => {
            let k = rng.random_range(2..=3);
            let mut gs = Vec::new();
            let mut hs = Vec::new();
            let mut eps: f64 = 0.0;
            for i in 0..k {
                let gi = if i == 0 { g.clone() } else { law_instance(n, rng) };
                let (hi, e) = certified_member(kind, &gi, rng)?;
                let s = if rng.random_bool(0.15) { 0.0 } else { rng.random_range(0.2..3.0) };
                eps = eps.max(e);
                gs.push((gi, s));
                hs.push((hi, s));
            }
            let gu = union_graphs(gs.iter().map(|(x, s)| (x, *s)));
            let hu = union_graphs(hs.iter().map(|(x, s)| (x, *s)));
            (eps, kind.contains(&gu, &hu, eps + SLACK)?)
        }
        Law::Contraction => {
            let (h, eps) = certified_member(kind, &g, rng)?;
            let size = rng.random_range(2..n);
            let w: Vec<VertexId> = (0..n).map(VertexId).choose_multiple(rng, size);
            (eps, kind.contains(&contract_set(&g, &w), &contract_set(&h, &w), eps + SLACK)?)
        }
        Law::Transition => {
            let (h1, e1) = certified_member(kind, &g, rng)?;
            let (h2, e2) = certified_member(kind, &g, rng)?;
            let eps = e1.max(e2);
            let keep: BTreeSet<EdgeId> = h1.edge_ids().into_iter().filter(|_| rng.random_bool(0.5)).collect();
            let sub = h1.edge_subgraph(|id, _| keep.contains(&id));
            let delta = rng.random_range(0.05..1.0f64);
            match kind {
                ProblemKind::Spanner => {
                    let h = union_graphs([(&sub, 1.0), (&h2, 1.0)]);
                    (eps, kind.contains(&g, &h, eps + SLACK)?)
                }
                _ => {
                    let h = union_graphs([(&sub, delta.exp() - 1.0), (&h2, 1.0)]);
                    (eps + delta, kind.contains(&g, &h, eps + delta + SLACK)?)
                }
            }
        }
        Law::Transitivity => {
            let (h, eps) = certified_member(kind, &g, rng)?;
            let (h2, delta) = certified_member(kind, &h, rng)?;
            (eps + delta, kind.contains(&g, &h2, eps + delta + SLACK)?)
        }
    };
    Ok(LawCheck { law, kind, n, eps, holds })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_law_holds_on_a_few_instances() {
        let mut rng = crate::rng(5);
        for law in Law::ALL {
            for kind in ProblemKind::ALL {
                for _ in 0..5 {
                    let c = check_law(law, kind, &mut rng).unwrap();
                    assert!(c.holds, "{c:?}");
                }
            }
        }
    }

    #[test]
    fn sampler_members_are_certified() {
        let mut rng = crate::rng(1);
        let g = crate::gen::cycle_union(8, 3, &mut rng);
        for kind in ProblemKind::ALL {
            let (h, eps) = certified_member(kind, &g, &mut rng).unwrap();
            assert!(kind.contains(&g, &h, eps + SLACK).unwrap());
        }
    }
}
