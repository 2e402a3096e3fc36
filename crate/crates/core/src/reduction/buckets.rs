//! Splitting a weighted graph into unweighted graphs of similar weight.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::graph::{DynamicGraph, EdgeId};

/// `⌊ln w / (ε/2)⌋`: the bucket of weight `w`, covering `[e^{kε/2}, e^{(k+1)ε/2})`.
pub fn bucket_index(w: f64, eps: f64) -> i64 {
    (w.ln() / (eps / 2.0) + 1e-9).floor() as i64
}

/// `e^{(k+1)ε/2}`, the weight every edge of bucket `k` is rounded up to.
pub fn bucket_scale(k: i64, eps: f64) -> f64 {
    ((k + 1) as f64 * eps / 2.0).exp()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightBuckets {
    pub eps: f64,
    pub index: BTreeMap<EdgeId, i64>,
    /// Unit-weight bucket graphs on the full vertex set, edge ids kept.
    pub graphs: BTreeMap<i64, DynamicGraph>,
}

pub fn bucket_by_weight(g: &DynamicGraph, eps: f64) -> WeightBuckets {
    let mut index = BTreeMap::new();
    let mut graphs: BTreeMap<i64, DynamicGraph> = BTreeMap::new();
    for (id, e) in g.edges() {
        let k = bucket_index(e.w, eps);
        index.insert(id, k);
        graphs
            .entry(k)
            .or_insert_with(|| DynamicGraph::new(g.n()))
            .insert_edge_with_id(id, e.u, e.v, 1.0)
            .expect("fresh id");
    }
    for b in graphs.values_mut() {
        b.reset_origin();
    }
    WeightBuckets { eps, index, graphs }
}

impl WeightBuckets {
    pub fn count(&self) -> usize {
        self.graphs.len()
    }

    /// `⋃_k e^{(k+1)ε/2}·G_k` with edge ids kept.
    pub fn reconstruct(&self, n: usize) -> DynamicGraph {
        let edges: Vec<_> = self
            .graphs
            .iter()
            .flat_map(|(&k, b)| {
                let s = bucket_scale(k, self.eps);
                b.edges().map(move |(id, e)| (id, e.u.0, e.v.0, s)).collect::<Vec<_>>()
            })
            .collect();
        DynamicGraph::from_edges_with_ids(n, edges).expect("disjoint ids")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_weights_share_bucket_zero() {
        let g = DynamicGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let b = bucket_by_weight(&g, 0.2);
        assert_eq!(b.graphs.keys().copied().collect::<Vec<_>>(), vec![0]);
        assert!((bucket_scale(0, 0.2) - 0.1f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn index_of_e_to_031() {
        assert_eq!(bucket_index(0.31f64.exp(), 0.2), 3);
    }

    #[test]
    fn reconstruction_dominates_within_half_eps() {
        let mut rng = crate::rng(3);
        let g = crate::gen::random_weighted(10, 60, 2f64.exp(), &mut rng);
        let b = bucket_by_weight(&g, 0.5);
        assert!(b.count() <= 9);
        let r = b.reconstruct(g.n());
        for (id, e) in g.edges() {
            let ratio = r.edge(id).unwrap().w / e.w;
            assert!((1.0..=0.25f64.exp() * (1.0 + 1e-9)).contains(&ratio));
        }
    }
}
