//! Black-box reductions from fully dynamic sparsifiers on general graphs to
//! decremental ones on expanders.

pub mod amortized;
pub mod buckets;
pub mod eppstein;
pub mod growing;
pub mod inner;
pub mod laws;
pub mod phased;

use std::sync::Arc;

use crate::error::Result;
use crate::graph::{ChangeSet, DynamicGraph, EdgeId, UpdateKind, VertexId};
use crate::output::{ProblemKind, SparsifierOutput};

pub use amortized::AmortizedPipeline;
pub use buckets::{bucket_by_weight, WeightBuckets};
pub use eppstein::EppsteinTree;
pub use growing::GrowingOutput;
pub use inner::{MergeSparsifier, RoundingSparsifier};
pub use laws::{check_law, Law, LawCheck};
pub use phased::{Phase, PhasedRebuild};

/// A fully dynamic algorithm maintaining `output ∈ H(input, eps)`.
pub trait DynamicSparsifier {
    fn kind(&self) -> ProblemKind;

    /// Advertised accuracy of the current output.
    fn eps(&self) -> f64;

    fn input(&self) -> &DynamicGraph;

    /// The maintained output; its edge ids are stable across updates.
    fn output(&self) -> &DynamicGraph;

    /// Inserts edge `id`, which must be unused in the input.
    fn insert(&mut self, id: EdgeId, u: VertexId, v: VertexId, w: f64) -> Result<ChangeSet>;

    fn delete(&mut self, id: EdgeId) -> Result<ChangeSet>;

    fn snapshot(&self) -> SparsifierOutput {
        SparsifierOutput::new(self.kind(), self.eps(), self.output().clone())
    }

    /// Applies an update; inserted edges take the input's next free id.
    fn apply(&mut self, kind: &UpdateKind) -> Result<ChangeSet> {
        match kind {
            UpdateKind::InsertEdge { u, v, w } => {
                let id = self.input().next_edge_id();
                self.insert(id, *u, *v, *w)
            }
            UpdateKind::DeleteEdge(id) => self.delete(*id),
            UpdateKind::BatchDelete(ids) => {
                let mut cs = ChangeSet::default();
                for &id in ids {
                    cs.extend(self.delete(id)?);
                }
                Ok(cs)
            }
        }
    }
}

/// Builds an inner algorithm on a static graph.
pub type Factory = Arc<dyn Fn(&DynamicGraph) -> Result<Box<dyn DynamicSparsifier>> + Send + Sync>;

/// Applies a change set to a graph keyed by edge id.
pub fn apply_changes(g: &mut DynamicGraph, cs: &ChangeSet) -> Result<()> {
    for &id in &cs.deleted {
        g.delete_edge(id)?;
    }
    for &(id, w) in &cs.reweighted {
        let e = g.delete_edge(id)?;
        g.insert_edge_with_id(id, e.u, e.v, w)?;
    }
    for &(id, u, v, w) in &cs.inserted {
        g.insert_edge_with_id(id, u, v, w)?;
    }
    Ok(())
}

/// Replaces the edges `old` of `out` with `new` (both keyed by id) and
/// returns the resulting change set.
pub(crate) fn swap_edges(
    out: &mut DynamicGraph,
    old: &[(EdgeId, VertexId, VertexId, f64)],
    new: &[(EdgeId, VertexId, VertexId, f64)],
) -> Result<ChangeSet> {
    use std::collections::BTreeMap;
    let a: BTreeMap<EdgeId, (VertexId, VertexId, f64)> = old.iter().map(|&(id, u, v, w)| (id, (u, v, w))).collect();
    let b: BTreeMap<EdgeId, (VertexId, VertexId, f64)> = new.iter().map(|&(id, u, v, w)| (id, (u, v, w))).collect();
    let mut cs = ChangeSet::default();
    for (id, (u, v, w)) in &a {
        match b.get(id) {
            None => cs.deleted.push(*id),
            Some(&(u2, v2, w2)) if (u2, v2) != (*u, *v) => {
                cs.deleted.push(*id);
                cs.inserted.push((*id, u2, v2, w2));
            }
            Some(&(_, _, w2)) if w2 != *w => cs.reweighted.push((*id, w2)),
            _ => {}
        }
    }
    for (id, &(u, v, w)) in &b {
        if !a.contains_key(id) {
            cs.inserted.push((*id, u, v, w));
        }
    }
    apply_changes(out, &cs)?;
    Ok(cs)
}
