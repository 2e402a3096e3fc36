//! Worst-case recourse from a bounded-update-count algorithm by running
//! staggered copies that take turns being drained, rebuilt and refilled.
//!
//! The output is `∪ Δ_w·H_i`. With at most one copy partially visible, the
//! union lies between `(C−1)Δ_w·H` and `C·Δ_w·H`, which is within `e^{ε/2}`
//! of a full copy.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{ChangeSet, DynamicGraph, EdgeId, UpdateKind, VertexId};
use crate::output::ProblemKind;

use super::{swap_edges, DynamicSparsifier, Factory};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Serve,
    Drain,
    Rebuild,
    CatchUp,
    Fill,
}

/// `⌈4 + 1/(e^{ε/2}−1)⌉`.
pub fn copy_count(eps: f64) -> usize {
    (4.0 + 1.0 / ((eps / 2.0).exp() - 1.0) - 1e-9).ceil() as usize
}

/// `1/(3 + 1/(e^{ε/2}−1))`.
pub fn copy_scale(eps: f64) -> f64 {
    1.0 / (3.0 + 1.0 / ((eps / 2.0).exp() - 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Pending {
    Insert(EdgeId, VertexId, VertexId, f64),
    Delete(EdgeId),
}

struct Replica {
    inner: Box<dyn DynamicSparsifier>,
    /// Inner output edges currently in the union.
    visible: BTreeSet<EdgeId>,
    queue: VecDeque<Pending>,
    /// Visible (drain) or hidden (fill) size when the phase began.
    phase_start_size: usize,
}

/// Per-step accounting of output changes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    /// Output changes forwarded from inner updates of visible edges.
    pub forwarded: usize,
    /// Edges moved in or out of the output by draining or filling.
    pub moves: usize,
    /// Deterministic cap on `moves` for this step.
    pub move_cap: usize,
}

pub struct PhasedRebuild {
    kind: ProblemKind,
    eps: f64,
    factory: Factory,
    input: DynamicGraph,
    output: DynamicGraph,
    copies: Vec<Replica>,
    out_id: BTreeMap<(usize, EdgeId), EdgeId>,
    next_out: usize,
    scale: f64,
    q: usize,
    cycle: usize,
    step: usize,
    last: StepStats,
    max_nonserve: usize,
}

impl PhasedRebuild {
    /// `k` is the nominal cycle length (defaults to `n`).
    pub fn new(g: &DynamicGraph, kind: ProblemKind, eps: f64, k: Option<usize>, factory: Factory) -> Result<Self> {
        let c = copy_count(eps);
        let dw = copy_scale(eps);
        let k = k.unwrap_or(g.n()).max(1);
        let q = ((k as f64 * dw / 4.0).ceil() as usize).max(1);
        let cycle = k.max(c * 4 * q);
        let mut input = g.clone();
        input.reset_origin();
        let scale = if kind == ProblemKind::Spanner { 1.0 } else { dw };
        let mut p = PhasedRebuild {
            kind,
            eps,
            factory,
            output: DynamicGraph::new(g.n()),
            copies: Vec::with_capacity(c),
            out_id: BTreeMap::new(),
            next_out: 0,
            scale,
            q,
            cycle,
            step: 0,
            last: StepStats::default(),
            max_nonserve: 0,
            input,
        };
        for i in 0..c {
            let inner = (p.factory)(&p.input)?;
            p.copies.push(Replica { inner, visible: BTreeSet::new(), queue: VecDeque::new(), phase_start_size: 0 });
            for id in p.copies[i].inner.output().edge_ids() {
                p.show(i, id)?;
            }
        }
        Ok(p)
    }

    pub fn copies(&self) -> usize {
        self.copies.len()
    }

    pub fn copy_scale(&self) -> f64 {
        self.scale
    }

    /// Steps per phase.
    pub fn phase_len(&self) -> usize {
        self.q
    }

    pub fn cycle_len(&self) -> usize {
        self.cycle
    }

    pub fn steps(&self) -> usize {
        self.step
    }

    fn phase_at(&self, i: usize, step: usize) -> (Phase, usize) {
        let offset = (i * 4 * self.q) as i64;
        let r = (step as i64 - 1 - offset).rem_euclid(self.cycle as i64) as usize;
        let q = self.q;
        let phase = match r / q {
            _ if r >= 4 * q => Phase::Serve,
            0 => Phase::Drain,
            1 => Phase::Rebuild,
            2 => Phase::CatchUp,
            _ => Phase::Fill,
        };
        (phase, r)
    }

    /// Phase of copy `i` during the most recent step (all serve before the first).
    pub fn phase(&self, i: usize) -> Phase {
        if self.step == 0 {
            Phase::Serve
        } else {
            self.phase_at(i, self.step).0
        }
    }

    pub fn phases(&self) -> Vec<Phase> {
        (0..self.copies.len()).map(|i| self.phase(i)).collect()
    }

    pub fn last_step(&self) -> &StepStats {
        &self.last
    }

    /// Largest number of copies outside serve seen at any step.
    pub fn max_nonserve(&self) -> usize {
        self.max_nonserve
    }

    fn show(&mut self, i: usize, id: EdgeId) -> Result<ChangeSet> {
        let e = *self.copies[i].inner.output().edge(id).expect("inner output edge");
        self.copies[i].visible.insert(id);
        let oid = EdgeId(self.next_out);
        self.next_out += 1;
        self.out_id.insert((i, id), oid);
        swap_edges(&mut self.output, &[], &[(oid, e.u, e.v, e.w * self.scale)])
    }

    fn hide(&mut self, i: usize, id: EdgeId) -> Result<ChangeSet> {
        self.copies[i].visible.remove(&id);
        let Some(oid) = self.out_id.remove(&(i, id)) else {
            return Ok(ChangeSet::default());
        };
        let e = *self.output.edge(oid).expect("mapped output edge");
        swap_edges(&mut self.output, &[(oid, e.u, e.v, e.w)], &[])
    }

    /// Applies an inner change set: visible deletions and reweights are
    /// forwarded, insertions are shown only when `show_new` is set.
    fn absorb(&mut self, i: usize, cs: &ChangeSet, show_new: bool) -> Result<ChangeSet> {
        let mut out = ChangeSet::default();
        for &id in &cs.deleted {
            if self.copies[i].visible.contains(&id) {
                out.extend(self.hide(i, id)?);
            }
        }
        for &(id, w) in &cs.reweighted {
            if let Some(&oid) = self.out_id.get(&(i, id)) {
                let e = *self.output.edge(oid).expect("mapped output edge");
                out.extend(swap_edges(&mut self.output, &[(oid, e.u, e.v, e.w)], &[(oid, e.u, e.v, w * self.scale)])?);
            }
        }
        for &(id, ..) in &cs.inserted {
            if show_new {
                out.extend(self.show(i, id)?);
            }
        }
        Ok(out)
    }

    fn feed(inner: &mut dyn DynamicSparsifier, p: Pending) -> Result<ChangeSet> {
        match p {
            Pending::Insert(id, u, v, w) => inner.insert(id, u, v, w),
            Pending::Delete(id) => inner.delete(id),
        }
    }

    fn step_update(&mut self, p: Pending) -> Result<ChangeSet> {
        self.step += 1;
        let s = self.step;
        let q = self.q;
        let mut out = ChangeSet::default();
        let mut stats = StepStats::default();
        let mut nonserve = 0;
        for i in 0..self.copies.len() {
            let (phase, r) = self.phase_at(i, s);
            if phase != Phase::Serve {
                nonserve += 1;
            }
            match phase {
                Phase::Serve => {
                    // A copy leaving fill shows whatever is still hidden.
                    let hidden: Vec<EdgeId> =
                        self.copies[i].inner.output().edge_ids().into_iter().filter(|id| !self.copies[i].visible.contains(id)).collect();
                    for id in hidden {
                        out.extend(self.show(i, id)?);
                    }
                    let cs = Self::feed(self.copies[i].inner.as_mut(), p)?;
                    let fwd = self.absorb(i, &cs, true)?;
                    stats.forwarded += fwd.len();
                    out.extend(fwd);
                }
                Phase::Drain => {
                    if r == 0 {
                        self.copies[i].phase_start_size = self.copies[i].visible.len();
                    }
                    let cs = Self::feed(self.copies[i].inner.as_mut(), p)?;
                    let fwd = self.absorb(i, &cs, false)?;
                    stats.forwarded += fwd.len();
                    out.extend(fwd);
                    let cap = self.copies[i].phase_start_size.div_ceil(q);
                    stats.move_cap += cap;
                    let take: Vec<EdgeId> = self.copies[i].visible.iter().copied().take(cap).collect();
                    if r == q - 1 {
                        debug_assert!(self.copies[i].visible.len() <= cap);
                    }
                    for id in take {
                        stats.moves += 1;
                        out.extend(self.hide(i, id)?);
                    }
                }
                Phase::Rebuild => {
                    if r == q {
                        let leftover: Vec<EdgeId> = self.copies[i].visible.iter().copied().collect();
                        for id in leftover {
                            out.extend(self.hide(i, id)?);
                        }
                        self.copies[i].inner = (self.factory)(&self.input)?;
                        self.copies[i].queue.clear();
                    }
                    self.copies[i].queue.push_back(p);
                }
                Phase::CatchUp => {
                    self.copies[i].queue.push_back(p);
                    for _ in 0..2 {
                        if let Some(x) = self.copies[i].queue.pop_front() {
                            Self::feed(self.copies[i].inner.as_mut(), x)?;
                        }
                    }
                }
                Phase::Fill => {
                    while let Some(x) = self.copies[i].queue.pop_front() {
                        Self::feed(self.copies[i].inner.as_mut(), x)?;
                    }
                    let cs = Self::feed(self.copies[i].inner.as_mut(), p)?;
                    out.extend(self.absorb(i, &cs, false)?);
                    let hidden: Vec<EdgeId> =
                        self.copies[i].inner.output().edge_ids().into_iter().filter(|id| !self.copies[i].visible.contains(id)).collect();
                    let left = 4 * q - r;
                    let cap = hidden.len().div_ceil(left);
                    stats.move_cap += cap;
                    for id in hidden.into_iter().take(cap) {
                        stats.moves += 1;
                        out.extend(self.show(i, id)?);
                    }
                }
            }
        }
        // The input changes after the copies so that a rebuild sees the
        // pre-update graph and the queued update applies on top of it.
        match p {
            Pending::Insert(id, u, v, w) => self.input.insert_edge_with_id(id, u, v, w)?,
            Pending::Delete(id) => {
                self.input.delete_edge(id)?;
            }
        }
        self.max_nonserve = self.max_nonserve.max(nonserve);
        self.last = stats;
        Ok(out)
    }
}

impl DynamicSparsifier for PhasedRebuild {
    fn kind(&self) -> ProblemKind {
        self.kind
    }

    fn eps(&self) -> f64 {
        let inner = self.copies.iter().map(|c| c.inner.eps()).fold(0.0, f64::max);
        inner + self.eps / 2.0
    }

    fn input(&self) -> &DynamicGraph {
        &self.input
    }

    fn output(&self) -> &DynamicGraph {
        &self.output
    }

    fn insert(&mut self, id: EdgeId, u: VertexId, v: VertexId, w: f64) -> Result<ChangeSet> {
        if self.input.contains_edge(id) {
            return Err(crate::error::Error::DuplicateEdge(id));
        }
        self.input.has_vertex(u).then_some(()).ok_or(crate::error::Error::UnknownVertex(u))?;
        self.input.has_vertex(v).then_some(()).ok_or(crate::error::Error::UnknownVertex(v))?;
        self.step_update(Pending::Insert(id, u, v, w))
    }

    fn delete(&mut self, id: EdgeId) -> Result<ChangeSet> {
        if !self.input.contains_edge(id) {
            return Err(crate::error::Error::UnknownEdge(id));
        }
        self.step_update(Pending::Delete(id))
    }

    fn apply(&mut self, kind: &UpdateKind) -> Result<ChangeSet> {
        match kind {
            UpdateKind::InsertEdge { u, v, w } => {
                let id = self.input.next_edge_id();
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

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rand::Rng as _;

    use super::*;
    use crate::reduction::{apply_changes, RoundingSparsifier};

    #[test]
    fn six_copies_at_unit_eps() {
        assert_eq!(copy_count(1.0), 6);
        assert!((copy_scale(1.0) - 1.0 / (3.0 + 1.0 / (0.5f64.exp() - 1.0))).abs() < 1e-15);
    }

    #[test]
    fn rounding_inner_keeps_one_copy_out_and_membership() {
        let mut rng = crate::rng(6);
        let g = crate::gen::random_graph(10, 30, &mut rng);
        let factory: Factory = Arc::new(|g: &DynamicGraph| Ok(Box::new(RoundingSparsifier::new(g, ProblemKind::Cut, 0.1)) as Box<dyn DynamicSparsifier>));
        let mut p = PhasedRebuild::new(&g, ProblemKind::Cut, 1.0, Some(4), factory).unwrap();
        let mut mirror = p.output().clone();
        for _ in 0..3 * p.cycle_len() {
            let upd = if rng.random_bool(0.5) && p.input().m() > 5 {
                let ids = p.input().edge_ids();
                UpdateKind::DeleteEdge(ids[rng.random_range(0..ids.len())])
            } else {
                let u = rng.random_range(0..10);
                UpdateKind::InsertEdge { u: VertexId(u), v: VertexId((u + 1 + rng.random_range(0..9)) % 10), w: 1.0 }
            };
            let cs = p.apply(&upd).unwrap();
            apply_changes(&mut mirror, &cs).unwrap();
            assert_eq!(mirror.edge_multiset(), p.output().edge_multiset());
            assert!(p.phases().iter().filter(|&&x| x != Phase::Serve).count() <= 1);
            assert!(p.last_step().moves <= p.last_step().move_cap);
            assert!(ProblemKind::Cut.contains(p.input(), p.output(), p.eps()).unwrap());
        }
        assert_eq!(p.max_nonserve(), 1);
    }
}
