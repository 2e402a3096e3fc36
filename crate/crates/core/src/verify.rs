//! Brute-force ground truth: exact conductance and cut ratios by Gray-code
//! enumeration, spanner stretch by all-pairs Dijkstra, spectral pencils by
//! dense eigensolves, and an exact max-flow.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, VecDeque};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DynamicGraph, VertexId};

/// Largest vertex count for exhaustive cut enumeration.
pub const EXACT_CUT_LIMIT: usize = 20;
/// Largest vertex count for dense spectral checks.
pub const EXACT_EIGEN_LIMIT: usize = 256;
/// Relative tolerance used by every ratio comparison.
pub const TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckKind {
    Cut,
    Spanner,
    Spectral,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Witness {
    None,
    Cut(Vec<usize>),
    Pair(usize, usize),
    Eigen(usize),
}

/// Worst-case ratios of `h` against `g` over everything the oracle checked.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: CheckKind,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub min_witness: Witness,
    pub max_witness: Witness,
    pub checked: u64,
    pub exact: bool,
}

impl VerificationReport {
    fn empty(check: CheckKind, exact: bool) -> Self {
        VerificationReport {
            check,
            min_ratio: 1.0,
            max_ratio: 1.0,
            min_witness: Witness::None,
            max_witness: Witness::None,
            checked: 0,
            exact,
        }
    }

    fn observe(&mut self, ratio: f64, witness: impl Fn() -> Witness) {
        if self.checked == 0 || ratio < self.min_ratio {
            self.min_ratio = ratio;
            self.min_witness = witness();
        }
        if self.checked == 0 || ratio > self.max_ratio {
            self.max_ratio = ratio;
            self.max_witness = witness();
        }
        self.checked += 1;
    }

    /// True when every observed ratio lies in `[lo, hi]` up to [`TOL`].
    pub fn within(&self, lo: f64, hi: f64) -> bool {
        self.min_ratio >= lo * (1.0 - TOL) && self.max_ratio <= hi * (1.0 + TOL)
    }

    /// True when every ratio lies in `[e^-eps, e^eps]`.
    pub fn within_eps(&self, eps: f64) -> bool {
        self.within((-eps).exp(), eps.exp())
    }

    /// Smallest `eps` with every ratio in `[e^-eps, e^eps]`.
    pub fn accuracy(&self) -> f64 {
        let lo = if self.min_ratio > 0.0 { -self.min_ratio.ln() } else { f64::INFINITY };
        let hi = if self.max_ratio.is_finite() { self.max_ratio.ln() } else { f64::INFINITY };
        lo.max(hi).max(0.0)
    }
}

/// Per-vertex lookup tables giving the weight from a vertex into a vertex
/// set in O(n/8) lookups.
struct CutTable {
    n: usize,
    chunks: usize,
    table: Vec<f64>,
    cut_degree: Vec<f64>,
    volume: Vec<f64>,
}

impl CutTable {
    fn new(g: &DynamicGraph) -> Self {
        let n = g.n();
        let chunks = n.div_ceil(8).max(1);
        let mut adj = vec![0.0; n * n];
        let mut cut_degree = vec![0.0; n];
        for (_, e) in g.edges() {
            if e.u != e.v {
                adj[e.u.0 * n + e.v.0] += e.w;
                adj[e.v.0 * n + e.u.0] += e.w;
                cut_degree[e.u.0] += e.w;
                cut_degree[e.v.0] += e.w;
            }
        }
        let mut table = vec![0.0; n * chunks * 256];
        for v in 0..n {
            for c in 0..chunks {
                let base = (v * chunks + c) * 256;
                for byte in 1..256usize {
                    let low = byte.trailing_zeros() as usize;
                    let u = c * 8 + low;
                    let a = if u < n { adj[v * n + u] } else { 0.0 };
                    table[base + byte] = table[base + (byte & (byte - 1))] + a;
                }
            }
        }
        CutTable { n, chunks, table, cut_degree, volume: g.degrees().to_vec() }
    }

    #[inline]
    fn weight_into(&self, v: usize, mask: u32) -> f64 {
        let mut s = 0.0;
        let base = v * self.chunks * 256;
        for c in 0..self.chunks {
            s += self.table[base + c * 256 + ((mask >> (8 * c)) & 0xff) as usize];
        }
        s
    }
}

/// Visits every proper cut `(S, V∖S)` with vertex `n-1` outside `S`, once
/// each, reporting the cut weight and `vol(S)` in every graph.
/// All graphs must share the vertex count `n ≤ EXACT_CUT_LIMIT`.
pub fn for_each_cut<F>(graphs: &[&DynamicGraph], mut f: F) -> Result<()>
where
    F: FnMut(u32, &[f64], &[f64]),
{
    let n = graphs.first().map_or(0, |g| g.n());
    if n > EXACT_CUT_LIMIT {
        return Err(Error::TooLarge { n, cap: EXACT_CUT_LIMIT });
    }
    if n < 2 {
        return Ok(());
    }
    let tables: Vec<CutTable> = graphs.iter().map(|g| CutTable::new(g)).collect();
    assert!(tables.iter().all(|t| t.n == n), "graphs must share the vertex set");
    let k = tables.len();
    let mut cut = vec![0.0; k];
    let mut vol = vec![0.0; k];
    let mut mask: u32 = 0;
    let total: u64 = 1 << (n - 1);
    for i in 1..total {
        let bit = i.trailing_zeros() as usize;
        let adding = mask & (1 << bit) == 0;
        if adding {
            for j in 0..k {
                let t = &tables[j];
                cut[j] += t.cut_degree[bit] - 2.0 * t.weight_into(bit, mask);
                vol[j] += t.volume[bit];
            }
            mask |= 1 << bit;
        } else {
            mask &= !(1 << bit);
            for j in 0..k {
                let t = &tables[j];
                cut[j] -= t.cut_degree[bit] - 2.0 * t.weight_into(bit, mask);
                vol[j] -= t.volume[bit];
            }
        }
        f(mask, &cut, &vol);
    }
    Ok(())
}

pub fn mask_to_set(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask & (1 << i) != 0).collect()
}

/// Cut weight recomputed directly from the edge list.
pub fn cut_weight(g: &DynamicGraph, side: &[bool]) -> f64 {
    g.edges().filter(|(_, e)| side[e.u.0] != side[e.v.0]).map(|(_, e)| e.w).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conductance {
    pub value: f64,
    pub witness: Vec<VertexId>,
    pub exact: bool,
}

fn ratio_or_zero(cut: f64, vol: f64) -> f64 {
    if vol <= 0.0 {
        0.0
    } else {
        cut / vol
    }
}

/// Exact conductance `min_S δ(S) / min(vol S, vol V∖S)` over all proper cuts.
/// A cut whose smaller side has zero volume counts as conductance 0, so a
/// graph with an isolated vertex or two components reports 0. Graphs with
/// fewer than two vertices report 1.
pub fn exact_conductance(g: &DynamicGraph) -> Result<Conductance> {
    let n = g.n();
    if n > EXACT_CUT_LIMIT {
        return Err(Error::TooLarge { n, cap: EXACT_CUT_LIMIT });
    }
    if n < 2 {
        return Ok(Conductance { value: 1.0, witness: Vec::new(), exact: true });
    }
    let total = g.total_volume();
    let mut best = f64::INFINITY;
    let mut best_mask = 0u32;
    for_each_cut(&[g], |mask, cut, vol| {
        let phi = ratio_or_zero(cut[0].max(0.0), vol[0].min(total - vol[0]));
        if phi < best {
            best = phi;
            best_mask = mask;
        }
    })?;
    Ok(Conductance {
        value: best,
        witness: mask_to_set(best_mask).into_iter().map(VertexId).collect(),
        exact: true,
    })
}

/// Conductance of the set `side` (true = inside).
pub fn set_conductance(g: &DynamicGraph, side: &[bool]) -> f64 {
    let vol_s: f64 = g.vertices().filter(|v| side[v.0]).map(|v| g.degree(v)).sum();
    let vol_t = g.total_volume() - vol_s;
    ratio_or_zero(cut_weight(g, side), vol_s.min(vol_t))
}

/// Dense normalized Laplacian over the vertices of positive degree, with the
/// list of those vertices. Self-loops add to the degree only.
pub fn normalized_laplacian(g: &DynamicGraph) -> (DMatrix<f64>, Vec<usize>) {
    let live: Vec<usize> = (0..g.n()).filter(|&v| g.degrees()[v] > 0.0).collect();
    let mut index = vec![usize::MAX; g.n()];
    for (i, &v) in live.iter().enumerate() {
        index[v] = i;
    }
    let k = live.len();
    let mut l = DMatrix::<f64>::zeros(k, k);
    for (_, e) in g.edges() {
        if e.u == e.v {
            continue;
        }
        let (a, b) = (index[e.u.0], index[e.v.0]);
        l[(a, a)] += e.w;
        l[(b, b)] += e.w;
        l[(a, b)] -= e.w;
        l[(b, a)] -= e.w;
    }
    let inv_sqrt: Vec<f64> = live.iter().map(|&v| 1.0 / g.degrees()[v].sqrt()).collect();
    for i in 0..k {
        for j in 0..k {
            l[(i, j)] *= inv_sqrt[i] * inv_sqrt[j];
        }
    }
    (l, live)
}

/// Second smallest eigenvalue of the normalized Laplacian (0 when fewer
/// than two vertices have positive degree).
pub fn normalized_lambda2(g: &DynamicGraph) -> f64 {
    let (l, live) = normalized_laplacian(g);
    if live.len() < 2 {
        return 0.0;
    }
    let eig = SymmetricEigen::new(l);
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals[1].max(0.0)
}

/// Result of a Fiedler-vector sweep.
#[derive(Clone, Debug)]
pub struct Sweep {
    pub lambda2: f64,
    pub value: f64,
    pub side: Vec<VertexId>,
    /// Vertices in sweep order (positive-degree vertices only).
    pub order: Vec<VertexId>,
}

/// Sorts vertices by the Fiedler vector of the normalized Laplacian
/// (ties by id) and returns the best prefix cut. A disconnected graph is
/// ordered component by component, smallest volume first, and its first
/// component is returned as a zero-conductance cut.
pub fn fiedler_sweep(g: &DynamicGraph) -> Sweep {
    let mut comps = g.components();
    if comps.len() > 1 {
        comps.sort_by(|a, b| g.volume(a.iter().copied()).total_cmp(&g.volume(b.iter().copied())));
        let side = comps[0].clone();
        let order = comps.into_iter().flatten().collect();
        return Sweep { lambda2: 0.0, value: 0.0, side, order };
    }
    let (l, live) = normalized_laplacian(g);
    if live.len() < 2 {
        return Sweep { lambda2: 0.0, value: 1.0, side: Vec::new(), order: live.into_iter().map(VertexId).collect() };
    }
    let eig = SymmetricEigen::new(l);
    let mut idx: Vec<usize> = (0..live.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lambda2 = eig.eigenvalues[idx[1]].max(0.0);
    let vec2 = eig.eigenvectors.column(idx[1]);
    let mut order: Vec<(f64, usize)> =
        live.iter().enumerate().map(|(i, &v)| (vec2[i] / g.degrees()[v].sqrt(), v)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let order: Vec<VertexId> = order.into_iter().map(|(_, v)| VertexId(v)).collect();
    let (value, len) = best_prefix(g, &order);
    Sweep { lambda2, value, side: order[..len].to_vec(), order }
}

/// Best conductance over proper prefixes of `order`.
fn best_prefix(g: &DynamicGraph, order: &[VertexId]) -> (f64, usize) {
    let total = g.total_volume();
    let mut inside = vec![false; g.n()];
    let mut cut = 0.0;
    let mut vol = 0.0;
    let mut best = (f64::INFINITY, 0);
    for (i, &v) in order.iter().enumerate().take(order.len().saturating_sub(1)) {
        let mut to_in = 0.0;
        let mut loops = 0.0;
        for (_, y, w) in g.snapshot_incident(v).expect("vertex exists") {
            if y == v {
                loops += w;
            } else if inside[y.0] {
                to_in += w;
            }
        }
        cut += g.degree(v) - loops - 2.0 * to_in;
        vol += g.degree(v);
        inside[v.0] = true;
        let phi = ratio_or_zero(cut.max(0.0), vol.min(total - vol));
        if phi < best.0 {
            best = (phi, i + 1);
        }
    }
    best
}

/// Candidate cuts for sampled mode: every singleton, every prefix of the
/// degree order and of the Fiedler order, and `samples` random subsets.
pub fn candidate_cuts<R: Rng>(g: &DynamicGraph, samples: usize, rng: &mut R) -> Vec<Vec<bool>> {
    let n = g.n();
    let mut out = Vec::new();
    for v in 0..n {
        let mut s = vec![false; n];
        s[v] = true;
        out.push(s);
    }
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by(|&a, &b| g.degrees()[a].total_cmp(&g.degrees()[b]).then(a.cmp(&b)));
    let sweep = fiedler_sweep(g);
    if !sweep.side.is_empty() && sweep.side.len() < n {
        let mut s = vec![false; n];
        for v in &sweep.side {
            s[v.0] = true;
        }
        out.push(s);
    }
    let fiedler: Vec<usize> = sweep.order.iter().map(|v| v.0).collect();
    for order in [by_degree, fiedler] {
        let mut s = vec![false; n];
        for &v in order.iter().take(order.len().saturating_sub(1)) {
            s[v] = true;
            out.push(s.clone());
        }
    }
    for _ in 0..samples {
        let s: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        if s.iter().any(|&b| b) && s.iter().any(|&b| !b) {
            out.push(s);
        }
    }
    out
}

/// Upper estimate of the conductance from the candidate cuts.
pub fn sampled_conductance<R: Rng>(g: &DynamicGraph, samples: usize, rng: &mut R) -> Conductance {
    if g.n() < 2 {
        return Conductance { value: 1.0, witness: Vec::new(), exact: false };
    }
    let mut best = (f64::INFINITY, Vec::new());
    for side in candidate_cuts(g, samples, rng) {
        let phi = set_conductance(g, &side);
        if phi < best.0 {
            best = (phi, side);
        }
    }
    let witness = best.1.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| VertexId(i)).collect();
    Conductance { value: best.0, witness, exact: false }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CutMode {
    /// Exhaustive when `n ≤ EXACT_CUT_LIMIT`, sampled otherwise.
    Auto { samples: usize, seed: u64 },
    Exact,
    Sampled { samples: usize, seed: u64 },
}

impl Default for CutMode {
    fn default() -> Self {
        CutMode::Auto { samples: 2000, seed: 0 }
    }
}

fn cut_ratio(hc: f64, gc: f64) -> Option<f64> {
    let scale = gc.abs().max(hc.abs()).max(1.0);
    if gc.abs() <= 1e-12 * scale {
        if hc.abs() <= 1e-12 * scale {
            None
        } else {
            Some(f64::INFINITY)
        }
    } else {
        Some((hc / gc).max(0.0))
    }
}

/// Ratios `w_h(S) / w_g(S)` over all (or sampled) cuts. Cuts of weight zero
/// in both graphs are skipped; a cut empty in `g` but not in `h` gives an
/// infinite ratio.
pub fn verify_cut_membership(g: &DynamicGraph, h: &DynamicGraph, mode: CutMode) -> Result<VerificationReport> {
    assert_eq!(g.n(), h.n(), "graphs must share the vertex set");
    let n = g.n();
    let exact = match mode {
        CutMode::Exact => {
            if n > EXACT_CUT_LIMIT {
                return Err(Error::TooLarge { n, cap: EXACT_CUT_LIMIT });
            }
            true
        }
        CutMode::Auto { .. } => n <= EXACT_CUT_LIMIT,
        CutMode::Sampled { .. } => false,
    };
    let mut report = VerificationReport::empty(CheckKind::Cut, exact);
    if exact {
        for_each_cut(&[g, h], |mask, cut, _| {
            if let Some(r) = cut_ratio(cut[1], cut[0]) {
                report.observe(r, || Witness::Cut(mask_to_set(mask)));
            }
        })?;
    } else {
        let (samples, seed) = match mode {
            CutMode::Auto { samples, seed } | CutMode::Sampled { samples, seed } => (samples, seed),
            CutMode::Exact => unreachable!(),
        };
        let mut rng = crate::rng(seed);
        for side in candidate_cuts(g, samples, &mut rng) {
            if let Some(r) = cut_ratio(cut_weight(h, &side), cut_weight(g, &side)) {
                report.observe(r, || Witness::Cut(side.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()));
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest paths with edge weights as lengths.
pub fn dijkstra(g: &DynamicGraph, s: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; g.n()];
    let mut heap = BinaryHeap::new();
    dist[s] = 0.0;
    heap.push(HeapItem(0.0, s));
    while let Some(HeapItem(d, x)) = heap.pop() {
        if d > dist[x] {
            continue;
        }
        for id in g.incident(VertexId(x)) {
            let e = g.edge(id).expect("incident edge exists");
            let y = e.other(VertexId(x)).0;
            let nd = d + e.w;
            if nd < dist[y] {
                dist[y] = nd;
                heap.push(HeapItem(nd, y));
            }
        }
    }
    dist
}

pub fn all_pairs_distances(g: &DynamicGraph) -> Vec<Vec<f64>> {
    (0..g.n()).map(|s| dijkstra(g, s)).collect()
}

/// Unweighted hop distances by breadth-first search.
pub fn bfs_hops(g: &DynamicGraph, s: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.n()];
    dist[s] = Some(0);
    let mut queue = VecDeque::from([s]);
    while let Some(x) = queue.pop_front() {
        let d = dist[x].unwrap();
        for y in g.neighbors(VertexId(x)) {
            if dist[y.0].is_none() {
                dist[y.0] = Some(d + 1);
                queue.push_back(y.0);
            }
        }
    }
    dist
}

/// Largest finite hop eccentricity over all vertices.
pub fn hop_diameter(g: &DynamicGraph) -> usize {
    (0..g.n()).map(|s| bfs_hops(g, s).into_iter().flatten().max().unwrap_or(0)).max().unwrap_or(0)
}

/// Ratios `dist_h(u,v) / dist_g(u,v)` over all pairs connected in `g`.
/// A pair connected in `g` but not in `h` gives an infinite ratio.
pub fn distance_ratios(g: &DynamicGraph, h: &DynamicGraph) -> VerificationReport {
    assert_eq!(g.n(), h.n(), "graphs must share the vertex set");
    let dg = all_pairs_distances(g);
    let dh = all_pairs_distances(h);
    let mut report = VerificationReport::empty(CheckKind::Spanner, true);
    for u in 0..g.n() {
        for v in (u + 1)..g.n() {
            let a = dg[u][v];
            if !a.is_finite() || a <= 0.0 {
                continue;
            }
            report.observe(dh[u][v] / a, || Witness::Pair(u, v));
        }
    }
    report
}

/// Stretch of subgraph `h` of `g`. Fails with `NotSubgraph` when `h` has an
/// edge between two vertices that are not adjacent in `g`.
pub fn verify_spanner(g: &DynamicGraph, h: &DynamicGraph) -> Result<VerificationReport> {
    let pairs: BTreeSet<(usize, usize)> =
        g.edges().map(|(_, e)| (e.u.0.min(e.v.0), e.u.0.max(e.v.0))).collect();
    for (_, e) in h.edges() {
        if e.u != e.v && !pairs.contains(&(e.u.0.min(e.v.0), e.u.0.max(e.v.0))) {
            return Err(Error::NotSubgraph(e.u.0, e.v.0));
        }
    }
    Ok(distance_ratios(g, h))
}

fn laplacian(g: &DynamicGraph) -> DMatrix<f64> {
    let n = g.n();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for (_, e) in g.edges() {
        if e.u == e.v {
            continue;
        }
        let (a, b) = (e.u.0, e.v.0);
        l[(a, a)] += e.w;
        l[(b, b)] += e.w;
        l[(a, b)] -= e.w;
        l[(b, a)] -= e.w;
    }
    l
}

fn component_labels(g: &DynamicGraph) -> Vec<usize> {
    let mut label = vec![0; g.n()];
    for (c, comp) in g.components().iter().enumerate() {
        for v in comp {
            label[v.0] = c;
        }
    }
    label
}

/// Extreme generalized eigenvalues of the pencil `(L_h, L_g)` on the range of
/// `L_g`. Both graphs must have the same connected components.
pub fn verify_spectral(g: &DynamicGraph, h: &DynamicGraph) -> Result<VerificationReport> {
    assert_eq!(g.n(), h.n(), "graphs must share the vertex set");
    let n = g.n();
    if n > EXACT_EIGEN_LIMIT {
        return Err(Error::TooLarge { n, cap: EXACT_EIGEN_LIMIT });
    }
    if component_labels(g) != component_labels(h) {
        return Err(Error::KernelMismatch);
    }
    let mut report = VerificationReport::empty(CheckKind::Spectral, true);
    let lg = laplacian(g);
    let eig = SymmetricEigen::new(lg);
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 1e-9 * top.max(1.0)).collect();
    if keep.is_empty() {
        return Ok(report);
    }
    let r = keep.len();
    let mut basis = DMatrix::<f64>::zeros(n, r);
    for (j, &i) in keep.iter().enumerate() {
        let s = 1.0 / eig.eigenvalues[i].sqrt();
        for row in 0..n {
            basis[(row, j)] = eig.eigenvectors[(row, i)] * s;
        }
    }
    let m = basis.transpose() * laplacian(h) * &basis;
    let m = (&m + m.transpose()) * 0.5;
    let pencil = SymmetricEigen::new(m);
    for (i, &lam) in pencil.eigenvalues.iter().enumerate() {
        report.observe(lam.max(0.0), || Witness::Eigen(i));
    }
    Ok(report)
}

/// Directed network with nonnegative (possibly infinite) arc capacities.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FlowNetwork {
    pub n: usize,
    pub arcs: Vec<(usize, usize, f64)>,
}

impl FlowNetwork {
    pub fn new(n: usize) -> Self {
        FlowNetwork { n, arcs: Vec::new() }
    }

    pub fn add_arc(&mut self, u: usize, v: usize, cap: f64) -> usize {
        self.arcs.push((u, v, cap));
        self.arcs.len() - 1
    }
}

/// Exact maximum `s`-`t` flow value by Dinic's algorithm. Returns infinity
/// when an all-infinite path exists.
pub fn max_flow_exact(net: &FlowNetwork, s: usize, t: usize) -> f64 {
    struct Arc {
        to: usize,
        cap: f64,
    }
    let mut arcs: Vec<Arc> = Vec::with_capacity(net.arcs.len() * 2);
    let mut adj = vec![Vec::new(); net.n];
    for &(u, v, c) in &net.arcs {
        adj[u].push(arcs.len());
        arcs.push(Arc { to: v, cap: c });
        adj[v].push(arcs.len());
        arcs.push(Arc { to: u, cap: 0.0 });
    }
    const EPS: f64 = 1e-12;
    let mut total = 0.0;
    loop {
        let mut level = vec![usize::MAX; net.n];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for &a in &adj[x] {
                if arcs[a].cap > EPS && level[arcs[a].to] == usize::MAX {
                    level[arcs[a].to] = level[x] + 1;
                    queue.push_back(arcs[a].to);
                }
            }
        }
        if level[t] == usize::MAX {
            return total;
        }
        let mut next = vec![0usize; net.n];
        loop {
            let pushed = dinic_push(s, t, f64::INFINITY, &level, &mut next, &adj, &mut arcs);
            if pushed <= EPS {
                break;
            }
            if pushed.is_infinite() {
                return f64::INFINITY;
            }
            total += pushed;
        }
    }

    fn dinic_push(
        x: usize,
        t: usize,
        limit: f64,
        level: &[usize],
        next: &mut [usize],
        adj: &[Vec<usize>],
        arcs: &mut [Arc],
    ) -> f64 {
        if x == t {
            return limit;
        }
        while next[x] < adj[x].len() {
            let a = adj[x][next[x]];
            let to = arcs[a].to;
            if arcs[a].cap > EPS && level[to] == level[x] + 1 {
                let got = dinic_push(to, t, limit.min(arcs[a].cap), level, next, adj, arcs);
                if got > EPS {
                    if got.is_finite() {
                        arcs[a].cap -= got;
                        arcs[a ^ 1].cap += got;
                    }
                    return got;
                }
            }
            next[x] += 1;
        }
        0.0
    }
}

/// Minimum `s`-`t` cut capacity by enumerating every vertex set containing
/// `s` and not `t` (independent of any augmenting-path code).
pub fn min_cut_brute_force(net: &FlowNetwork, s: usize, t: usize) -> Result<f64> {
    if net.n > EXACT_CUT_LIMIT {
        return Err(Error::TooLarge { n: net.n, cap: EXACT_CUT_LIMIT });
    }
    let others: Vec<usize> = (0..net.n).filter(|&v| v != s && v != t).collect();
    let mut best = f64::INFINITY;
    for mask in 0u64..(1u64 << others.len()) {
        let mut inside = vec![false; net.n];
        inside[s] = true;
        for (i, &v) in others.iter().enumerate() {
            if mask & (1 << i) != 0 {
                inside[v] = true;
            }
        }
        let cap: f64 = net.arcs.iter().filter(|a| inside[a.0] && !inside[a.1]).map(|a| a.2).sum();
        best = best.min(cap);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeId;

    fn complete(n: usize) -> DynamicGraph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                edges.push((u, v, 1.0));
            }
        }
        DynamicGraph::from_edges(n, edges).unwrap()
    }

    #[test]
    fn k4_conductance() {
        let c = exact_conductance(&complete(4)).unwrap();
        assert!((c.value - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(c.witness.len(), 2);
    }

    #[test]
    fn conductance_edge_cases() {
        let two = DynamicGraph::from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(exact_conductance(&two).unwrap().value, 0.0);
        let single = DynamicGraph::from_edges(2, [(0, 1, 1.0)]).unwrap();
        assert_eq!(exact_conductance(&single).unwrap().value, 1.0);
        assert!(exact_conductance(&DynamicGraph::new(21)).is_err());
    }

    #[test]
    fn self_loops_add_volume_not_cut() {
        let g = DynamicGraph::from_edges(2, [(0, 1, 1.0), (0, 0, 1.0), (1, 1, 1.0)]).unwrap();
        assert!((exact_conductance(&g).unwrap().value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cut_membership_identity_and_double() {
        let g = complete(6);
        let r = verify_cut_membership(&g, &g, CutMode::Exact).unwrap();
        assert_eq!((r.min_ratio, r.max_ratio), (1.0, 1.0));
        assert_eq!(r.checked, 31);
        let h = DynamicGraph::from_edges(6, g.edges().map(|(_, e)| (e.u.0, e.v.0, 2.0))).unwrap();
        let r = verify_cut_membership(&g, &h, CutMode::Exact).unwrap();
        assert!((r.min_ratio - 2.0).abs() < 1e-12 && (r.max_ratio - 2.0).abs() < 1e-12);
    }

    #[test]
    fn worst_cut_matches_direct_recount() {
        let g = DynamicGraph::from_edges(7, [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (3, 4, 3.0), (4, 5, 1.0), (5, 6, 1.0), (6, 0, 1.0), (0, 3, 1.0)]).unwrap();
        let h = g.edge_subgraph(|id, _| id != EdgeId(2) && id != EdgeId(7));
        let r = verify_cut_membership(&g, &h, CutMode::Exact).unwrap();
        let mut best = f64::INFINITY;
        for mask in 1u32..(1 << 7) - 1 {
            let side: Vec<bool> = (0..7).map(|i| mask & (1 << i) != 0).collect();
            let gc = cut_weight(&g, &side);
            best = best.min(cut_weight(&h, &side) / gc);
        }
        assert!((r.min_ratio - best).abs() < 1e-12);
    }

    #[test]
    fn sampled_mode_includes_singletons() {
        let g = complete(5);
        let mut h = g.clone();
        h.delete_edge(EdgeId(0)).unwrap();
        let r = verify_cut_membership(&g, &h, CutMode::Sampled { samples: 0, seed: 1 }).unwrap();
        assert!((r.min_ratio - 0.75).abs() < 1e-12);
        assert!(!r.exact);
    }

    #[test]
    fn spanner_of_cycle() {
        let g = DynamicGraph::from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap();
        assert_eq!(verify_spanner(&g, &g).unwrap().max_ratio, 1.0);
        let h = g.edge_subgraph(|id, _| id != EdgeId(3));
        let r = verify_spanner(&g, &h).unwrap();
        assert_eq!(r.max_ratio, 3.0);
        assert_eq!(r.max_witness, Witness::Pair(0, 3));
        let cut = g.edge_subgraph(|id, _| id.0 < 2);
        assert!(verify_spanner(&g, &cut).unwrap().max_ratio.is_infinite());
        let extra = DynamicGraph::from_edges(4, [(0, 2, 1.0)]).unwrap();
        assert_eq!(verify_spanner(&g, &extra).unwrap_err(), Error::NotSubgraph(0, 2));
    }

    #[test]
    fn spectral_identity_and_scaling() {
        let g = complete(6);
        let r = verify_spectral(&g, &g).unwrap();
        assert!((r.min_ratio - 1.0).abs() < 1e-9 && (r.max_ratio - 1.0).abs() < 1e-9);
        let h = DynamicGraph::from_edges(6, g.edges().map(|(_, e)| (e.u.0, e.v.0, 2.0))).unwrap();
        let r = verify_spectral(&g, &h).unwrap();
        assert!((r.min_ratio - 2.0).abs() < 1e-9 && (r.max_ratio - 2.0).abs() < 1e-9);
        let split = DynamicGraph::from_edges(6, [(0, 1, 1.0)]).unwrap();
        assert_eq!(verify_spectral(&g, &split).unwrap_err(), Error::KernelMismatch);
    }

    #[test]
    fn flows_on_small_networks() {
        let mut net = FlowNetwork::new(2);
        net.add_arc(0, 1, 5.0);
        assert_eq!(max_flow_exact(&net, 0, 1), 5.0);
        let mut net = FlowNetwork::new(4);
        net.add_arc(0, 1, 2.0);
        net.add_arc(1, 3, 4.0);
        net.add_arc(0, 2, 7.0);
        net.add_arc(2, 3, 3.0);
        assert_eq!(max_flow_exact(&net, 0, 3), 5.0);
        assert_eq!(min_cut_brute_force(&net, 0, 3).unwrap(), 5.0);
    }
}
