//! Multiplicative-weights multicommodity flows on undirected
//! vertex-capacitated graphs, with shortest paths from exact Dijkstra or from
//! a lazily refreshed spanner, and randomized rounding to one path per pair.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DynamicGraph, VertexId};
use crate::verify::FlowNetwork;
use crate::Rng;

/// Slack used by every feasibility check.
pub const FEASIBILITY_SLACK: f64 = 1e-9;

/// Undirected graph with a positive or infinite capacity on every vertex.
#[derive(Clone, Debug)]
pub struct VertexCapGraph {
    pub graph: DynamicGraph,
    pub cap: Vec<f64>,
}

impl VertexCapGraph {
    pub fn new(graph: DynamicGraph, cap: Vec<f64>) -> Result<Self> {
        if cap.len() != graph.n() {
            return Err(Error::ParameterTooSmall(format!("{} capacities for {} vertices", cap.len(), graph.n())));
        }
        if let Some(&c) = cap.iter().find(|&&c| c.is_nan() || c <= 0.0) {
            return Err(Error::ParameterTooSmall(format!("vertex capacity must be positive, got {c}")));
        }
        Ok(VertexCapGraph { graph, cap })
    }

    /// Copy with every terminal of `pairs` at infinite capacity.
    pub fn with_terminals(&self, pairs: &[DemandPair]) -> Self {
        let mut g = self.clone();
        for p in pairs {
            g.cap[p.s.0] = f64::INFINITY;
            g.cap[p.t.0] = f64::INFINITY;
        }
        g
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    fn finite_count(&self) -> usize {
        self.cap.iter().filter(|c| c.is_finite()).count()
    }

    fn non_loop_edges(&self) -> usize {
        self.graph.edges().filter(|(_, e)| !e.is_loop()).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemandPair {
    pub s: VertexId,
    pub t: VertexId,
    pub demand: f64,
}

impl DemandPair {
    pub fn new(s: usize, t: usize, demand: f64) -> Result<Self> {
        if s == t {
            return Err(Error::ParameterTooSmall(format!("demand pair endpoints coincide at {s}")));
        }
        if demand.is_nan() || demand <= 0.0 {
            return Err(Error::ParameterTooSmall(format!("demand must be positive, got {demand}")));
        }
        Ok(DemandPair { s: VertexId(s), t: VertexId(t), demand })
    }
}

/// Split node carrying the flow into `v`.
pub fn split_in(v: VertexId) -> usize {
    2 * v.0
}

/// Split node carrying the flow out of `v`.
pub fn split_out(v: VertexId) -> usize {
    2 * v.0 + 1
}

/// Directed edge-capacitated network: one arc `v_in → v_out` of capacity
/// `c(v)` per vertex and two infinite arcs per undirected edge.
pub fn vertex_to_edge_reduce(g: &VertexCapGraph) -> FlowNetwork {
    let mut net = FlowNetwork::new(2 * g.n());
    for v in g.graph.vertices() {
        net.add_arc(split_in(v), split_out(v), g.cap[v.0]);
    }
    for (_, e) in g.graph.edges() {
        if !e.is_loop() {
            net.add_arc(split_out(e.u), split_in(e.v), f64::INFINITY);
            net.add_arc(split_out(e.v), split_in(e.u), f64::INFINITY);
        }
    }
    net
}

/// Exact single-pair maximum flow through the reduction.
pub fn max_flow_oracle(g: &VertexCapGraph, s: VertexId, t: VertexId) -> f64 {
    crate::verify::max_flow_exact(&vertex_to_edge_reduce(g), split_in(s), split_out(t))
}

/// Initial arc length for the throughput algorithm:
/// `(1+ε) / ((1+ε)n)^{1/ε}`.
pub fn throughput_delta(eps: f64, n: usize) -> f64 {
    (1.0 + eps) / ((1.0 + eps) * n as f64).powf(1.0 / eps)
}

/// Initial length scale for the concurrent algorithm: `(2m)^{-1/ε}`.
pub fn concurrent_delta(eps: f64, m: usize) -> f64 {
    (2.0 * m as f64).powf(-1.0 / eps)
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::BadEpsilon { eps, range: "(0, 1)" })
    }
}

/// Source of approximate shortest paths under the current lengths.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SpOracle {
    Exact,
    /// Dijkstra on a greedy `t`-spanner whose edge weights are refreshed
    /// only after doubling. Paths are within `2t` of shortest.
    Spanner { t: f64 },
}

impl SpOracle {
    pub fn alpha(&self) -> f64 {
        match *self {
            SpOracle::Exact => 1.0,
            SpOracle::Spanner { t } => 2.0 * t,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathFlow {
    pub path: Vec<VertexId>,
    pub flow: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Commodity {
    pub pair: DemandPair,
    pub paths: Vec<PathFlow>,
    #[serde(skip)]
    index: BTreeMap<Vec<VertexId>, usize>,
}

impl Commodity {
    fn new(pair: DemandPair) -> Self {
        Commodity { pair, paths: Vec::new(), index: BTreeMap::new() }
    }

    pub fn value(&self) -> f64 {
        self.paths.iter().map(|p| p.flow).sum()
    }

    fn add(&mut self, path: &[VertexId], c: f64) {
        match self.index.get(path) {
            Some(&i) => self.paths[i].flow += c,
            None => {
                self.index.insert(path.to_vec(), self.paths.len());
                self.paths.push(PathFlow { path: path.to_vec(), flow: c });
            }
        }
    }
}

/// Result of a flow computation: per-commodity path decompositions plus
/// the final split-arc lengths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub eps: f64,
    pub delta: f64,
    pub alpha: f64,
    pub commodities: Vec<Commodity>,
    /// Length of each vertex's split arc; zero on infinite capacities.
    pub lengths: Vec<f64>,
    /// Concurrent ratio `min_j |f_j| / d_j`, concurrent runs only.
    pub lambda: Option<f64>,
    pub augmentations: usize,
    pub sp_calls: usize,
    pub demand_doublings: usize,
    #[serde(skip)]
    cap: Vec<f64>,
}

impl FlowState {
    fn init(g: &VertexCapGraph, pairs: &[DemandPair], eps: f64, delta: f64, alpha: f64, lengths: Vec<f64>) -> Self {
        FlowState {
            eps,
            delta,
            alpha,
            commodities: pairs.iter().map(|&p| Commodity::new(p)).collect(),
            lengths,
            lambda: None,
            augmentations: 0,
            sp_calls: 0,
            demand_doublings: 0,
            cap: g.cap.clone(),
        }
    }

    pub fn capacities(&self) -> &[f64] {
        &self.cap
    }

    pub fn total_value(&self) -> f64 {
        self.commodities.iter().map(Commodity::value).sum()
    }

    /// `w'(v)`: the length of `v`'s split arc.
    pub fn vertex_weight(&self, v: VertexId) -> f64 {
        self.lengths[v.0]
    }

    /// `w(u, v) = (w'(u) + w'(v)) / 2`.
    pub fn edge_weight(&self, u: VertexId, v: VertexId) -> f64 {
        (self.lengths[u.0] + self.lengths[v.0]) / 2.0
    }

    /// Total flow through each vertex, summed over commodities.
    pub fn vertex_loads(&self) -> Vec<f64> {
        let mut load = vec![0.0; self.lengths.len()];
        for c in &self.commodities {
            for p in &c.paths {
                for v in &p.path {
                    load[v.0] += p.flow;
                }
            }
        }
        load
    }

    /// Vertices whose load exceeds capacity by more than the slack.
    pub fn overloaded(&self) -> Vec<VertexId> {
        self.vertex_loads()
            .iter()
            .zip(&self.cap)
            .enumerate()
            .filter(|(_, (&l, &c))| l > c + FEASIBILITY_SLACK)
            .map(|(v, _)| VertexId(v))
            .collect()
    }

    pub fn is_feasible(&self) -> bool {
        self.overloaded().is_empty()
    }

    /// Largest `load(v) / c(v)` over finite-capacity vertices.
    pub fn congestion(&self) -> f64 {
        self.vertex_loads().iter().zip(&self.cap).filter(|(_, c)| c.is_finite()).map(|(l, c)| l / c).fold(0.0, f64::max)
    }

    /// Every path is a walk from its commodity's source to its sink along
    /// graph edges.
    pub fn paths_valid(&self, g: &DynamicGraph) -> bool {
        self.commodities.iter().all(|c| {
            c.paths.iter().all(|p| {
                p.flow >= 0.0
                    && p.path.first() == Some(&c.pair.s)
                    && p.path.last() == Some(&c.pair.t)
                    && p.path.windows(2).all(|w| g.neighbors(w[0]).contains(&w[1]))
            })
        })
    }

    /// Each commodity divided by its own value.
    pub fn normalized(&self) -> Result<FlowState> {
        let mut out = self.clone();
        for (j, c) in out.commodities.iter_mut().enumerate() {
            let v = c.value();
            if v <= 0.0 {
                return Err(Error::UnnormalizedFlow(j));
            }
            for p in &mut c.paths {
                p.flow /= v;
            }
        }
        Ok(out)
    }

    fn augment(&mut self, j: usize, path: &[VertexId], c: f64) {
        self.commodities[j].add(path, c);
        for v in path {
            let cv = self.cap[v.0];
            if cv.is_finite() {
                let old = self.lengths[v.0];
                self.lengths[v.0] = old * (1.0 + self.eps * c / cv);
                assert!(self.lengths[v.0] >= old, "length of {v:?} decreased");
            }
        }
        self.augmentations += 1;
    }

    fn scale(&mut self, factor: f64) {
        for c in &mut self.commodities {
            for p in &mut c.paths {
                p.flow *= factor;
            }
        }
    }

    fn path_length(&self, path: &[VertexId]) -> f64 {
        path.iter().map(|v| self.lengths[v.0]).sum()
    }

    fn bottleneck(&self, path: &[VertexId]) -> f64 {
        path.iter().map(|v| self.cap[v.0]).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest-path tree from one source.
pub struct PathTree {
    pub dist: Vec<f64>,
    parent: Vec<Option<usize>>,
    source: usize,
}

impl PathTree {
    pub fn path(&self, t: VertexId) -> Option<Vec<VertexId>> {
        if self.dist[t.0].is_infinite() {
            return None;
        }
        let mut path = vec![t];
        let mut x = t.0;
        while x != self.source {
            x = self.parent[x]?;
            path.push(VertexId(x));
        }
        path.reverse();
        Some(path)
    }
}

fn dijkstra(adj: &[Vec<usize>], s: usize, weight: impl Fn(usize, usize) -> f64, cutoff: f64) -> PathTree {
    let n = adj.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![None; n];
    let mut heap = BinaryHeap::new();
    dist[s] = 0.0;
    heap.push(Item(0.0, s));
    while let Some(Item(d, x)) = heap.pop() {
        if d > dist[x] || d > cutoff {
            continue;
        }
        for &y in &adj[x] {
            let nd = d + weight(x, y);
            if nd < dist[y] {
                dist[y] = nd;
                parent[y] = Some(x);
                heap.push(Item(nd, y));
            }
        }
    }
    PathTree { dist, parent, source: s }
}

/// Shortest paths under `w(u,v) = (w'(u)+w'(v))/2`, either on the whole
/// graph or on a spanner rebuilt whenever some edge weight has doubled since
/// it was last pushed.
pub struct PathFinder {
    oracle: SpOracle,
    adj: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    pushed: Vec<f64>,
    spanner: Vec<Vec<usize>>,
    rebuilds: usize,
}

impl PathFinder {
    pub fn new(g: &DynamicGraph, oracle: SpOracle) -> Self {
        let n = g.n();
        let mut pairs: Vec<(usize, usize)> =
            g.edges().filter(|(_, e)| !e.is_loop()).map(|(_, e)| (e.u.0.min(e.v.0), e.u.0.max(e.v.0))).collect();
        pairs.sort_unstable();
        pairs.dedup();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &pairs {
            adj[u].push(v);
            adj[v].push(u);
        }
        PathFinder { oracle, adj, pushed: vec![f64::NAN; pairs.len()], edges: pairs, spanner: vec![Vec::new(); n], rebuilds: 0 }
    }

    /// Number of spanner rebuilds so far.
    pub fn rebuilds(&self) -> usize {
        self.rebuilds
    }

    pub fn tree(&mut self, s: VertexId, lengths: &[f64]) -> PathTree {
        let w = |x: usize, y: usize| (lengths[x] + lengths[y]) / 2.0;
        match self.oracle {
            SpOracle::Exact => dijkstra(&self.adj, s.0, w, f64::INFINITY),
            SpOracle::Spanner { t } => {
                self.refresh(lengths, t);
                dijkstra(&self.spanner, s.0, w, f64::INFINITY)
            }
        }
    }

    fn refresh(&mut self, lengths: &[f64], t: f64) {
        let mut dirty = false;
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            let w = (lengths[u] + lengths[v]) / 2.0;
            if self.pushed[i].is_nan() || w >= 2.0 * self.pushed[i] && w > 0.0 {
                self.pushed[i] = w;
                dirty = true;
            }
        }
        if !dirty {
            return;
        }
        self.rebuilds += 1;
        let mut order: Vec<usize> = (0..self.edges.len()).collect();
        order.sort_by(|&a, &b| self.pushed[a].total_cmp(&self.pushed[b]));
        let mut h: Vec<Vec<usize>> = vec![Vec::new(); self.adj.len()];
        let mut hw: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for i in order {
            let (u, v) = self.edges[i];
            let w = self.pushed[i];
            let tree = dijkstra(&h, u, |x, y| hw[&(x.min(y), x.max(y))], t * w);
            if tree.dist[v] > t * w || (w == 0.0 && tree.dist[v].is_infinite()) {
                h[u].push(v);
                h[v].push(u);
                hw.insert((u, v), w);
            }
        }
        self.spanner = h;
    }
}

/// `alpha`-approximate maximum-throughput multicommodity flow. Sources are
/// processed one at a time, each routing towards its currently closest sink.
pub fn max_throughput(g: &VertexCapGraph, pairs: &[DemandPair], eps: f64, oracle: SpOracle) -> Result<FlowState> {
    check_eps(eps)?;
    let g = g.with_terminals(pairs);
    check_bounded(&g, pairs)?;
    let delta = throughput_delta(eps, g.n());
    let lengths = g.cap.iter().map(|c| if c.is_finite() { delta } else { 0.0 }).collect();
    let mut st = FlowState::init(&g, pairs, eps, delta, oracle.alpha(), lengths);
    let mut finder = PathFinder::new(&g.graph, oracle);
    let scale = ((1.0 + eps) / delta).ln() / (1.0 + eps).ln();
    let rounds = (scale + 1e-9).floor() as i32;
    let mut sources: Vec<VertexId> = Vec::new();
    for p in pairs {
        if !sources.contains(&p.s) {
            sources.push(p.s);
        }
    }
    for r in 1..=rounds {
        let bound = (delta * (1.0 + eps).powi(r)).min(1.0);
        for &s in &sources {
            loop {
                let tree = finder.tree(s, &st.lengths);
                st.sp_calls += 1;
                let best = pairs
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| p.s == s && tree.dist[p.t.0].is_finite())
                    .min_by(|a, b| tree.dist[a.1.t.0].total_cmp(&tree.dist[b.1.t.0]));
                let Some((j, p)) = best else { break };
                let path = tree.path(p.t).expect("reachable sink");
                if st.path_length(&path) >= bound {
                    break;
                }
                let c = st.bottleneck(&path);
                st.augment(j, &path, c);
            }
        }
    }
    st.scale(1.0 / scale);
    Ok(st)
}

/// Maximum concurrent flow. Demands are first multiplied by `beta_tilde`,
/// a lower bound on the optimum, and doubled whenever a budget of shortest
/// path computations runs out.
pub fn max_concurrent(g: &VertexCapGraph, pairs: &[DemandPair], eps: f64, beta_tilde: f64, oracle: SpOracle) -> Result<FlowState> {
    check_eps(eps)?;
    if beta_tilde.is_nan() || beta_tilde <= 0.0 {
        return Err(Error::ParameterTooSmall(format!("beta estimate must be positive, got {beta_tilde}")));
    }
    let g = g.with_terminals(pairs);
    check_bounded(&g, pairs)?;
    check_connected(&g, pairs)?;
    let m = g.n() + 2 * g.non_loop_edges();
    let delta = concurrent_delta(eps, m);
    let lengths: Vec<f64> = g.cap.iter().map(|&c| if c.is_finite() { delta / c } else { 0.0 }).collect();
    let mut st = FlowState::init(&g, pairs, eps, delta, oracle.alpha(), lengths);
    let mut finder = PathFinder::new(&g.graph, oracle);
    let scale = ((1.0 + eps) / delta).ln() / (1.0 + eps).ln();
    let budget = (g.finite_count() + 2 * pairs.len()) * scale.ceil() as usize;
    let mut demands: Vec<f64> = pairs.iter().map(|p| p.demand * beta_tilde).collect();
    let potential = |st: &FlowState| st.lengths.iter().zip(&st.cap).filter(|(_, c)| c.is_finite()).map(|(l, c)| l * c).sum::<f64>();
    let mut spent = 0;
    while potential(&st) < 1.0 {
        for (j, p) in pairs.iter().enumerate() {
            let mut rest = demands[j];
            while rest > 0.0 && potential(&st) < 1.0 {
                let tree = finder.tree(p.s, &st.lengths);
                st.sp_calls += 1;
                spent += 1;
                let path = tree.path(p.t).expect("pairs are connected");
                let c = st.bottleneck(&path).min(rest);
                rest -= c;
                st.augment(j, &path, c);
            }
        }
        if spent > budget {
            spent = 0;
            st.demand_doublings += 1;
            demands.iter_mut().for_each(|d| *d *= 2.0);
        }
    }
    st.scale(1.0 / scale);
    st.lambda = Some(st.commodities.iter().map(|c| c.value() / c.pair.demand).fold(f64::INFINITY, f64::min));
    Ok(st)
}

/// Fails if some pair is joined by a path of infinite-capacity vertices.
fn check_bounded(g: &VertexCapGraph, pairs: &[DemandPair]) -> Result<()> {
    let comp = components(g, |v| g.cap[v].is_infinite());
    if pairs.iter().any(|p| comp[p.s.0].is_some() && comp[p.s.0] == comp[p.t.0]) {
        return Err(Error::UnboundedFlow);
    }
    Ok(())
}

fn check_connected(g: &VertexCapGraph, pairs: &[DemandPair]) -> Result<()> {
    let comp = components(g, |_| true);
    match pairs.iter().find(|p| comp[p.s.0] != comp[p.t.0]) {
        Some(p) => Err(Error::PairDisconnected(p.s, p.t)),
        None => Ok(()),
    }
}

/// Component labels of the subgraph induced by the kept vertices.
fn components(g: &VertexCapGraph, keep: impl Fn(usize) -> bool) -> Vec<Option<usize>> {
    let n = g.n();
    let mut label = vec![None; n];
    let mut next = 0;
    for start in 0..n {
        if label[start].is_some() || !keep(start) {
            continue;
        }
        label[start] = Some(next);
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            for y in g.graph.neighbors(VertexId(x)) {
                if label[y.0].is_none() && keep(y.0) {
                    label[y.0] = Some(next);
                    stack.push(y.0);
                }
            }
        }
        next += 1;
    }
    label
}

/// Factor-2 brackets on each pair's bottleneck capacity and the derived
/// lower bound on the concurrent optimum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaEstimate {
    pub c_min: f64,
    /// `[2^i c_min, 2^{i+1} c_min)` containing the widest-path bottleneck.
    pub brackets: Vec<(f64, f64)>,
    pub beta_tilde: f64,
    /// `β̃ ≤ β ≤ approx · β̃`.
    pub approx: f64,
}

/// Brackets every pair's bottleneck by sweeping capacity levels: `G_i` is
/// induced on vertices of capacity at least `2^i c_min`, and the bottleneck
/// lies in the last level where the pair is still connected.
pub fn beta_estimate(g: &VertexCapGraph, pairs: &[DemandPair]) -> Result<BetaEstimate> {
    let g = g.with_terminals(pairs);
    check_bounded(&g, pairs)?;
    let c_min = g.cap.iter().copied().filter(|c| c.is_finite()).fold(f64::INFINITY, f64::min);
    let c_max = g.cap.iter().copied().filter(|c| c.is_finite()).fold(0.0, f64::max);
    let top = if c_min.is_finite() { (c_max / c_min).log2().floor() as i32 } else { 0 };
    let mut level: Vec<Option<i32>> = vec![None; pairs.len()];
    for i in 0..=top {
        let floor = c_min * 2f64.powi(i);
        let comp = components(&g, |v| g.cap[v] >= floor * (1.0 - 1e-12));
        for (j, p) in pairs.iter().enumerate() {
            if comp[p.s.0].is_some() && comp[p.s.0] == comp[p.t.0] {
                level[j] = Some(i);
            }
        }
    }
    let mut brackets = Vec::with_capacity(pairs.len());
    for (j, p) in pairs.iter().enumerate() {
        let i = level[j].ok_or(Error::PairDisconnected(p.s, p.t))?;
        let lo = c_min * 2f64.powi(i);
        brackets.push((lo, 2.0 * lo));
    }
    let k = pairs.len().max(1) as f64;
    let beta_tilde = pairs.iter().zip(&brackets).map(|(p, b)| b.0 / (k * p.demand)).fold(f64::INFINITY, f64::min);
    Ok(BetaEstimate { c_min, brackets, beta_tilde, approx: 2.0 * g.n() as f64 * k })
}

/// One sampled path per commodity and the congestion they induce.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rounding {
    pub choices: Vec<usize>,
    pub paths: Vec<Vec<VertexId>>,
    pub congestion: f64,
    pub fractional_congestion: f64,
}

/// Picks one path per commodity with probability equal to its flow. Every
/// commodity must carry a unit-value decomposition.
pub fn congestion_round(state: &FlowState, rng: &mut Rng) -> Result<Rounding> {
    let mut choices = Vec::with_capacity(state.commodities.len());
    let mut paths = Vec::with_capacity(state.commodities.len());
    for (j, c) in state.commodities.iter().enumerate() {
        if (c.value() - 1.0).abs() > FEASIBILITY_SLACK {
            return Err(Error::UnnormalizedFlow(j));
        }
        let dist = WeightedIndex::new(c.paths.iter().map(|p| p.flow)).map_err(|_| Error::UnnormalizedFlow(j))?;
        let i = dist.sample(rng);
        choices.push(i);
        paths.push(c.paths[i].path.clone());
    }
    let mut count = vec![0usize; state.cap.len()];
    for p in &paths {
        for v in p {
            count[v.0] += 1;
        }
    }
    let congestion =
        count.iter().zip(&state.cap).filter(|(_, c)| c.is_finite()).map(|(&k, c)| k as f64 / c).fold(0.0, f64::max);
    Ok(Rounding { choices, paths, congestion, fractional_congestion: state.congestion() })
}

/// Random connected instance with `k` pairs: terminals are never adjacent to
/// each other, other vertices get integer capacities in `[1, max_cap]`.
pub fn random_instance(n: usize, extra_edges: usize, k: usize, max_cap: u32, rng: &mut Rng) -> Result<(VertexCapGraph, Vec<DemandPair>)> {
    if n < 2 * k + 1 || k == 0 {
        return Err(Error::ParameterTooSmall(format!("{n} vertices cannot host {k} disjoint pairs and a relay")));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let (terms, inner) = perm.split_at(2 * k);
    let mut is_term = vec![false; n];
    terms.iter().for_each(|&v| is_term[v] = true);
    let mut edges = Vec::new();
    for i in 1..inner.len() {
        edges.push((inner[i], inner[rng.random_range(0..i)], 1.0));
    }
    for &t in terms {
        edges.push((t, inner[rng.random_range(0..inner.len())], 1.0));
    }
    let mut added = 0;
    while added < extra_edges {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v && !(is_term[u] && is_term[v]) {
            edges.push((u, v, 1.0));
            added += 1;
        }
    }
    let graph = DynamicGraph::from_edges(n, edges)?;
    let cap = (0..n).map(|v| if is_term[v] { f64::INFINITY } else { rng.random_range(1..=max_cap) as f64 }).collect();
    let pairs = (0..k).map(|j| DemandPair::new(terms[2 * j], terms[2 * j + 1], 1.0 + rng.random_range(0..3) as f64)).collect::<Result<_>>()?;
    Ok((VertexCapGraph::new(graph, cap)?, pairs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{max_flow_exact, min_cut_brute_force};

    fn path_graph(caps: &[f64]) -> VertexCapGraph {
        let n = caps.len();
        let g = DynamicGraph::from_edges(n, (1..n).map(|i| (i - 1, i, 1.0))).unwrap();
        VertexCapGraph::new(g, caps.to_vec()).unwrap()
    }

    #[test]
    fn throughput_delta_at_half_over_four_vertices() {
        assert!((throughput_delta(0.5, 4) - 1.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn concurrent_delta_at_half_over_eight_arcs() {
        assert!((concurrent_delta(0.5, 8) - 1.0 / 256.0).abs() < 1e-15);
    }

    #[test]
    fn reduction_arc_counts() {
        let single = VertexCapGraph::new(DynamicGraph::new(1), vec![5.0]).unwrap();
        assert_eq!(vertex_to_edge_reduce(&single).arcs, vec![(0, 1, 5.0)]);
        let tri = DynamicGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let net = vertex_to_edge_reduce(&VertexCapGraph::new(tri, vec![1.0; 3]).unwrap());
        assert_eq!(net.arcs.iter().filter(|a| a.2.is_finite()).count(), 3);
        assert_eq!(net.arcs.iter().filter(|a| a.2.is_infinite()).count(), 6);
    }

    #[test]
    fn middle_capacity_bounds_the_path() {
        let g = path_graph(&[f64::INFINITY, 3.0, f64::INFINITY]);
        let net = vertex_to_edge_reduce(&g);
        assert_eq!(max_flow_exact(&net, split_in(VertexId(0)), split_out(VertexId(2))), 3.0);
        assert_eq!(min_cut_brute_force(&net, split_in(VertexId(0)), split_out(VertexId(2))).unwrap(), 3.0);
        let pairs = [DemandPair::new(0, 2, 1.0).unwrap()];
        let st = max_throughput(&g, &pairs, 0.1, SpOracle::Exact).unwrap();
        assert!(st.is_feasible());
        assert!(st.total_value() >= 0.7 * 3.0);
    }

    #[test]
    fn infinite_arcs_keep_zero_length() {
        let (g, pairs) = random_instance(10, 8, 2, 5, &mut crate::rng(1)).unwrap();
        let st = max_throughput(&g, &pairs, 0.3, SpOracle::Exact).unwrap();
        let g = g.with_terminals(&pairs);
        for v in 0..g.n() {
            if g.cap[v].is_infinite() {
                assert_eq!(st.lengths[v], 0.0);
            }
        }
    }

    #[test]
    fn edge_weights_match_split_arc_lengths_on_paths() {
        let (g, pairs) = random_instance(9, 6, 1, 4, &mut crate::rng(2)).unwrap();
        let st = max_throughput(&g, &pairs, 0.5, SpOracle::Exact).unwrap();
        for c in &st.commodities {
            for p in &c.paths {
                let w: f64 = p.path.windows(2).map(|e| st.edge_weight(e[0], e[1])).sum();
                let l: f64 = p.path.iter().map(|&v| st.vertex_weight(v)).sum();
                assert!((w - l).abs() <= 1e-12 * l.max(1.0));
            }
        }
    }

    #[test]
    fn spanner_paths_within_stretch() {
        let mut rng = crate::rng(3);
        let (g, _) = random_instance(14, 20, 1, 9, &mut rng).unwrap();
        let lengths: Vec<f64> = (0..g.n()).map(|_| rng.random::<f64>()).collect();
        let mut exact = PathFinder::new(&g.graph, SpOracle::Exact);
        let oracle = SpOracle::Spanner { t: 3.0 };
        let mut sp = PathFinder::new(&g.graph, oracle);
        for s in 0..g.n() {
            let a = exact.tree(VertexId(s), &lengths);
            let b = sp.tree(VertexId(s), &lengths);
            for t in 0..g.n() {
                assert!(b.dist[t] <= oracle.alpha() * a.dist[t] + 1e-12);
                assert!(b.dist[t] >= a.dist[t] - 1e-12);
            }
        }
    }

    #[test]
    fn throughput_and_concurrent_are_feasible() {
        for seed in 0..5 {
            let (g, pairs) = random_instance(12, 10, 2, 6, &mut crate::rng(seed)).unwrap();
            let st = max_throughput(&g, &pairs, 0.3, SpOracle::Exact).unwrap();
            assert!(st.is_feasible() && st.paths_valid(&g.graph));
            let beta = beta_estimate(&g, &pairs).unwrap();
            let st = max_concurrent(&g, &pairs, 0.3, beta.beta_tilde, SpOracle::Spanner { t: 2.0 }).unwrap();
            assert!(st.is_feasible() && st.paths_valid(&g.graph));
            assert!(st.lambda.unwrap() > 0.0);
        }
    }

    #[test]
    fn bottleneck_seven_lands_in_level_two() {
        let g = DynamicGraph::from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (1, 3, 1.0)]).unwrap();
        let g = VertexCapGraph::new(g, vec![f64::INFINITY, 7.0, f64::INFINITY, 1.0]).unwrap();
        let est = beta_estimate(&g, &[DemandPair::new(0, 2, 1.0).unwrap()]).unwrap();
        assert_eq!(est.brackets, vec![(4.0, 8.0)]);
        let flat = path_graph(&[2.0, 2.0, 2.0, 2.0]);
        let est = beta_estimate(&flat, &[DemandPair::new(0, 3, 1.0).unwrap()]).unwrap();
        assert_eq!(est.brackets, vec![(2.0, 4.0)]);
    }

    #[test]
    fn disconnected_pair_is_rejected() {
        let g = VertexCapGraph::new(DynamicGraph::from_edges(4, [(0, 1, 1.0)]).unwrap(), vec![1.0; 4]).unwrap();
        let pairs = [DemandPair::new(0, 3, 1.0).unwrap()];
        assert_eq!(beta_estimate(&g, &pairs).unwrap_err(), Error::PairDisconnected(VertexId(0), VertexId(3)));
        assert!(matches!(max_concurrent(&g, &pairs, 0.5, 1.0, SpOracle::Exact), Err(Error::PairDisconnected(..))));
    }

    #[test]
    fn bad_epsilon_and_unbounded_pairs() {
        let g = path_graph(&[1.0, 1.0]);
        let pairs = [DemandPair::new(0, 1, 1.0).unwrap()];
        assert!(matches!(max_throughput(&g, &pairs, 1.0, SpOracle::Exact), Err(Error::BadEpsilon { .. })));
        assert_eq!(max_throughput(&g, &pairs, 0.5, SpOracle::Exact).unwrap_err(), Error::UnboundedFlow);
    }

    #[test]
    fn single_path_rounding_picks_it() {
        let g = path_graph(&[f64::INFINITY, 3.0, f64::INFINITY]);
        let pairs = [DemandPair::new(0, 2, 1.0).unwrap()];
        let st = max_throughput(&g, &pairs, 0.2, SpOracle::Exact).unwrap().normalized().unwrap();
        let r = congestion_round(&st, &mut crate::rng(0)).unwrap();
        assert_eq!(r.paths, vec![vec![VertexId(0), VertexId(1), VertexId(2)]]);
        assert!((r.congestion - 1.0 / 3.0).abs() < 1e-12);
        let raw = max_throughput(&g, &pairs, 0.2, SpOracle::Exact).unwrap();
        assert_eq!(congestion_round(&raw, &mut crate::rng(0)).unwrap_err(), Error::UnnormalizedFlow(0));
    }
}
