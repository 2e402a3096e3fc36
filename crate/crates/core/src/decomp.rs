//! Static expander decompositions: a vertex partition by recursive spectral
//! cuts, an edge partition by recursing on crossing edges, and the
//! min-degree variant whose clusters come with degree-split companions.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expander::{delta_reduce, ContractionMap};
use crate::graph::{DynamicGraph, EdgeId, VertexId};
use crate::verify::{exact_conductance, normalized_lambda2, sampled_conductance, TOL};

/// Largest vertex count certified by exhaustive enumeration.
pub const CERT_EXACT_LIMIT: usize = 18;
const SAMPLED_CUTS: usize = 64;

/// Conductance evidence for one cluster. `conductance` is exact when
/// `exact`, otherwise the best cut found by sweeps and sampling (an upper
/// estimate), with the Cheeger lower bound `λ₂/2` alongside.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub conductance: f64,
    pub exact: bool,
    pub cheeger_lower: Option<f64>,
}

impl Certificate {
    pub fn certifies(&self, phi: f64) -> bool {
        self.conductance >= phi * (1.0 - TOL)
    }
}

pub fn certify(g: &DynamicGraph) -> Certificate {
    if g.n() <= CERT_EXACT_LIMIT {
        let c = exact_conductance(g).expect("within the exact limit");
        Certificate { conductance: c.value, exact: true, cheeger_lower: None }
    } else {
        let c = sampled_conductance(g, SAMPLED_CUTS, &mut crate::rng(g.m() as u64));
        Certificate { conductance: c.value, exact: false, cheeger_lower: Some(normalized_lambda2(g) / 2.0) }
    }
}

fn check_phi(phi: f64) -> Result<()> {
    if phi > 0.0 && phi <= 0.5 {
        Ok(())
    } else {
        Err(Error::ParameterTooSmall(format!("phi must lie in (0, 1/2], got {phi}")))
    }
}

fn round_budget(m: usize) -> usize {
    4 * ((m + 2) as f64).log2().ceil() as usize + 8
}

/// `G{U}`: the induced subgraph on `set` (local ids in order of `set`) with a
/// self-loop at every vertex restoring its degree in `g`.
pub fn padded_induced(g: &DynamicGraph, set: &[VertexId]) -> DynamicGraph {
    let mut h = g.induced(set);
    let mut next = g.next_edge_id().0.max(h.next_edge_id().0);
    for (i, &v) in set.iter().enumerate() {
        let missing = g.degree(v) - h.degree(VertexId(i));
        if missing > 1e-12 * g.degree(v).max(1.0) {
            h.insert_edge_with_id(EdgeId(next), VertexId(i), VertexId(i), missing).expect("fresh id");
            next += 1;
        }
    }
    h.reset_origin();
    h
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexPartition {
    pub parts: Vec<Vec<VertexId>>,
    pub crossing: Vec<EdgeId>,
    /// Certificate of the padded graph `G{V_i}` for each part.
    pub certificates: Vec<Certificate>,
}

impl VertexPartition {
    pub fn crossing_weight(&self, g: &DynamicGraph) -> f64 {
        self.crossing.iter().map(|&id| g.edge(id).map_or(0.0, |e| e.w)).sum()
    }
}

/// Splits `V` along low-conductance cuts of the padded induced graphs until
/// every part certifies `Φ(G{V_i}) ≥ φ`.
pub fn decompose_base(g: &DynamicGraph, phi: f64) -> Result<VertexPartition> {
    check_phi(phi)?;
    let mut parts = Vec::new();
    let mut certificates = Vec::new();
    let mut stack: Vec<Vec<VertexId>> = if g.n() == 0 { Vec::new() } else { vec![g.vertices().collect()] };
    while let Some(set) = stack.pop() {
        let padded = padded_induced(g, &set);
        let (cert, witness) = if set.len() <= CERT_EXACT_LIMIT {
            let c = exact_conductance(&padded)?;
            (Certificate { conductance: c.value, exact: true, cheeger_lower: None }, c.witness)
        } else {
            let c = sampled_conductance(&padded, SAMPLED_CUTS, &mut crate::rng(set.len() as u64));
            let lower = normalized_lambda2(&padded) / 2.0;
            (Certificate { conductance: c.value, exact: false, cheeger_lower: Some(lower) }, c.witness)
        };
        if cert.certifies(phi) || witness.is_empty() {
            parts.push(set);
            certificates.push(cert);
            continue;
        }
        let mut inside = vec![false; set.len()];
        for v in &witness {
            inside[v.0] = true;
        }
        let (a, b): (Vec<_>, Vec<_>) = set.iter().enumerate().partition(|(i, _)| inside[*i]);
        stack.push(b.into_iter().map(|(_, &v)| v).collect());
        stack.push(a.into_iter().map(|(_, &v)| v).collect());
    }
    let mut part_of = vec![usize::MAX; g.n()];
    for (i, p) in parts.iter().enumerate() {
        for v in p {
            part_of[v.0] = i;
        }
    }
    let crossing = g.edges().filter(|(_, e)| part_of[e.u.0] != part_of[e.v.0]).map(|(id, _)| id).collect();
    Ok(VertexPartition { parts, crossing, certificates })
}

/// An edge-induced piece of a decomposition. `graph` uses local vertex ids
/// (`vertices[i]` is local vertex `i`) and keeps the global edge ids.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Cluster {
    pub vertices: Vec<VertexId>,
    pub graph: DynamicGraph,
    pub certificate: Certificate,
}

impl Cluster {
    /// Cluster on the endpoints of `ids`.
    pub fn from_edges(g: &DynamicGraph, ids: &[EdgeId]) -> Cluster {
        let graph_edges: Vec<_> = ids.iter().map(|&id| (id, *g.edge(id).expect("edge of g"))).collect();
        let vertices: Vec<VertexId> =
            graph_edges.iter().flat_map(|(_, e)| [e.u, e.v]).collect::<BTreeSet<_>>().into_iter().collect();
        let graph = local_graph(&vertices, graph_edges.iter().map(|(id, e)| (*id, e.u, e.v, e.w)));
        let certificate = certify(&graph);
        Cluster { vertices, graph, certificate }
    }

    pub fn local_of(&self, v: VertexId) -> Option<VertexId> {
        self.vertices.binary_search(&v).ok().map(VertexId)
    }

    pub fn global_of(&self, v: VertexId) -> VertexId {
        self.vertices[v.0]
    }

    pub fn edge_ids(&self) -> Vec<EdgeId> {
        self.graph.edge_ids()
    }
}

/// Graph on `vertices` (sorted) built from globally numbered edges.
pub fn local_graph<I>(vertices: &[VertexId], edges: I) -> DynamicGraph
where
    I: IntoIterator<Item = (EdgeId, VertexId, VertexId, f64)>,
{
    let local = |v: VertexId| vertices.binary_search(&v).expect("endpoint in vertex set");
    DynamicGraph::from_edges_with_ids(vertices.len(), edges.into_iter().map(|(id, u, v, w)| (id, local(u), local(v), w)))
        .expect("edges come from a valid graph")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdgeDecomposition {
    pub clusters: Vec<Cluster>,
    pub rounds: usize,
}

impl EdgeDecomposition {
    pub fn vertex_total(&self) -> usize {
        self.clusters.iter().map(|c| c.vertices.len()).sum()
    }
}

/// Edges inside each part of `partition`, grouped per part (parts without
/// internal edges are skipped).
fn intra_part_edges(g: &DynamicGraph, partition: &VertexPartition) -> Vec<Vec<EdgeId>> {
    let mut part_of = vec![usize::MAX; g.n()];
    for (i, p) in partition.parts.iter().enumerate() {
        for v in p {
            part_of[v.0] = i;
        }
    }
    let mut groups = vec![Vec::new(); partition.parts.len()];
    for (id, e) in g.edges() {
        if part_of[e.u.0] == part_of[e.v.0] {
            groups[part_of[e.u.0]].push(id);
        }
    }
    groups.into_iter().filter(|grp| !grp.is_empty()).collect()
}

/// Decomposes the edges of `g` into edge-disjoint φ-expanders by repeatedly
/// partitioning the graph of still-unassigned (crossing) edges.
pub fn decompose_edges(g: &DynamicGraph, phi: f64) -> Result<EdgeDecomposition> {
    check_phi(phi)?;
    let budget = round_budget(g.m());
    let mut rest = g.clone();
    rest.reset_origin();
    let mut clusters = Vec::new();
    let mut rounds = 0;
    while rest.m() > 0 {
        rounds += 1;
        if rounds > budget {
            return Err(Error::RecursionBudgetExceeded { rounds: budget });
        }
        let partition = decompose_base(&rest, phi)?;
        for ids in intra_part_edges(&rest, &partition) {
            clusters.push(Cluster::from_edges(&rest, &ids));
        }
        let crossing: BTreeSet<EdgeId> = partition.crossing.iter().copied().collect();
        if crossing.len() == rest.m() {
            return Err(Error::RecursionBudgetExceeded { rounds });
        }
        rest = rest.edge_subgraph(|id, _| crossing.contains(&id));
    }
    Ok(EdgeDecomposition { clusters, rounds })
}

/// One vertex peeled by the min-degree decomposition: its remaining edges
/// moved from level `level` to `level + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeelStep {
    pub level: usize,
    pub vertex: VertexId,
    pub moved: usize,
}

/// Cluster of the min-degree decomposition with its degree-split companion.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UniformCluster {
    pub cluster: Cluster,
    pub level: usize,
    /// Degree-split version of `cluster.graph` (local ids of the cluster).
    pub companion: DynamicGraph,
    pub map: ContractionMap,
    /// Split threshold used for the companion.
    pub delta: usize,
    pub min_degree: f64,
    pub edge_count: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UniformDecomposition {
    pub clusters: Vec<UniformCluster>,
    pub peel_trace: Vec<PeelStep>,
    pub max_degree: f64,
}

impl UniformDecomposition {
    pub fn vertex_total(&self) -> usize {
        self.clusters.iter().map(|c| c.cluster.vertices.len()).sum()
    }
}

/// Split threshold for a cluster: `max(9, ⌈min deg / φ⌉)`.
pub fn companion_delta(min_degree: f64, phi: f64) -> usize {
    ((min_degree / phi - 1e-9).ceil() as usize).max(9)
}

pub fn build_uniform_cluster(cluster: Cluster, level: usize, phi: f64) -> Result<UniformCluster> {
    let min_degree = cluster.graph.min_degree();
    let delta = companion_delta(min_degree, phi);
    let (companion, map) = delta_reduce(&cluster.graph, delta)?;
    let edge_count = cluster.graph.m();
    Ok(UniformCluster { cluster, level, companion, map, delta, min_degree, edge_count })
}

/// Min-degree decomposition: at level `k` vertices of degree below
/// `Δ/2^k` are peeled and their edges deferred to level `k+1`; the rest is
/// partitioned and the intra-part edges become clusters, repeating until
/// the level is empty. Each cluster gets a degree-split companion.
pub fn decompose_uniform(g: &DynamicGraph, phi: f64) -> Result<UniformDecomposition> {
    check_phi(phi)?;
    if !g.is_unweighted() {
        return Err(Error::WeightedInput);
    }
    let budget = round_budget(g.m());
    let max_degree = g.max_degree();
    let mut level_edges: BTreeSet<EdgeId> = g.edge_ids().into_iter().collect();
    let mut clusters = Vec::new();
    let mut peel_trace = Vec::new();
    let mut level = 0;
    while !level_edges.is_empty() {
        let threshold = max_degree / 2f64.powi(level as i32);
        let mut cur = g.edge_subgraph(|id, _| level_edges.contains(&id));
        let mut deferred = BTreeSet::new();
        let mut rounds = 0;
        loop {
            let mut queue: Vec<VertexId> = cur.vertices().filter(|&v| cur.degree(v) > 0.0).collect();
            queue.reverse();
            while let Some(v) = queue.pop() {
                if cur.degree(v) <= 0.0 || cur.degree(v) >= threshold {
                    continue;
                }
                let ids: Vec<EdgeId> = cur.incident(v).collect();
                for &id in &ids {
                    let e = cur.delete_edge(id)?;
                    deferred.insert(id);
                    let y = e.other(v);
                    if y != v && cur.degree(y) > 0.0 && cur.degree(y) < threshold {
                        queue.push(y);
                    }
                }
                peel_trace.push(PeelStep { level, vertex: v, moved: ids.len() });
            }
            if cur.m() == 0 {
                break;
            }
            rounds += 1;
            if rounds > budget {
                return Err(Error::RecursionBudgetExceeded { rounds: budget });
            }
            let partition = decompose_base(&cur, phi)?;
            let groups = intra_part_edges(&cur, &partition);
            if groups.is_empty() {
                return Err(Error::RecursionBudgetExceeded { rounds });
            }
            for ids in groups {
                let cluster = Cluster::from_edges(&cur, &ids);
                for &id in &ids {
                    cur.delete_edge(id)?;
                }
                clusters.push(build_uniform_cluster(cluster, level, phi)?);
            }
        }
        level_edges = deferred;
        level += 1;
    }
    Ok(UniformDecomposition { clusters, peel_trace, max_degree })
}
