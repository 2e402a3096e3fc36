//! Spanners and spectral sparsifiers derived from expander cut sparsifiers,
//! plus oblivious spectral sampling.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DynamicGraph, EdgeId};
use crate::output::{ProblemKind, SparsifierOutput};
use crate::proactive::subset_sample;
use crate::verify::{verify_spectral, VerificationReport};

/// Stretch constant of the spanner bound.
pub const SPANNER_C: f64 = 100.0;

/// Stretch bound `c·α·ln(α·m)/φ` for the unweighted edge set of an
/// `α`-approximate cut sparsifier of an `m`-edge `φ`-expander.
pub fn spanner_bound(alpha: f64, m: usize, phi: f64) -> f64 {
    SPANNER_C * alpha * (alpha * m.max(2) as f64).ln().max(1.0) / phi
}

/// The sparsifier's edge set with unit weights, ids kept.
pub fn spanner_of(h: &SparsifierOutput) -> Result<DynamicGraph> {
    if h.certificate.is_none() {
        return Err(Error::MissingCertificate);
    }
    let edges: Vec<_> = h.graph.edges().map(|(id, e)| (id, e.u.0, e.v.0, 1.0)).collect();
    DynamicGraph::from_edges_with_ids(h.graph.n(), edges)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralConfig {
    /// Constant `c` in `p = min(1, (c·ln n/(ε·φ²))²·2/Δ)`.
    pub c_sample: f64,
}

/// Sampling constant in the proof of the spectral sampling bound.
pub const ASYMPTOTIC_SPECTRAL_C: f64 = 24.0;

/// Desk sampling constant.
pub const DESK_SPECTRAL_C: f64 = 0.07;

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig { c_sample: DESK_SPECTRAL_C }
    }
}

impl SpectralConfig {
    pub fn asymptotic() -> Self {
        SpectralConfig { c_sample: ASYMPTOTIC_SPECTRAL_C }
    }

    pub fn probability(&self, n: usize, eps: f64, phi: f64, delta: f64) -> f64 {
        let a = self.c_sample * (n.max(2) as f64).ln() / (eps * phi * phi);
        (a * a * 2.0 / delta).min(1.0)
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 0.5 {
        Ok(())
    } else {
        Err(Error::BadEpsilon { eps, range: "(0, 1/2]" })
    }
}

/// Samples every edge outside `pruned` with probability `p` at weight
/// `1/p` and keeps `pruned` at its own weight.
pub fn spectral_sample<R: rand::Rng + ?Sized>(
    g: &DynamicGraph,
    eps: f64,
    phi: f64,
    delta: f64,
    pruned: &BTreeSet<EdgeId>,
    cfg: SpectralConfig,
    rng: &mut R,
) -> Result<SparsifierOutput> {
    check_eps(eps)?;
    let p = cfg.probability(g.n(), eps, phi, delta);
    let universe: Vec<EdgeId> = g.edge_ids().into_iter().filter(|id| !pruned.contains(id)).collect();
    let picked = subset_sample(universe.len(), p, rng);
    let mut edges: Vec<(EdgeId, usize, usize, f64)> = picked
        .into_iter()
        .map(|i| {
            let e = g.edge(universe[i]).expect("present");
            (universe[i], e.u.0, e.v.0, e.w / p)
        })
        .collect();
    for &id in pruned {
        if let Some(e) = g.edge(id) {
            edges.push((id, e.u.0, e.v.0, e.w));
        }
    }
    let graph = DynamicGraph::from_edges_with_ids(g.n(), edges)?;
    Ok(SparsifierOutput::new(ProblemKind::Spectral, eps, graph).with_certificate(phi))
}

/// Decremental graph answering spectral queries with a fresh independent
/// sample each call.
#[derive(Clone, Debug)]
pub struct SpectralQuery {
    graph: DynamicGraph,
    pruned: BTreeSet<EdgeId>,
    eps: f64,
    phi: f64,
    delta: f64,
    cfg: SpectralConfig,
}

impl SpectralQuery {
    pub fn new(g: &DynamicGraph, eps: f64, phi: f64, cfg: SpectralConfig) -> Result<Self> {
        check_eps(eps)?;
        Ok(SpectralQuery { graph: g.clone(), pruned: BTreeSet::new(), eps, phi, delta: g.min_degree(), cfg })
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    pub fn pruned(&self) -> &BTreeSet<EdgeId> {
        &self.pruned
    }

    /// Deletes `id` and moves `pruned_now` into the always-kept overlay.
    pub fn delete(&mut self, id: EdgeId, pruned_now: &[EdgeId]) -> Result<()> {
        self.graph.delete_edge(id)?;
        self.pruned.remove(&id);
        for &p in pruned_now {
            if self.graph.contains_edge(p) {
                self.pruned.insert(p);
            }
        }
        Ok(())
    }

    pub fn query<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Result<SparsifierOutput> {
        spectral_sample(&self.graph, self.eps, self.phi, self.delta, &self.pruned, self.cfg, rng)
    }
}

/// Advertised spectral bound `c·(γ/φ)^e` for a `γ`-approximate cut
/// sparsifier of a `φ`-expander.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralBound {
    pub c: f64,
    pub exponent: f64,
}

impl Default for SpectralBound {
    fn default() -> Self {
        SpectralBound { c: 4.0, exponent: 3.0 }
    }
}

impl SpectralBound {
    pub fn value(&self, gamma: f64, phi: f64) -> f64 {
        self.c * (gamma / phi).powf(self.exponent)
    }
}

#[derive(Clone, Debug)]
pub struct SpectralRelabel {
    pub output: SparsifierOutput,
    pub advertised: f64,
    pub measured: VerificationReport,
}

/// Relabels a cut sparsifier of an expander as a spectral sparsifier with
/// the advertised bound, and attaches the measured pencil extremes.
pub fn certify_spectral_from_cut(
    g: &DynamicGraph,
    h: &SparsifierOutput,
    gamma: f64,
    bound: SpectralBound,
) -> Result<SpectralRelabel> {
    let phi = h.certificate.ok_or(Error::MissingCertificate)?;
    let advertised = bound.value(gamma, phi);
    let measured = verify_spectral(g, &h.graph)?;
    let output = SparsifierOutput { kind: ProblemKind::Spectral, eps: advertised.ln().max(0.0), graph: h.graph.clone(), certificate: Some(phi) };
    Ok(SpectralRelabel { output, advertised, measured })
}
