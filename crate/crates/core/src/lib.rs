//! Dynamic sparsifiers for cut, spectral and spanner problems, built on
//! expander decompositions that tolerate adaptive adversaries.

pub mod error;
pub mod graph;
pub mod io;
pub mod output;
pub mod proactive;
pub mod reduction;
pub mod adversary;
pub mod decomp;
pub mod derive;
pub mod dyndecomp;
pub mod expander;
pub mod flow;
pub mod gen;
pub mod prune;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{ChangeSet, DynamicGraph, Edge, EdgeId, UpdateEvent, UpdateKind, VertexId};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic random source used throughout the crate.
pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
