//! Shared fixtures for the benchmarks.

use dynsparse::gen::{cycle_union, random_trace, random_weighted};
use dynsparse::{DynamicGraph, UpdateEvent};

/// Weighted graph with a mixed trace over it.
pub fn weighted_workload(n: usize, m: usize, events: usize, seed: u64) -> (DynamicGraph, Vec<UpdateEvent>) {
    let mut rng = dynsparse::rng(seed);
    let g = random_weighted(n, m, 2f64.exp(), &mut rng);
    let trace = random_trace(&g, events, 0.5, 2f64.exp(), &mut rng).expect("n ≥ 2");
    (g, trace)
}

/// Regular expander as a union of `k` Hamiltonian cycles.
pub fn expander(n: usize, k: usize, seed: u64) -> DynamicGraph {
    cycle_union(n, k, &mut dynsparse::rng(seed))
}
