//! Shared fixtures for the benchmarks.

use gptd_core::construction::{build, ConstructionOutput};
use gptd_core::verifier::random_systems;
use gptd_core::{IndependenceSystem, IndexSubset};

/// Fixed-seed random systems on `[n]`.
pub fn systems(n: usize, count: usize) -> Vec<IndependenceSystem> {
    random_systems(n, count, 1000 + n as u64).expect("n within range")
}

/// The system on `[n]` whose only circuit is the whole ground set.
pub fn one_circuit(n: usize) -> IndependenceSystem {
    let full = IndexSubset::full(n).expect("n within range");
    let maximal: Vec<_> = (1..=n).map(|j| full.without(j)).collect();
    IndependenceSystem::from_maximal(n, &maximal).expect("valid system")
}

pub fn built(system: &IndependenceSystem) -> ConstructionOutput {
    build(system).expect("construction")
}
