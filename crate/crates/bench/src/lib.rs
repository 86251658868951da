//! Shared fixtures for the benchmarks.

use gpool::sbm::{generate_sbm, SbmConfig};
use gpool::Graph;

/// Sparse SBM with average degree around 12.
pub fn sbm(nodes: usize, seed: u64) -> Graph {
    let classes = 5;
    let block = (nodes / classes).max(1) as f64;
    generate_sbm(&SbmConfig {
        nodes,
        classes,
        p_in: (10.0 / block).min(1.0),
        p_out: (2.0 / nodes as f64).min(1.0),
        feature_dim: 4,
        feature_shift: 1.0,
        seed,
    })
    .expect("valid SBM parameters")
}

/// The 400-node community graph used for clustering runs.
pub fn community(seed: u64) -> Graph {
    generate_sbm(&SbmConfig {
        seed,
        ..Default::default()
    })
    .expect("valid SBM parameters")
}
