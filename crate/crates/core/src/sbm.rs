//! Stochastic block model generator with class-shifted Gaussian features.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{PoolError, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq)]
pub struct SbmConfig {
    pub nodes: usize,
    pub classes: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub feature_dim: usize,
    pub feature_shift: f64,
    pub seed: u64,
}

impl Default for SbmConfig {
    fn default() -> Self {
        Self {
            nodes: 400,
            classes: 5,
            p_in: 0.3,
            p_out: 0.02,
            feature_dim: 2,
            feature_shift: 3.0,
            seed: 0,
        }
    }
}

/// Block id of every node: `⌊N/C⌋` nodes per block, remainder to the last.
pub fn block_labels(nodes: usize, classes: usize) -> Vec<usize> {
    let size = nodes / classes;
    (0..nodes)
        .map(|i| i.checked_div(size).map_or(classes - 1, |b| b.min(classes - 1)))
        .collect()
}

/// Samples an undirected SBM graph. Each pair inside a block is connected
/// with probability `p_in`, across blocks with `p_out`. Node features are
/// `N(μ_c, I)` with `μ_c = shift·e_{c mod F}` and labels are block ids.
pub fn generate_sbm(cfg: &SbmConfig) -> Result<Graph> {
    let valid = |p: f64| (0.0..=1.0).contains(&p);
    if !valid(cfg.p_in) || !valid(cfg.p_out) || cfg.p_out > cfg.p_in {
        return Err(PoolError::InvalidArgument(format!(
            "need 0 <= p_out <= p_in <= 1, got p_in = {}, p_out = {}",
            cfg.p_in, cfg.p_out
        )));
    }
    if cfg.classes == 0 || cfg.nodes == 0 {
        return Err(PoolError::InvalidArgument("nodes and classes must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let labels = block_labels(cfg.nodes, cfg.classes);
    let mut edges = Vec::new();
    for i in 0..cfg.nodes {
        for j in i + 1..cfg.nodes {
            let p = if labels[i] == labels[j] { cfg.p_in } else { cfg.p_out };
            if rng.random::<f64>() < p {
                edges.push((i, j, 1.0));
                edges.push((j, i, 1.0));
            }
        }
    }
    let f = cfg.feature_dim;
    let mut x = DMatrix::zeros(cfg.nodes, f);
    for i in 0..cfg.nodes {
        for c in 0..f {
            let z: f64 = StandardNormal.sample(&mut rng);
            let mean = if labels[i] % f == c { cfg.feature_shift } else { 0.0 };
            x[(i, c)] = mean + z;
        }
    }
    Graph::new(cfg.nodes, edges, x, Some(labels))
}
