//! Composed poolers: any selector with any compatible connector.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::batch::Reduce;
use crate::error::{PoolError, Result};
use crate::graph::Graph;
use crate::rcl::{connect_kron, connect_sparse, reduce, DEFAULT_SPARSIFY_EPS};
use crate::select::{SelectOutput, SelectorConfig};
use crate::sparse::CooMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Connector {
    /// `A′ = SᵀAS`.
    Sparse { remove_self_loops: bool },
    /// Schur complement of the Laplacian onto the kept nodes.
    Kron { sparsify_eps: f64 },
}

impl Default for Connector {
    fn default() -> Self {
        Self::Sparse {
            remove_self_loops: false,
        }
    }
}

impl Connector {
    pub fn kron() -> Self {
        Self::Kron {
            sparsify_eps: DEFAULT_SPARSIFY_EPS,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Sparse { .. } => "sparse",
            Self::Kron { .. } => "kron",
        }
    }

    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut b = self.name().as_bytes().to_vec();
        b.push(0);
        match *self {
            Self::Sparse { remove_self_loops } => b.push(remove_self_loops as u8),
            Self::Kron { sparsify_eps } => b.extend_from_slice(&sparsify_eps.to_bits().to_le_bytes()),
        }
        b
    }

    pub fn connect(&self, g: &Graph, so: &SelectOutput) -> Result<CooMatrix> {
        match *self {
            Self::Sparse { remove_self_loops } => connect_sparse(g, so, remove_self_loops),
            Self::Kron { sparsify_eps } => {
                let kept = so.kept_nodes.as_deref().ok_or(PoolError::IncompatibleConnector {
                    selector: "partition",
                    connector: "kron",
                })?;
                connect_kron(g, kept, sparsify_eps)
            }
        }
    }
}

/// Result of a full pooling pass.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolingOutput {
    pub x_pooled: DMatrix<f64>,
    pub adj_pooled: CooMatrix,
    pub batch_pooled: Vec<usize>,
    pub select: SelectOutput,
    /// Auxiliary losses; empty for the deterministic selectors here.
    pub losses: BTreeMap<String, f64>,
}

/// Capability flags of a pooling operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Capabilities {
    pub is_sparse: bool,
    pub is_trainable: bool,
    pub has_loss: bool,
}

/// A selector, a connector and a reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct Pooler {
    pub selector: SelectorConfig,
    pub connector: Connector,
    pub reduce: Reduce,
}

impl Pooler {
    pub fn new(selector: SelectorConfig, connector: Connector) -> Result<Self> {
        let p = Self {
            selector,
            connector,
            reduce: Reduce::Mean,
        };
        p.check_compatible()?;
        Ok(p)
    }

    pub fn check_compatible(&self) -> Result<()> {
        if matches!(self.connector, Connector::Kron { .. }) && !self.selector.kind.keeps_nodes() {
            return Err(PoolError::IncompatibleConnector {
                selector: self.selector.kind.name(),
                connector: "kron",
            });
        }
        Ok(())
    }

    pub fn capabilities(&self) -> Capabilities {
        Capabilities {
            is_sparse: self.selector.kind.is_sparse(),
            is_trainable: self.selector.kind.is_trainable(),
            has_loss: false,
        }
    }

    /// 64-bit FNV-1a over the selector and connector configuration.
    pub fn fingerprint(&self) -> u64 {
        use std::hash::Hasher;
        let mut h = fnv::FnvHasher::default();
        h.write(&self.selector.canonical_bytes());
        h.write(&self.connector.canonical_bytes());
        h.finish()
    }

    /// Select followed by Connect.
    pub fn select_connect(&self, g: &Graph) -> Result<(SelectOutput, CooMatrix)> {
        self.check_compatible()?;
        let so = self.selector.select(g)?;
        let adj = self.connector.connect(g, &so)?;
        Ok((so, adj))
    }

    /// Reduce given a precomputed selection and pooled adjacency.
    pub fn finish(&self, x: &DMatrix<f64>, so: SelectOutput, adj: CooMatrix) -> Result<PoolingOutput> {
        let x_pooled = reduce(x, &so, self.reduce)?;
        Ok(PoolingOutput {
            batch_pooled: vec![0; so.num_clusters],
            x_pooled,
            adj_pooled: adj,
            select: so,
            losses: BTreeMap::new(),
        })
    }

    pub fn pool(&self, g: &Graph) -> Result<PoolingOutput> {
        let (so, adj) = self.select_connect(g)?;
        self.finish(g.features(), so, adj)
    }
}
