//! Graph pooling decomposed into Select, Reduce, Connect and Lift.
//!
//! A pooler maps a graph `(A, X)` with `N` nodes onto a coarser graph
//! `(A′, X′)` with `K` supernodes. Select builds the assignment matrix
//! `S ∈ R^{N×K}`; Reduce computes `X′` (e.g. `SᵀX`); Connect computes `A′`
//! (e.g. `SᵀAS`, or a Kron reduction); Lift maps supernode features back
//! (`S X′`). Any selector can be combined with any compatible connector
//! through [`Pooler`].
//!
//! Besides the operators the crate provides the auxiliary objectives of
//! dense soft-clustering poolers with analytic gradients
//! ([`objectives`]), a solver that clusters a graph by optimizing those
//! objectives directly ([`solver`]), a pre-coarsening cache with a binary
//! on-disk format ([`pipeline`]) and clustering metrics ([`metrics`]).

pub mod batch;
pub mod error;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod objectives;
pub mod pipeline;
pub mod pool;
pub mod rcl;
pub mod sbm;
pub mod select;
pub mod solver;
pub mod sparse;
pub mod timing;

pub use batch::{global_pool, to_dense_batch, to_sparse_batch, DenseBatch, Readout, Reduce, SparseBatch};
pub use error::{PoolError, Result};
pub use graph::{Graph, LaplacianKind};
pub use pool::{Capabilities, Connector, Pooler, PoolingOutput};
pub use select::{Assignment, SelectOutput, SelectorConfig, SelectorKind};
pub use sparse::CooMatrix;
