//! Pre-coarsening and caching for non-trainable poolers.
//!
//! Select and Connect of a deterministic pooler depend only on the graph
//! topology, so they can be computed once per graph, written to a TGPC
//! file and re-assembled into mini-batches at load time. Only Reduce runs
//! per batch.

mod cached;
pub mod format;

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::batch::{to_sparse_batch, Reduce, SparseBatch};
use crate::error::{PoolError, Result};
use crate::graph::Graph;
use crate::pool::Pooler;
use crate::rcl::reduce;
use crate::select::{Assignment, SelectOutput};
use crate::sparse::CooMatrix;

pub use cached::CachedPooler;
pub use format::CacheRecord;

/// Computes the record for one graph. Non-convergence of an iterative
/// selector becomes an N/C record; other errors propagate.
pub fn precoarsen_graph(pooler: &Pooler, graph_id: u64, g: &Graph) -> Result<CacheRecord> {
    let pooled = match pooler.select_connect(g) {
        Ok(p) => Some(p),
        Err(PoolError::NoConvergence(_) | PoolError::PowerIterationNoConvergence(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(CacheRecord {
        graph_id,
        fingerprint: pooler.fingerprint(),
        pooled,
    })
}

/// Encodes the whole dataset. Work is spread over `jobs` threads and the
/// records are emitted in graph order, so the bytes do not depend on
/// scheduling.
pub fn precoarsen_to_bytes(graphs: &[Graph], pooler: &Pooler, jobs: usize) -> Result<Vec<u8>> {
    if pooler.selector.kind.is_trainable() && pooler.selector.kind != crate::select::SelectorKind::Topk {
        return Err(PoolError::InvalidArgument(format!(
            "selector `{}` is trainable and cannot be pre-coarsened",
            pooler.selector.kind.name()
        )));
    }
    pooler.check_compatible()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| PoolError::InvalidArgument(e.to_string()))?;
    let records: Vec<Vec<u8>> = pool.install(|| {
        graphs
            .par_iter()
            .enumerate()
            .map(|(id, g)| precoarsen_graph(pooler, id as u64, g).map(|r| format::encode_record(&r)))
            .collect::<Result<_>>()
    })?;
    Ok(format::encode_file(records.into_iter()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrecoarsenSummary {
    pub records: usize,
    pub not_converged: usize,
    pub bytes: usize,
}

/// Pre-coarsens `graphs` and writes the TGPC file to `path`.
pub fn precoarsen_dataset(
    graphs: &[Graph],
    pooler: &Pooler,
    path: impl AsRef<Path>,
    jobs: usize,
) -> Result<PrecoarsenSummary> {
    let bytes = precoarsen_to_bytes(graphs, pooler, jobs)?;
    let not_converged = format::decode_file(&bytes)?
        .iter()
        .filter(|r| r.pooled.is_none())
        .count();
    fs::write(path, &bytes)?;
    Ok(PrecoarsenSummary {
        records: graphs.len(),
        not_converged,
        bytes: bytes.len(),
    })
}

/// A decoded cache whose fingerprint has been checked against a pooler.
#[derive(Debug, Clone)]
pub struct PoolCache {
    fingerprint: u64,
    records: Vec<CacheRecord>,
}

impl PoolCache {
    pub fn from_bytes(bytes: &[u8], pooler: &Pooler) -> Result<Self> {
        let records = format::decode_file(bytes)?;
        let expected = pooler.fingerprint();
        for (i, r) in records.iter().enumerate() {
            if r.fingerprint != expected {
                return Err(PoolError::StaleCache {
                    expected,
                    found: r.fingerprint,
                });
            }
            if r.graph_id != i as u64 {
                return Err(PoolError::CorruptRecord {
                    index: i,
                    reason: format!("graph id {} out of order", r.graph_id),
                });
            }
        }
        Ok(Self {
            fingerprint: expected,
            records,
        })
    }

    pub fn open(path: impl AsRef<Path>, pooler: &Pooler) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?, pooler)
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[CacheRecord] {
        &self.records
    }

    /// Select and Connect result of graph `id`.
    pub fn get(&self, id: usize) -> Result<(&SelectOutput, &CooMatrix)> {
        let rec = self.records.get(id).ok_or(PoolError::MissingRecord(id))?;
        match &rec.pooled {
            Some((so, adj)) => Ok((so, adj)),
            None => Err(PoolError::NotConvergedRecord(id)),
        }
    }
}

/// A mini-batch with its pre-coarsened structure assembled block-diagonally.
#[derive(Debug, Clone)]
pub struct PooledBatch {
    pub base: SparseBatch,
    pub select_block: SelectOutput,
    pub adj_pooled_union: CooMatrix,
    pub batch_pooled: Vec<usize>,
    /// Cluster offset of each graph (prefix sums of `K_b`).
    pub cluster_offsets: Vec<usize>,
}

impl PooledBatch {
    /// Reduce over the whole batch.
    pub fn reduce(&self, aggr: Reduce) -> Result<DMatrix<f64>> {
        reduce(self.base.union.features(), &self.select_block, aggr)
    }
}

/// Block-diagonal union of per-graph selections.
pub fn block_diagonal_select(parts: &[&SelectOutput]) -> SelectOutput {
    let n: usize = parts.iter().map(|s| s.num_nodes).sum();
    let k: usize = parts.iter().map(|s| s.num_clusters).sum();
    let all_sparse = parts.iter().all(|s| s.is_sparse());
    let mut node_off = 0;
    let mut cluster_off = 0;
    let assignment = if all_sparse {
        let mut entries = Vec::new();
        for so in parts {
            if let Assignment::Sparse(e) = &so.assignment {
                entries.extend(e.iter().map(|&(i, c, v)| (i + node_off, c + cluster_off, v)));
            }
            node_off += so.num_nodes;
            cluster_off += so.num_clusters;
        }
        Assignment::Sparse(entries)
    } else {
        let mut m = DMatrix::zeros(n, k);
        for so in parts {
            m.view_mut((node_off, cluster_off), (so.num_nodes, so.num_clusters))
                .copy_from(&so.to_dense());
            node_off += so.num_nodes;
            cluster_off += so.num_clusters;
        }
        Assignment::Dense(m)
    };
    let kept_nodes = parts.iter().all(|s| s.kept_nodes.is_some()).then(|| {
        let mut off = 0;
        let mut kept = Vec::new();
        for so in parts {
            kept.extend(so.kept_nodes.as_ref().expect("checked").iter().map(|&v| v + off));
            off += so.num_nodes;
        }
        kept
    });
    let extra = parts.iter().any(|s| s.extra.is_some()).then(|| {
        parts
            .iter()
            .flat_map(|s| (0..s.num_nodes).map(move |i| s.gate(i)))
            .collect()
    });
    SelectOutput {
        num_nodes: n,
        num_clusters: k,
        assignment,
        kept_nodes,
        extra,
    }
}

/// Assembles the cached structures of `ids` into one batch. The result is
/// identical to pooling each graph directly and stacking the outputs.
pub fn load_and_collate(cache: &PoolCache, graphs: &[Graph], ids: &[usize]) -> Result<PooledBatch> {
    let mut selects = Vec::with_capacity(ids.len());
    let mut adjs = Vec::with_capacity(ids.len());
    let mut members = Vec::with_capacity(ids.len());
    for &id in ids {
        let (so, adj) = cache.get(id)?;
        let g = graphs.get(id).ok_or(PoolError::MissingRecord(id))?;
        if g.num_nodes() != so.num_nodes {
            return Err(PoolError::CorruptRecord {
                index: id,
                reason: format!(
                    "record covers {} nodes, graph has {}",
                    so.num_nodes,
                    g.num_nodes()
                ),
            });
        }
        selects.push(so);
        adjs.push(adj);
        members.push(g);
    }
    let base = to_sparse_batch(&members)?;
    let mut batch_pooled = Vec::new();
    let mut cluster_offsets = Vec::with_capacity(ids.len());
    let mut off = 0;
    for (b, so) in selects.iter().enumerate() {
        cluster_offsets.push(off);
        batch_pooled.extend(std::iter::repeat_n(b, so.num_clusters));
        off += so.num_clusters;
    }
    Ok(PooledBatch {
        base,
        select_block: block_diagonal_select(&selects),
        adj_pooled_union: CooMatrix::block_diagonal(&adjs),
        batch_pooled,
        cluster_offsets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pool::Connector;
    use crate::select::{SelectorConfig, SelectorKind};

    fn graphs() -> Vec<Graph> {
        vec![
            Graph::undirected(4, &[(0, 1), (1, 2), (2, 3)]).unwrap(),
            Graph::undirected(3, &[(0, 1), (1, 2), (2, 0)]).unwrap(),
            Graph::undirected(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap(),
        ]
    }

    fn pooler(kind: SelectorKind) -> Pooler {
        Pooler::new(SelectorConfig::new(kind), Connector::default()).unwrap()
    }

    #[test]
    fn records_in_graph_order() {
        let p = pooler(SelectorKind::Graclus);
        let bytes = precoarsen_to_bytes(&graphs(), &p, 3).unwrap();
        let cache = PoolCache::from_bytes(&bytes, &p).unwrap();
        let ids: Vec<u64> = cache.records().iter().map(|r| r.graph_id).collect();
        assert_eq!(ids, vec![0, 1, 2]);
        assert_eq!(bytes, precoarsen_to_bytes(&graphs(), &p, 1).unwrap());
    }

    #[test]
    fn stale_fingerprint() {
        let p = pooler(SelectorKind::Kmis);
        let bytes = precoarsen_to_bytes(&graphs(), &p, 1).unwrap();
        let mut cfg = SelectorConfig::new(SelectorKind::Kmis);
        cfg.k = 2;
        let other = Pooler::new(cfg, Connector::default()).unwrap();
        assert!(matches!(
            PoolCache::from_bytes(&bytes, &other),
            Err(PoolError::StaleCache { .. })
        ));
    }

    #[test]
    fn collate_offsets() {
        let p = pooler(SelectorKind::Graclus);
        let gs = graphs();
        let cache = PoolCache::from_bytes(&precoarsen_to_bytes(&gs, &p, 1).unwrap(), &p).unwrap();
        // Graclus: P4 → 2 clusters, triangle → 2 clusters.
        let batch = load_and_collate(&cache, &gs, &[0, 1]).unwrap();
        assert_eq!(batch.batch_pooled, vec![0, 0, 1, 1]);
        assert_eq!(batch.cluster_offsets, vec![0, 2]);
        let single = load_and_collate(&cache, &gs, &[1]).unwrap();
        let (so, adj) = cache.get(1).unwrap();
        assert_eq!(&single.select_block, so);
        assert_eq!(&single.adj_pooled_union, adj);
    }

    #[test]
    fn not_converged_records_fail_fast() {
        let mut cfg = SelectorConfig::new(SelectorKind::Nmf);
        cfg.nmf_max_iters = 1;
        cfg.nmf_tol = 0.0;
        let p = Pooler::new(cfg, Connector::default()).unwrap();
        let gs = graphs();
        let cache = PoolCache::from_bytes(&precoarsen_to_bytes(&gs, &p, 2).unwrap(), &p).unwrap();
        assert!(cache.records().iter().all(|r| r.pooled.is_none()));
        assert!(matches!(
            load_and_collate(&cache, &gs, &[0]),
            Err(PoolError::NotConvergedRecord(0))
        ));
        assert!(matches!(
            load_and_collate(&cache, &gs, &[7]),
            Err(PoolError::MissingRecord(7))
        ));
    }
}
