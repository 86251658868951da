//! Mini-batch representations and the graph-level readout.
//!
//! Two layouts are supported: a padded dense batch where every graph is
//! zero-padded to the largest node count and tracked by a mask, and the
//! disjoint union of all graphs with a `batch` vector mapping nodes to
//! graphs. [`global_pool`] accepts either and reduces per graph.

use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{PoolError, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseBatch {
    pub max_nodes: usize,
    /// One `max_nodes × max_nodes` matrix per graph.
    pub adj: Vec<DMatrix<f64>>,
    /// One `max_nodes × F` matrix per graph.
    pub feat: Vec<DMatrix<f64>>,
    pub mask: Vec<Vec<bool>>,
}

impl DenseBatch {
    pub fn num_graphs(&self) -> usize {
        self.adj.len()
    }

    /// Recovers the adjacency and features of graph `b` by dropping the
    /// padded rows and columns.
    pub fn unpad(&self, b: usize) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.mask[b].iter().filter(|&&m| m).count();
        let adj = self.adj[b].view((0, 0), (n, n)).into_owned();
        let feat = self.feat[b].rows(0, n).into_owned();
        (adj, feat)
    }
}

#[derive(Debug, Clone)]
pub struct SparseBatch {
    pub union: Graph,
    /// Graph index of every node; non-decreasing.
    pub batch: Vec<usize>,
    pub num_graphs: usize,
    /// Node offset of each graph in the union (prefix sums of sizes).
    pub offsets: Vec<usize>,
}

fn shared_width(graphs: &[&Graph]) -> Result<usize> {
    let Some(first) = graphs.first() else {
        return Ok(0);
    };
    let f = first.num_features();
    for g in graphs {
        if g.num_features() != f {
            return Err(PoolError::FeatureWidthMismatch(f, g.num_features()));
        }
    }
    Ok(f)
}

pub fn to_dense_batch(graphs: &[&Graph]) -> Result<DenseBatch> {
    let f = shared_width(graphs)?;
    let max_nodes = graphs.iter().map(|g| g.num_nodes()).max().unwrap_or(0);
    let mut batch = DenseBatch {
        max_nodes,
        adj: Vec::with_capacity(graphs.len()),
        feat: Vec::with_capacity(graphs.len()),
        mask: Vec::with_capacity(graphs.len()),
    };
    for g in graphs {
        let n = g.num_nodes();
        let mut adj = DMatrix::zeros(max_nodes, max_nodes);
        for &(i, j, w) in g.edges() {
            adj[(i, j)] = w;
        }
        let mut feat = DMatrix::zeros(max_nodes, f);
        feat.rows_mut(0, n).copy_from(g.features());
        batch.adj.push(adj);
        batch.feat.push(feat);
        batch.mask.push((0..max_nodes).map(|i| i < n).collect());
    }
    Ok(batch)
}

pub fn to_sparse_batch(graphs: &[&Graph]) -> Result<SparseBatch> {
    let f = shared_width(graphs)?;
    let total: usize = graphs.iter().map(|g| g.num_nodes()).sum();
    let mut features = DMatrix::zeros(total, f);
    let mut batch = Vec::with_capacity(total);
    let mut offsets = Vec::with_capacity(graphs.len());
    let mut labels: Option<Vec<usize>> = graphs
        .iter()
        .all(|g| g.labels().is_some())
        .then(|| Vec::with_capacity(total));
    let mut offset = 0;
    for (b, g) in graphs.iter().enumerate() {
        offsets.push(offset);
        features.rows_mut(offset, g.num_nodes()).copy_from(g.features());
        batch.extend(std::iter::repeat_n(b, g.num_nodes()));
        if let (Some(l), Some(gl)) = (labels.as_mut(), g.labels()) {
            l.extend_from_slice(gl);
        }
        offset += g.num_nodes();
    }
    if graphs.is_empty() {
        labels = None;
    }
    Ok(SparseBatch {
        union: Graph::disjoint_union(graphs, features, labels),
        batch,
        num_graphs: graphs.len(),
        offsets,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduce {
    #[default]
    Sum,
    Mean,
    Max,
}

impl FromStr for Reduce {
    type Err = PoolError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" | "add" => Ok(Self::Sum),
            "mean" => Ok(Self::Mean),
            "max" => Ok(Self::Max),
            other => Err(PoolError::UnknownReduce(other.to_string())),
        }
    }
}

/// Input to [`global_pool`], in either batch layout.
#[derive(Debug, Clone, Copy)]
pub enum Readout<'a> {
    /// Padded features with their masks, one matrix per graph.
    Dense {
        feat: &'a [DMatrix<f64>],
        mask: &'a [Vec<bool>],
    },
    /// Stacked node features with the node-to-graph vector.
    Sparse {
        x: &'a DMatrix<f64>,
        batch: &'a [usize],
        num_graphs: usize,
    },
}

/// Per-graph sum, mean or max of node features, returned as `B × F`.
pub fn global_pool(input: Readout<'_>, reduce: Reduce) -> Result<DMatrix<f64>> {
    match input {
        Readout::Dense { feat, mask } => {
            let f = feat.first().map_or(0, |m| m.ncols());
            let mut out = DMatrix::zeros(feat.len(), f);
            for (b, (x, m)) in feat.iter().zip(mask).enumerate() {
                let rows = m.iter().enumerate().filter(|(_, &keep)| keep).map(|(i, _)| i);
                let row = segment_reduce(x, rows, reduce).ok_or(PoolError::EmptyGraphInBatch(b))?;
                out.row_mut(b).copy_from(&row);
            }
            Ok(out)
        }
        Readout::Sparse {
            x,
            batch,
            num_graphs,
        } => {
            assert_eq!(x.nrows(), batch.len(), "batch vector length mismatch");
            let mut out = DMatrix::zeros(num_graphs, x.ncols());
            let mut start = 0;
            for b in 0..num_graphs {
                let end = start + batch[start..].iter().take_while(|&&g| g == b).count();
                let row = segment_reduce(x, start..end, reduce)
                    .ok_or(PoolError::EmptyGraphInBatch(b))?;
                out.row_mut(b).copy_from(&row);
                start = end;
            }
            assert_eq!(start, batch.len(), "batch vector must be non-decreasing");
            Ok(out)
        }
    }
}

/// Reduces the given rows; `None` for an empty segment under mean or max.
fn segment_reduce(
    x: &DMatrix<f64>,
    rows: impl Iterator<Item = usize>,
    reduce: Reduce,
) -> Option<nalgebra::RowDVector<f64>> {
    let f = x.ncols();
    let mut acc = nalgebra::RowDVector::zeros(f);
    let mut count = 0usize;
    for i in rows {
        let r = x.row(i);
        if reduce == Reduce::Max && count == 0 {
            acc.copy_from(&r);
        } else if reduce == Reduce::Max {
            acc.zip_apply(&r, |a, b| *a = a.max(b));
        } else {
            acc += r;
        }
        count += 1;
    }
    match reduce {
        Reduce::Sum => Some(acc),
        _ if count == 0 => None,
        Reduce::Mean => Some(acc / count as f64),
        Reduce::Max => Some(acc),
    }
}
