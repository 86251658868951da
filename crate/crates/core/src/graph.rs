//! The immutable weighted graph type and its Laplacians.

use std::hash::Hasher;
use std::sync::OnceLock;

use fnv::FnvHasher;
use nalgebra::DMatrix;

use crate::error::{PoolError, Result};
use crate::sparse::CooMatrix;

/// A weighted graph with node features and optional node labels.
///
/// Edges are stored as a coalesced coordinate list sorted by `(src, dst)`.
/// Row offsets for neighbor scans are built on first use.
#[derive(Debug)]
pub struct Graph {
    adj: CooMatrix,
    features: DMatrix<f64>,
    labels: Option<Vec<usize>>,
    symmetric: bool,
    self_loops: bool,
    row_offsets: OnceLock<Vec<usize>>,
}

impl Clone for Graph {
    fn clone(&self) -> Self {
        Self {
            adj: self.adj.clone(),
            features: self.features.clone(),
            labels: self.labels.clone(),
            symmetric: self.symmetric,
            self_loops: self.self_loops,
            row_offsets: OnceLock::new(),
        }
    }
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.adj == other.adj && self.features == other.features && self.labels == other.labels
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplacianKind {
    Combinatorial,
    SymmetricNormalized,
}

impl Graph {
    /// Validates and coalesces an edge list into a graph. Duplicate
    /// `(src, dst)` pairs are merged by summing their weights.
    pub fn new(
        num_nodes: usize,
        edges: Vec<(usize, usize, f64)>,
        features: DMatrix<f64>,
        labels: Option<Vec<usize>>,
    ) -> Result<Self> {
        for &(s, d, w) in &edges {
            for index in [s, d] {
                if index >= num_nodes {
                    return Err(PoolError::IndexOutOfRange { index, num_nodes });
                }
            }
            if !w.is_finite() {
                return Err(PoolError::NonFiniteWeight { src: s, dst: d });
            }
        }
        if features.nrows() != num_nodes {
            return Err(PoolError::FeatureShapeMismatch {
                rows: features.nrows(),
                expected: num_nodes,
            });
        }
        if let Some(l) = &labels {
            if l.len() != num_nodes {
                return Err(PoolError::LabelShapeMismatch {
                    len: l.len(),
                    expected: num_nodes,
                });
            }
        }
        let adj = CooMatrix::from_triples(num_nodes, num_nodes, edges);
        let symmetric = adj.entries().iter().all(|&(i, j, w)| adj.get(j, i) == w);
        let self_loops = adj.entries().iter().any(|&(i, j, _)| i == j);
        Ok(Self {
            adj,
            features,
            labels,
            symmetric,
            self_loops,
            row_offsets: OnceLock::new(),
        })
    }

    /// Disjoint union of validated graphs; node ids of graph `b` are shifted
    /// by the sizes of the graphs before it. No re-validation is needed since
    /// the concatenated blocks stay sorted and disjoint.
    pub(crate) fn disjoint_union(
        graphs: &[&Graph],
        features: DMatrix<f64>,
        labels: Option<Vec<usize>>,
    ) -> Self {
        let blocks: Vec<&CooMatrix> = graphs.iter().map(|g| &g.adj).collect();
        let adj = CooMatrix::block_diagonal(&blocks);
        debug_assert_eq!(features.nrows(), adj.nrows());
        Self {
            adj,
            features,
            labels,
            symmetric: graphs.iter().all(|g| g.symmetric),
            self_loops: graphs.iter().any(|g| g.self_loops),
            row_offsets: OnceLock::new(),
        }
    }

    /// Adds the reverse of every entry that has none. Pairs stored in both
    /// directions with different weights get the mean of the two.
    pub fn symmetrized(&self) -> Result<Self> {
        let mut edges = Vec::with_capacity(self.adj.nnz() * 2);
        for &(i, j, w) in self.adj.entries() {
            let back = self.adj.get(j, i);
            if i == j || back == 0.0 {
                edges.push((i, j, w));
                if i != j {
                    edges.push((j, i, w));
                }
            } else {
                edges.push((i, j, (w + back) / 2.0));
            }
        }
        Self::new(self.num_nodes(), edges, self.features.clone(), self.labels.clone())
    }

    /// A featureless graph (`F = 0`).
    pub fn from_edges(num_nodes: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        Self::new(num_nodes, edges, DMatrix::zeros(num_nodes, 0), None)
    }

    /// Unit-weight undirected graph: every pair is inserted in both
    /// directions.
    pub fn undirected(num_nodes: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        Self::from_edges(num_nodes, symmetrize(pairs.iter().map(|&(i, j)| (i, j, 1.0))))
    }

    pub fn with_features(self, features: DMatrix<f64>) -> Result<Self> {
        Self::new(self.num_nodes(), self.adj.into_entries(), features, self.labels)
    }

    pub fn with_labels(self, labels: Vec<usize>) -> Result<Self> {
        Self::new(self.num_nodes(), self.adj.into_entries(), self.features, Some(labels))
    }

    pub fn num_nodes(&self) -> usize {
        self.adj.nrows()
    }

    /// Number of stored directed entries.
    pub fn num_entries(&self) -> usize {
        self.adj.nnz()
    }

    pub fn num_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        self.adj.entries()
    }

    pub fn adjacency(&self) -> &CooMatrix {
        &self.adj
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn has_self_loops(&self) -> bool {
        self.self_loops
    }

    pub fn has_negative_weights(&self) -> bool {
        self.adj.entries().iter().any(|e| e.2 < 0.0)
    }

    pub(crate) fn require_symmetric(&self) -> Result<()> {
        if self.symmetric {
            Ok(())
        } else {
            Err(PoolError::AsymmetricInput)
        }
    }

    pub(crate) fn require_nonnegative_symmetric(&self) -> Result<()> {
        self.require_symmetric()?;
        if self.has_negative_weights() {
            return Err(PoolError::NegativeWeight);
        }
        Ok(())
    }

    fn offsets(&self) -> &[usize] {
        self.row_offsets.get_or_init(|| {
            let mut off = vec![0usize; self.num_nodes() + 1];
            for &(i, _, _) in self.adj.entries() {
                off[i + 1] += 1;
            }
            for i in 0..self.num_nodes() {
                off[i + 1] += off[i];
            }
            off
        })
    }

    /// Outgoing `(dst, weight)` pairs of node `i`, in ascending `dst` order.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let off = self.offsets();
        self.adj.entries()[off[i]..off[i + 1]]
            .iter()
            .map(|&(_, j, w)| (j, w))
    }

    /// Weighted out-degrees, self-loops included.
    pub fn degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.num_nodes()];
        for &(i, _, w) in self.adj.entries() {
            d[i] += w;
        }
        d
    }

    pub fn dense_adjacency(&self) -> DMatrix<f64> {
        self.adj.to_dense()
    }

    /// 64-bit FNV-1a hash of the topology: node count and the sorted edge
    /// triples. Features and labels do not participate.
    pub fn structural_hash(&self) -> u64 {
        let mut h = FnvHasher::default();
        h.write(&(self.num_nodes() as u64).to_le_bytes());
        for &(i, j, w) in self.adj.entries() {
            h.write(&(i as u64).to_le_bytes());
            h.write(&(j as u64).to_le_bytes());
            h.write(&w.to_bits().to_le_bytes());
        }
        h.finish()
    }

    /// `L = D − A` or `I − D^{-1/2} A D^{-1/2}`. Isolated nodes produce
    /// all-zero rows in both variants.
    pub fn laplacian(&self, kind: LaplacianKind) -> Result<CooMatrix> {
        self.require_symmetric()?;
        let n = self.num_nodes();
        let deg = self.degrees();
        let mut triples = Vec::with_capacity(self.num_entries() + n);
        match kind {
            LaplacianKind::Combinatorial => {
                for &(i, j, w) in self.adj.entries() {
                    if i != j {
                        triples.push((i, j, -w));
                        triples.push((i, i, w));
                    }
                }
            }
            LaplacianKind::SymmetricNormalized => {
                let inv_sqrt: Vec<f64> = deg
                    .iter()
                    .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
                    .collect();
                for (i, &d) in deg.iter().enumerate() {
                    if d > 0.0 {
                        triples.push((i, i, 1.0));
                    }
                }
                for &(i, j, w) in self.adj.entries() {
                    triples.push((i, j, -w * inv_sqrt[i] * inv_sqrt[j]));
                }
            }
        }
        Ok(CooMatrix::from_triples(n, n, triples).prune(0.0))
    }
}

/// Emits every triple in both directions. Self-loops are emitted once.
pub fn symmetrize(
    edges: impl IntoIterator<Item = (usize, usize, f64)>,
) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for (i, j, w) in edges {
        out.push((i, j, w));
        if i != j {
            out.push((j, i, w));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn four_cycle_has_eight_entries() {
        let g = Graph::undirected(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert_eq!(g.num_nodes(), 4);
        assert_eq!(g.num_entries(), 8);
        assert!(g.is_symmetric());
        assert!(!g.has_self_loops());
    }

    #[test]
    fn symmetrized_fills_reverse_entries() {
        let g = Graph::from_edges(3, vec![(0, 1, 2.0), (1, 2, 1.0), (2, 1, 3.0), (2, 2, 1.0)]).unwrap();
        let s = g.symmetrized().unwrap();
        assert!(s.is_symmetric());
        assert_eq!(s.edges(), &[(0, 1, 2.0), (1, 0, 2.0), (1, 2, 2.0), (2, 1, 2.0), (2, 2, 1.0)]);
        assert_eq!(s.symmetrized().unwrap(), s);
    }

    #[test]
    fn duplicate_edges_coalesce() {
        let g = Graph::from_edges(2, vec![(0, 1, 1.0), (0, 1, 1.0)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1, 2.0)]);
        assert!(!g.is_symmetric());
    }

    #[test]
    fn out_of_range_edge() {
        let err = Graph::from_edges(4, vec![(0, 5, 1.0)]).unwrap_err();
        assert!(matches!(err, PoolError::IndexOutOfRange { index: 5, num_nodes: 4 }));
    }

    #[test]
    fn non_finite_weight() {
        let err = Graph::from_edges(2, vec![(0, 1, f64::NAN)]).unwrap_err();
        assert!(matches!(err, PoolError::NonFiniteWeight { .. }));
    }

    #[test]
    fn feature_rows_checked() {
        let err = Graph::new(3, vec![], DMatrix::zeros(2, 1), None).unwrap_err();
        assert!(matches!(err, PoolError::FeatureShapeMismatch { rows: 2, expected: 3 }));
    }

    #[test]
    fn self_loop_flagged() {
        let g = Graph::from_edges(2, vec![(1, 1, 1.0)]).unwrap();
        assert!(g.has_self_loops());
    }

    #[test]
    fn path_laplacian() {
        let g = Graph::undirected(2, &[(0, 1)]).unwrap();
        let l = g.laplacian(LaplacianKind::Combinatorial).unwrap().to_dense();
        assert_eq!(l, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
    }

    #[test]
    fn isolated_node_has_zero_row() {
        let g = Graph::undirected(3, &[(0, 1)]).unwrap();
        for kind in [LaplacianKind::Combinatorial, LaplacianKind::SymmetricNormalized] {
            let l = g.laplacian(kind).unwrap().to_dense();
            assert!(l.row(2).iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn triangle_normalized_laplacian() {
        let g = Graph::undirected(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let l = g.laplacian(LaplacianKind::SymmetricNormalized).unwrap().to_dense();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { -0.5 };
                assert!((l[(i, j)] - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn laplacian_rejects_directed() {
        let g = Graph::from_edges(2, vec![(0, 1, 1.0)]).unwrap();
        assert!(matches!(
            g.laplacian(LaplacianKind::Combinatorial),
            Err(PoolError::AsymmetricInput)
        ));
    }

    proptest! {
        #[test]
        fn coalescing_is_order_independent(
            raw in prop::collection::vec((0usize..6, 0usize..6, 0u8..4), 0..30),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let edges: Vec<_> = raw.iter().map(|&(i, j, w)| (i, j, w as f64)).collect();
            let mut shuffled = edges.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a = Graph::from_edges(6, edges).unwrap();
            let b = Graph::from_edges(6, shuffled).unwrap();
            prop_assert_eq!(a.edges(), b.edges());
            prop_assert_eq!(a.structural_hash(), b.structural_hash());
        }

        #[test]
        fn combinatorial_rows_sum_to_zero(
            raw in prop::collection::vec((0usize..8, 0usize..8, 0.1f64..3.0), 0..30),
        ) {
            let g = Graph::from_edges(8, symmetrize(raw)).unwrap();
            let l = g.laplacian(LaplacianKind::Combinatorial).unwrap().to_dense();
            for i in 0..8 {
                prop_assert!(l.row(i).sum().abs() < 1e-12);
            }
        }
    }
}
