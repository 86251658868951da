//! Select: algorithms mapping the `N` input nodes onto `K` supernodes.

mod graclus;
mod kmis;
mod ndp;
mod nmf;
mod topk;
mod traverse;

use nalgebra::DMatrix;

use crate::error::{PoolError, Result};
use crate::graph::Graph;

pub use graclus::select_graclus;
pub use kmis::select_kmis;
pub use ndp::{laplacian_top_eigenvector, select_ndp};
pub use nmf::{nmf_factorize, select_nmf, NmfFactors};
pub use topk::select_topk;
pub use traverse::assign_all_nodes;

/// The assignment matrix `S ∈ R^{N×K}`.
#[derive(Debug, Clone, PartialEq)]
pub enum Assignment {
    /// `(node, cluster, value)` entries; every node appears at most once.
    Sparse(Vec<(usize, usize, f64)>),
    /// Row-stochastic `N × K` matrix.
    Dense(DMatrix<f64>),
}

/// Output of a Select operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectOutput {
    pub num_nodes: usize,
    pub num_clusters: usize,
    pub assignment: Assignment,
    /// Original indices of the kept nodes, in cluster order, for node
    /// selection operators.
    pub kept_nodes: Option<Vec<usize>>,
    /// Per-node multiplicative gates applied by Reduce and Lift.
    pub extra: Option<Vec<f64>>,
}

impl SelectOutput {
    pub fn sparse(num_nodes: usize, num_clusters: usize, entries: Vec<(usize, usize, f64)>) -> Self {
        Self {
            num_nodes,
            num_clusters,
            assignment: Assignment::Sparse(entries),
            kept_nodes: None,
            extra: None,
        }
    }

    /// One-hot assignment from a cluster id per node.
    pub fn from_labels(labels: &[usize], num_clusters: usize) -> Self {
        let entries = labels.iter().enumerate().map(|(i, &c)| (i, c, 1.0)).collect();
        Self::sparse(labels.len(), num_clusters, entries)
    }

    pub fn dense(s: DMatrix<f64>) -> Self {
        Self {
            num_nodes: s.nrows(),
            num_clusters: s.ncols(),
            assignment: Assignment::Dense(s),
            kept_nodes: None,
            extra: None,
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.assignment, Assignment::Sparse(_))
    }

    /// Gate of node `i`, 1.0 when no gates are stored.
    pub fn gate(&self, i: usize) -> f64 {
        self.extra.as_ref().map_or(1.0, |g| g[i])
    }

    /// Cluster of each node under the hard assignment: the sparse entry, or
    /// the row argmax (lowest index on ties) for dense assignments.
    pub fn hard_labels(&self) -> Vec<Option<usize>> {
        match &self.assignment {
            Assignment::Sparse(entries) => {
                let mut out = vec![None; self.num_nodes];
                for &(i, c, _) in entries {
                    out[i] = Some(c);
                }
                out
            }
            Assignment::Dense(s) => (0..s.nrows()).map(|i| Some(row_argmax(s, i))).collect(),
        }
    }

    /// Structural `S` as a dense matrix, gates not applied.
    pub fn to_dense(&self) -> DMatrix<f64> {
        match &self.assignment {
            Assignment::Dense(s) => s.clone(),
            Assignment::Sparse(entries) => {
                let mut s = DMatrix::zeros(self.num_nodes, self.num_clusters);
                for &(i, c, v) in entries {
                    s[(i, c)] = v;
                }
                s
            }
        }
    }

    /// Checks the assignment invariants.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(PoolError::InvalidArgument(msg));
        if self.num_clusters == 0 {
            return bad("K must be at least 1".into());
        }
        match &self.assignment {
            Assignment::Sparse(entries) => {
                let mut seen = vec![false; self.num_nodes];
                for &(i, c, v) in entries {
                    if i >= self.num_nodes || c >= self.num_clusters {
                        return bad(format!("entry ({i}, {c}) out of range"));
                    }
                    if v == 0.0 || !v.is_finite() {
                        return bad(format!("entry ({i}, {c}) has value {v}"));
                    }
                    if std::mem::replace(&mut seen[i], true) {
                        return bad(format!("node {i} assigned twice"));
                    }
                }
            }
            Assignment::Dense(s) => {
                if s.nrows() != self.num_nodes || s.ncols() != self.num_clusters {
                    return bad("dense assignment shape mismatch".into());
                }
                for i in 0..s.nrows() {
                    let row = s.row(i);
                    if row.iter().any(|&v| v < 0.0 || !v.is_finite()) {
                        return bad(format!("row {i} has a negative or non-finite entry"));
                    }
                    if (row.sum() - 1.0).abs() > 1e-9 {
                        return bad(format!("row {i} sums to {}", row.sum()));
                    }
                }
            }
        }
        if let Some(kept) = &self.kept_nodes {
            if kept.iter().any(|&k| k >= self.num_nodes) {
                return bad("kept node out of range".into());
            }
        }
        if let Some(extra) = &self.extra {
            if extra.len() != self.num_nodes {
                return bad("gate vector length mismatch".into());
            }
        }
        Ok(())
    }
}

pub(crate) fn row_argmax(s: &DMatrix<f64>, i: usize) -> usize {
    let mut best = 0;
    for c in 1..s.ncols() {
        if s[(i, c)] > s[(i, best)] {
            best = c;
        }
    }
    best
}

/// Row-wise softmax of a logit matrix.
pub fn softmax_rows(theta: &DMatrix<f64>) -> DMatrix<f64> {
    let mut s = theta.clone();
    for mut row in s.row_iter_mut() {
        let max = row.max();
        row.apply(|v| *v = (*v - max).exp());
        let z = row.sum();
        row /= z;
    }
    s
}

/// Dense soft assignment from logits by row-wise softmax.
pub fn dense_from_logits(theta: &DMatrix<f64>) -> Result<SelectOutput> {
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(PoolError::NonFinite("logits"));
    }
    if theta.ncols() == 0 {
        return Err(PoolError::InvalidArgument("K must be at least 1".into()));
    }
    Ok(SelectOutput::dense(softmax_rows(theta)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SelectorKind {
    Ndp,
    Graclus,
    Kmis,
    Nmf,
    Topk,
    DenseLogits,
}

impl SelectorKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Ndp => "ndp",
            Self::Graclus => "graclus",
            Self::Kmis => "kmis",
            Self::Nmf => "nmf",
            Self::Topk => "topk",
            Self::DenseLogits => "dense-logits",
        }
    }

    /// Selectors whose output names a set of kept nodes.
    pub fn keeps_nodes(self) -> bool {
        matches!(self, Self::Ndp | Self::Kmis | Self::Topk)
    }

    /// Whether the assignment matrix is sparse (one-hot).
    pub fn is_sparse(self) -> bool {
        !matches!(self, Self::Nmf | Self::DenseLogits)
    }

    pub fn is_trainable(self) -> bool {
        matches!(self, Self::Topk | Self::DenseLogits)
    }
}

impl std::str::FromStr for SelectorKind {
    type Err = PoolError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ndp" => Self::Ndp,
            "graclus" => Self::Graclus,
            "kmis" => Self::Kmis,
            "nmf" => Self::Nmf,
            "topk" => Self::Topk,
            "dense-logits" => Self::DenseLogits,
            other => return Err(PoolError::InvalidArgument(format!("unknown selector `{other}`"))),
        })
    }
}

/// Configuration of a Select operator.
///
/// Top-K scores are read from feature column 0 when the graph has
/// features, otherwise the weighted degree is used. Dense logits are read
/// from the first `num_clusters` feature columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectorConfig {
    pub kind: SelectorKind,
    pub ratio: f64,
    pub k: usize,
    pub num_clusters: usize,
    pub nmf_max_iters: usize,
    pub nmf_tol: f64,
    pub eig_tol: f64,
    pub eig_max_iters: usize,
    pub seed: u64,
    /// Visit vertices in a seeded random order instead of ascending index.
    pub graclus_shuffle: bool,
}

impl SelectorConfig {
    pub fn new(kind: SelectorKind) -> Self {
        Self {
            kind,
            ratio: 0.5,
            k: 1,
            num_clusters: 2,
            nmf_max_iters: 500,
            nmf_tol: 1e-4,
            eig_tol: 1e-6,
            eig_max_iters: 20_000,
            seed: 0,
            graclus_shuffle: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(PoolError::InvalidArgument(m.to_string()));
        if !(self.ratio > 0.0 && self.ratio <= 1.0) {
            return bad("ratio must lie in (0, 1]");
        }
        if self.k == 0 {
            return bad("k must be at least 1");
        }
        if self.num_clusters == 0 {
            return bad("num_clusters must be at least 1");
        }
        if !(self.nmf_tol >= 0.0 && self.eig_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        Ok(())
    }

    /// Canonical little-endian encoding of every field, the input to cache
    /// fingerprints.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut b = Vec::with_capacity(64);
        b.extend_from_slice(self.kind.name().as_bytes());
        b.push(0);
        b.extend_from_slice(&self.ratio.to_bits().to_le_bytes());
        for v in [
            self.k as u64,
            self.num_clusters as u64,
            self.nmf_max_iters as u64,
        ] {
            b.extend_from_slice(&v.to_le_bytes());
        }
        b.extend_from_slice(&self.nmf_tol.to_bits().to_le_bytes());
        b.extend_from_slice(&self.eig_tol.to_bits().to_le_bytes());
        b.extend_from_slice(&(self.eig_max_iters as u64).to_le_bytes());
        b.extend_from_slice(&self.seed.to_le_bytes());
        b.push(self.graclus_shuffle as u8);
        b
    }

    pub fn select(&self, g: &Graph) -> Result<SelectOutput> {
        self.validate()?;
        match self.kind {
            SelectorKind::Ndp => select_ndp(g, self.eig_tol, self.eig_max_iters, self.seed),
            SelectorKind::Graclus => {
                select_graclus(g, self.graclus_shuffle.then_some(self.seed))
            }
            SelectorKind::Kmis => select_kmis(g, self.k),
            SelectorKind::Nmf => {
                select_nmf(g, self.num_clusters, self.nmf_max_iters, self.nmf_tol, self.seed)
            }
            SelectorKind::Topk => select_topk(&topk_scores(g), self.ratio),
            SelectorKind::DenseLogits => {
                if g.num_features() < self.num_clusters {
                    return Err(PoolError::InvalidArgument(format!(
                        "dense-logits needs at least {} feature columns",
                        self.num_clusters
                    )));
                }
                dense_from_logits(&g.features().columns(0, self.num_clusters).into_owned())
            }
        }
    }
}

/// Default Top-K score: feature column 0, or weighted degree when `F = 0`.
pub fn topk_scores(g: &Graph) -> Vec<f64> {
    if g.num_features() > 0 {
        g.features().column(0).iter().copied().collect()
    } else {
        g.degrees()
    }
}
