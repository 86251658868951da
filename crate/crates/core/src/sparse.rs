//! Coalesced coordinate-list sparse matrices.

use nalgebra::DMatrix;

/// A sparse matrix stored as `(row, col, value)` triples, sorted row-major
/// with no duplicate coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct CooMatrix {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl CooMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    /// Builds a matrix from unordered triples, summing duplicates.
    /// Entries that sum to exactly zero are kept; use [`CooMatrix::prune`]
    /// to drop them.
    ///
    /// Panics if a coordinate is out of range.
    pub fn from_triples(
        nrows: usize,
        ncols: usize,
        mut triples: Vec<(usize, usize, f64)>,
    ) -> Self {
        for &(i, j, _) in &triples {
            assert!(i < nrows && j < ncols, "triple ({i}, {j}) out of range");
        }
        triples.sort_by_key(|t| (t.0, t.1));
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(triples.len());
        for (i, j, v) in triples {
            match entries.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => entries.push((i, j, v)),
            }
        }
        Self {
            nrows,
            ncols,
            entries,
        }
    }

    /// Collects the non-zero entries of a dense matrix.
    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut entries = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != 0.0 {
                    entries.push((i, j, v));
                }
            }
        }
        Self {
            nrows: m.nrows(),
            ncols: m.ncols(),
            entries,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<(usize, usize, f64)> {
        self.entries
    }

    /// Returns the stored value at `(i, j)`, or zero.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries
            .binary_search_by(|e| (e.0, e.1).cmp(&(i, j)))
            .map(|k| self.entries[k].2)
            .unwrap_or(0.0)
    }

    /// Drops entries whose magnitude is below `eps` (exact zeros when
    /// `eps == 0`).
    pub fn prune(mut self, eps: f64) -> Self {
        self.entries
            .retain(|&(_, _, v)| if eps > 0.0 { v.abs() >= eps } else { v != 0.0 });
        self
    }

    pub fn without_diagonal(mut self) -> Self {
        self.entries.retain(|&(i, j, _)| i != j);
        self
    }

    pub fn transpose(&self) -> Self {
        let triples = self.entries.iter().map(|&(i, j, v)| (j, i, v)).collect();
        Self::from_triples(self.ncols, self.nrows, triples)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
        }
        m
    }

    /// Largest absolute difference between this matrix and its transpose.
    pub fn asymmetry(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        self.entries
            .iter()
            .map(|&(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    /// Sparse-times-dense product.
    pub fn mul_dense(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(self.ncols, rhs.nrows(), "dimension mismatch");
        let mut out = DMatrix::zeros(self.nrows, rhs.ncols());
        for &(i, j, v) in &self.entries {
            for c in 0..rhs.ncols() {
                out[(i, c)] += v * rhs[(j, c)];
            }
        }
        out
    }

    /// Offsets every coordinate, for block-diagonal assembly.
    pub(crate) fn shifted(&self, offset: usize) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries
            .iter()
            .map(move |&(i, j, v)| (i + offset, j + offset, v))
    }

    /// Stacks square matrices along the diagonal.
    pub fn block_diagonal(blocks: &[&CooMatrix]) -> Self {
        let n: usize = blocks.iter().map(|b| b.nrows).sum();
        let mut entries = Vec::with_capacity(blocks.iter().map(|b| b.nnz()).sum());
        let mut offset = 0;
        for b in blocks {
            debug_assert_eq!(b.nrows, b.ncols);
            entries.extend(b.shifted(offset));
            offset += b.nrows;
        }
        // Blocks are already sorted and disjoint, so the concatenation is too.
        Self {
            nrows: n,
            ncols: n,
            entries,
        }
    }
}
