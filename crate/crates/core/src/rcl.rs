//! Reduce, Connect and Lift.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::batch::Reduce;
use crate::error::{PoolError, Result};
use crate::graph::{Graph, LaplacianKind};
use crate::select::{row_argmax, Assignment, SelectOutput};
use crate::sparse::CooMatrix;

/// Removed-block size up to which Kron reduction factorizes densely.
pub const KRON_DENSE_LIMIT: usize = 512;
const CG_TOL: f64 = 1e-10;

pub const DEFAULT_SPARSIFY_EPS: f64 = 1e-6;

/// Supernode features `X′` from node features `X`.
///
/// Gates stored in the selection multiply their rows first. `Sum` is
/// `SᵀX`; `Mean` divides by member counts (column sums of `S` for dense
/// assignments); `Max` is taken over hard members (row argmax for dense
/// assignments).
pub fn reduce(x: &DMatrix<f64>, so: &SelectOutput, aggr: Reduce) -> Result<DMatrix<f64>> {
    if x.nrows() != so.num_nodes {
        return Err(PoolError::InvalidArgument(format!(
            "feature rows {} != selection nodes {}",
            x.nrows(),
            so.num_nodes
        )));
    }
    let k = so.num_clusters;
    let f = x.ncols();
    let mut out = DMatrix::zeros(k, f);
    match (&so.assignment, aggr) {
        (Assignment::Sparse(entries), Reduce::Sum | Reduce::Mean) => {
            let mut count = vec![0usize; k];
            for &(i, c, v) in entries {
                let scale = v * so.gate(i);
                for col in 0..f {
                    out[(c, col)] += scale * x[(i, col)];
                }
                count[c] += 1;
            }
            if aggr == Reduce::Mean {
                for c in 0..k {
                    if count[c] == 0 {
                        return Err(PoolError::EmptyCluster(c));
                    }
                    out.row_mut(c).unscale_mut(count[c] as f64);
                }
            }
        }
        (Assignment::Dense(s), Reduce::Sum | Reduce::Mean) => {
            let gated = gated_dense(s, so);
            out = gated.transpose() * x;
            if aggr == Reduce::Mean {
                for c in 0..k {
                    let mass = gated.column(c).sum();
                    if mass == 0.0 {
                        return Err(PoolError::EmptyCluster(c));
                    }
                    out.row_mut(c).unscale_mut(mass);
                }
            }
        }
        (_, Reduce::Max) => {
            let members: Vec<(usize, usize, f64)> = match &so.assignment {
                Assignment::Sparse(entries) => entries.clone(),
                Assignment::Dense(s) => (0..s.nrows()).map(|i| (i, row_argmax(s, i), 1.0)).collect(),
            };
            let mut seen = vec![false; k];
            for (i, c, v) in members {
                let scale = v * so.gate(i);
                for col in 0..f {
                    let val = scale * x[(i, col)];
                    if !seen[c] || val > out[(c, col)] {
                        out[(c, col)] = val;
                    }
                }
                seen[c] = true;
            }
            if let Some(c) = seen.iter().position(|&s| !s) {
                return Err(PoolError::EmptyCluster(c));
            }
        }
    }
    Ok(out)
}

fn gated_dense(s: &DMatrix<f64>, so: &SelectOutput) -> DMatrix<f64> {
    match &so.extra {
        None => s.clone(),
        Some(g) => {
            let mut m = s.clone();
            for (i, mut row) in m.row_iter_mut().enumerate() {
                row *= g[i];
            }
            m
        }
    }
}

/// `A′ = SᵀAS` with the structural assignment (gates are not applied).
/// The diagonal carries intra-cluster edge mass unless
/// `remove_self_loops` is set.
pub fn connect_sparse(g: &Graph, so: &SelectOutput, remove_self_loops: bool) -> Result<CooMatrix> {
    if so.num_nodes != g.num_nodes() {
        return Err(PoolError::InvalidArgument("selection and graph sizes differ".into()));
    }
    let k = so.num_clusters;
    let out = match &so.assignment {
        Assignment::Sparse(entries) => {
            let mut assign = vec![None; so.num_nodes];
            for &(i, c, v) in entries {
                assign[i] = Some((c, v));
            }
            let triples = g
                .edges()
                .iter()
                .filter_map(|&(i, j, w)| {
                    let (ci, vi) = assign[i]?;
                    let (cj, vj) = assign[j]?;
                    Some((ci, cj, vi * w * vj))
                })
                .collect();
            CooMatrix::from_triples(k, k, triples)
        }
        Assignment::Dense(s) => {
            // (SᵀA) is K × N; accumulate it edge by edge, then multiply by S.
            let mut sta = DMatrix::zeros(k, so.num_nodes);
            for &(i, j, w) in g.edges() {
                for c in 0..k {
                    sta[(c, j)] += s[(i, c)] * w;
                }
            }
            CooMatrix::from_dense(&(sta * s))
        }
    };
    let out = out.prune(0.0);
    Ok(if remove_self_loops {
        out.without_diagonal()
    } else {
        out
    })
}

/// Kron reduction onto `kept` (in the given order): the Schur complement
/// of the combinatorial Laplacian, read back as an adjacency.
///
/// Off-diagonal entries below `sparsify_eps` in magnitude are dropped and
/// the diagonal is discarded. The elimination block is factorized densely
/// up to [`KRON_DENSE_LIMIT`] removed nodes and solved by Jacobi
/// preconditioned conjugate gradients beyond that.
pub fn connect_kron(g: &Graph, kept: &[usize], sparsify_eps: f64) -> Result<CooMatrix> {
    g.require_nonnegative_symmetric()?;
    let n = g.num_nodes();
    let k = kept.len();
    let mut kept_pos = vec![usize::MAX; n];
    for (p, &v) in kept.iter().enumerate() {
        if v >= n {
            return Err(PoolError::IndexOutOfRange { index: v, num_nodes: n });
        }
        if kept_pos[v] != usize::MAX {
            return Err(PoolError::InvalidArgument(format!("node {v} kept twice")));
        }
        kept_pos[v] = p;
    }
    let removed: Vec<usize> = (0..n).filter(|&v| kept_pos[v] == usize::MAX).collect();
    let mut removed_pos = vec![usize::MAX; n];
    for (p, &v) in removed.iter().enumerate() {
        removed_pos[v] = p;
    }
    check_elimination_block(g, &kept_pos, &removed)?;

    let lap = g.laplacian(LaplacianKind::Combinatorial)?;
    // L++ restricted to kept nodes.
    let mut schur: HashMap<(usize, usize), f64> = HashMap::new();
    for &(i, j, v) in lap.entries() {
        if kept_pos[i] != usize::MAX && kept_pos[j] != usize::MAX {
            *schur.entry((kept_pos[i], kept_pos[j])).or_default() += v;
        }
    }

    if !removed.is_empty() {
        // Boundary kept nodes and the columns of L−+ they induce.
        let mut boundary: Vec<usize> = Vec::new();
        let mut rhs_cols: Vec<Vec<(usize, f64)>> = Vec::new();
        let mut col_of = vec![usize::MAX; k];
        for &(i, j, v) in lap.entries() {
            if removed_pos[i] != usize::MAX && kept_pos[j] != usize::MAX {
                let kj = kept_pos[j];
                if col_of[kj] == usize::MAX {
                    col_of[kj] = boundary.len();
                    boundary.push(kj);
                    rhs_cols.push(Vec::new());
                }
                rhs_cols[col_of[kj]].push((removed_pos[i], v));
            }
        }
        let solver = EliminationSolver::new(&lap, &removed, &removed_pos)?;
        let r = removed.len();
        for (b, &kj) in boundary.iter().enumerate() {
            let mut rhs = vec![0.0; r];
            for &(p, v) in &rhs_cols[b] {
                rhs[p] += v;
            }
            let y = solver.solve(&rhs)?;
            // L′[:, kj] −= L+− y
            for (b2, &ki) in boundary.iter().enumerate() {
                let dot: f64 = rhs_cols[b2].iter().map(|&(p, v)| v * y[p]).sum();
                if dot != 0.0 {
                    *schur.entry((ki, kj)).or_default() -= dot;
                }
            }
        }
    }

    let mut triples = Vec::new();
    for (&(i, j), &v) in &schur {
        if i == j {
            continue;
        }
        // Average with the transpose so the result is exactly symmetric.
        let vt = schur.get(&(j, i)).copied().unwrap_or(0.0);
        let w = -(v + vt) / 2.0;
        let keep = if sparsify_eps > 0.0 { w.abs() >= sparsify_eps } else { w != 0.0 };
        if keep {
            triples.push((i, j, w));
        }
    }
    Ok(CooMatrix::from_triples(k, k, triples))
}

/// Every connected component of the removed subgraph must touch a kept
/// node, otherwise `L−−` is singular.
fn check_elimination_block(g: &Graph, kept_pos: &[usize], removed: &[usize]) -> Result<()> {
    let n = g.num_nodes();
    let mut visited = vec![false; n];
    for &start in removed {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let mut stack = vec![start];
        let mut anchored = false;
        while let Some(u) = stack.pop() {
            for (v, w) in g.neighbors(u) {
                if v == u || w == 0.0 {
                    continue;
                }
                if kept_pos[v] != usize::MAX {
                    anchored = true;
                } else if !visited[v] {
                    visited[v] = true;
                    stack.push(v);
                }
            }
        }
        if !anchored {
            return Err(PoolError::SingularEliminationBlock);
        }
    }
    Ok(())
}

enum EliminationSolver {
    Dense(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Cg {
        /// Off-diagonal entries of L−− as (row, col, value).
        offdiag: Vec<(usize, usize, f64)>,
        diag: Vec<f64>,
    },
}

impl EliminationSolver {
    fn new(lap: &CooMatrix, removed: &[usize], removed_pos: &[usize]) -> Result<Self> {
        let r = removed.len();
        let block = lap
            .entries()
            .iter()
            .filter(|&&(i, j, _)| removed_pos[i] != usize::MAX && removed_pos[j] != usize::MAX)
            .map(|&(i, j, v)| (removed_pos[i], removed_pos[j], v));
        if r <= KRON_DENSE_LIMIT {
            let mut m = DMatrix::zeros(r, r);
            for (i, j, v) in block {
                m[(i, j)] += v;
            }
            let chol = nalgebra::Cholesky::new(m).ok_or(PoolError::SingularEliminationBlock)?;
            Ok(Self::Dense(chol))
        } else {
            let mut diag = vec![0.0; r];
            let mut offdiag = Vec::new();
            for (i, j, v) in block {
                if i == j {
                    diag[i] += v;
                } else {
                    offdiag.push((i, j, v));
                }
            }
            if diag.iter().any(|&d| d <= 0.0) {
                return Err(PoolError::SingularEliminationBlock);
            }
            Ok(Self::Cg { offdiag, diag })
        }
    }

    fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        match self {
            Self::Dense(chol) => {
                let b = nalgebra::DVector::from_column_slice(rhs);
                Ok(chol.solve(&b).iter().copied().collect())
            }
            Self::Cg { offdiag, diag } => pcg(offdiag, diag, rhs),
        }
    }
}

fn pcg(offdiag: &[(usize, usize, f64)], diag: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    let apply = |x: &[f64], out: &mut [f64]| {
        for i in 0..n {
            out[i] = diag[i] * x[i];
        }
        for &(i, j, v) in offdiag {
            out[i] += v * x[j];
        }
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let bnorm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    for _ in 0..(10 * n).max(100) {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(PoolError::SingularEliminationBlock);
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if dot(&r, &r).sqrt() <= CG_TOL * bnorm {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(PoolError::SingularEliminationBlock)
}

/// `X_lift = S X′`, gates applied; unassigned nodes get zero rows.
pub fn lift(x_pooled: &DMatrix<f64>, so: &SelectOutput) -> Result<DMatrix<f64>> {
    if x_pooled.nrows() != so.num_clusters {
        return Err(PoolError::InvalidArgument(format!(
            "pooled rows {} != clusters {}",
            x_pooled.nrows(),
            so.num_clusters
        )));
    }
    let f = x_pooled.ncols();
    Ok(match &so.assignment {
        Assignment::Sparse(entries) => {
            let mut out = DMatrix::zeros(so.num_nodes, f);
            for &(i, c, v) in entries {
                let scale = v * so.gate(i);
                for col in 0..f {
                    out[(i, col)] = scale * x_pooled[(c, col)];
                }
            }
            out
        }
        Assignment::Dense(s) => gated_dense(s, so) * x_pooled,
    })
}
