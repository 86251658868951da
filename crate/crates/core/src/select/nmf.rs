use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{PoolError, Result};
use crate::graph::Graph;
use crate::select::SelectOutput;

/// Node count above which NMF pooling is refused.
pub const NMF_MAX_NODES: usize = 20_000;

const DENOM_EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct NmfFactors {
    /// `N × K`.
    pub w: DMatrix<f64>,
    /// `K × N`.
    pub h: DMatrix<f64>,
    /// `‖A − WH‖_F / ‖A‖_F` (absolute error when `A = 0`).
    pub rel_error: f64,
    pub iters: usize,
}

/// `A·M` for the graph adjacency and a dense `N × c` matrix.
fn adj_mul(g: &Graph, m: &DMatrix<f64>) -> DMatrix<f64> {
    g.adjacency().mul_dense(m)
}

fn reconstruction_error(g: &Graph, a_norm2: f64, w: &DMatrix<f64>, h: &DMatrix<f64>) -> f64 {
    // ‖A − WH‖² = ‖A‖² − 2·Σ_ij a_ij (WH)_ij + tr(WᵀW·HHᵀ)
    let mut cross = 0.0;
    for &(i, j, a) in g.edges() {
        cross += a * w.row(i).dot(&h.column(j).transpose());
    }
    let wtw = w.transpose() * w;
    let hht = h * h.transpose();
    let quad = wtw.component_mul(&hht).sum();
    let err2 = (a_norm2 - 2.0 * cross + quad).max(0.0);
    if a_norm2 > 0.0 {
        (err2 / a_norm2).sqrt()
    } else {
        err2.sqrt()
    }
}

/// Factorizes `A ≈ W·H` with Lee–Seung multiplicative updates for the
/// Frobenius loss, starting from seeded `U(0, 1)` factors. Converges when
/// the relative decrease of the error falls below `tol`.
pub fn nmf_factorize(
    g: &Graph,
    k: usize,
    max_iters: usize,
    tol: f64,
    seed: u64,
) -> Result<NmfFactors> {
    let n = g.num_nodes();
    if g.has_negative_weights() {
        return Err(PoolError::NegativeWeight);
    }
    if n > NMF_MAX_NODES {
        return Err(PoolError::TooLarge {
            op: "nmf",
            size: n,
            limit: NMF_MAX_NODES,
        });
    }
    if k == 0 || k > n {
        return Err(PoolError::InvalidArgument(format!(
            "NMF needs 1 <= K <= N, got K = {k}, N = {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = DMatrix::from_fn(n, k, |_, _| rng.random::<f64>());
    let mut h = DMatrix::from_fn(k, n, |_, _| rng.random::<f64>());
    let a_norm2: f64 = g.edges().iter().map(|e| e.2 * e.2).sum();
    let mut err = reconstruction_error(g, a_norm2, &w, &h);

    for iter in 1..=max_iters {
        // H ← H ∘ (WᵀA) / (WᵀW H)
        let wta = adj_mul_t(g, &w);
        let denom = (w.transpose() * &w) * &h;
        h.zip_zip_apply(&wta, &denom, |x, num, den| *x *= num / (den + DENOM_EPS));
        // W ← W ∘ (A Hᵀ) / (W H Hᵀ)
        let aht = adj_mul(g, &h.transpose());
        let denom = &w * (&h * h.transpose());
        w.zip_zip_apply(&aht, &denom, |x, num, den| *x *= num / (den + DENOM_EPS));

        let next = reconstruction_error(g, a_norm2, &w, &h);
        let improvement = if err > 0.0 { (err - next) / err } else { 0.0 };
        err = next;
        if err == 0.0 || improvement < tol {
            return Ok(NmfFactors {
                w,
                h,
                rel_error: err,
                iters: iter,
            });
        }
    }
    Err(PoolError::NoConvergence(max_iters))
}

/// `WᵀA` as a `K × N` matrix.
fn adj_mul_t(g: &Graph, w: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(w.ncols(), g.num_nodes());
    for &(i, j, a) in g.edges() {
        for c in 0..w.ncols() {
            out[(c, j)] += w[(i, c)] * a;
        }
    }
    out
}

/// Soft assignment from the column-normalized `H` factor:
/// `S_ik = H_ki / Σ_c H_ci`, uniform where a column of `H` is all zero.
pub fn select_nmf(
    g: &Graph,
    k: usize,
    max_iters: usize,
    tol: f64,
    seed: u64,
) -> Result<SelectOutput> {
    let f = nmf_factorize(g, k, max_iters, tol, seed)?;
    let n = g.num_nodes();
    let mut s = DMatrix::zeros(n, k);
    for i in 0..n {
        let col = f.h.column(i);
        let z = col.sum();
        for c in 0..k {
            s[(i, c)] = if z > 0.0 { col[c] / z } else { 1.0 / k as f64 };
        }
    }
    Ok(SelectOutput::dense(s))
}
