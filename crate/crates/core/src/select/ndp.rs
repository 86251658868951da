use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{PoolError, Result};
use crate::graph::{Graph, LaplacianKind};
use crate::select::SelectOutput;
use crate::sparse::CooMatrix;

fn matvec(m: &CooMatrix, v: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    for &(i, j, w) in m.entries() {
        out[i] += w * v[j];
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Largest eigenpair of the combinatorial Laplacian by power iteration.
///
/// `L` is positive semidefinite, so its dominant eigenvalue is the largest
/// one. Iteration stops once `‖Lv − λv‖ ≤ tol·λ`. Returns `None` when
/// `L = 0` (no edges besides self-loops).
pub fn laplacian_top_eigenvector(
    g: &Graph,
    tol: f64,
    max_iters: usize,
    seed: u64,
) -> Result<Option<(f64, Vec<f64>)>> {
    let l = g.laplacian(LaplacianKind::Combinatorial)?;
    let n = g.num_nodes();
    if l.nnz() == 0 {
        return Ok(None);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut lv = vec![0.0; n];
    for _ in 0..max_iters {
        matvec(&l, &v, &mut lv);
        let lambda: f64 = v.iter().zip(&lv).map(|(a, b)| a * b).sum();
        let residual = lv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt();
        let nlv = norm(&lv);
        if nlv == 0.0 {
            // Start vector fell in the null space; only possible when L
            // has no positive eigenvalue along it.
            return Err(PoolError::PowerIterationNoConvergence(0));
        }
        if residual <= tol * lambda.abs() {
            return Ok(Some((lambda, v)));
        }
        for (x, y) in v.iter_mut().zip(&lv) {
            *x = y / nlv;
        }
    }
    Err(PoolError::PowerIterationNoConvergence(max_iters))
}

/// Node decimation: keeps the nodes on the non-negative side of the top
/// Laplacian eigenvector.
///
/// The eigenvector sign is fixed so that its largest-magnitude entry
/// (lowest index on ties) is positive. Graphs without edges keep every
/// node. On disconnected graphs the result depends on which component
/// carries the top eigenvalue; this behavior is implementation-defined.
pub fn select_ndp(g: &Graph, tol: f64, max_iters: usize, seed: u64) -> Result<SelectOutput> {
    g.require_nonnegative_symmetric()?;
    let n = g.num_nodes();
    let kept: Vec<usize> = match laplacian_top_eigenvector(g, tol, max_iters, seed)? {
        None => (0..n).collect(),
        Some((_, mut v)) => {
            let mut pivot = 0;
            for i in 1..n {
                if v[i].abs() > v[pivot].abs() {
                    pivot = i;
                }
            }
            if v[pivot] < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            (0..n).filter(|&i| v[i] >= 0.0).collect()
        }
    };
    let entries = kept.iter().enumerate().map(|(c, &i)| (i, c, 1.0)).collect();
    let mut out = SelectOutput::sparse(n, kept.len().max(1), entries);
    out.kept_nodes = Some(kept);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ndp(g: &Graph) -> Vec<usize> {
        select_ndp(g, 1e-10, 100_000, 7).unwrap().kept_nodes.unwrap()
    }

    #[test]
    fn single_edge_keeps_one_node() {
        let g = Graph::undirected(2, &[(0, 1)]).unwrap();
        let (lambda, v) = laplacian_top_eigenvector(&g, 1e-12, 1000, 0).unwrap().unwrap();
        assert!((lambda - 2.0).abs() < 1e-12);
        assert!((v[0] + v[1]).abs() < 1e-12);
        assert_eq!(ndp(&g).len(), 1);
    }

    #[test]
    fn edgeless_keeps_all() {
        let g = Graph::from_edges(3, vec![]).unwrap();
        assert_eq!(ndp(&g), vec![0, 1, 2]);
    }

    #[test]
    fn four_cycle_keeps_an_independent_half() {
        let g = Graph::undirected(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let kept = ndp(&g);
        assert_eq!(kept.len(), 2);
        assert!(kept == vec![0, 2] || kept == vec![1, 3]);
    }

    #[test]
    fn deterministic() {
        let g = Graph::undirected(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3)]).unwrap();
        let a = select_ndp(&g, 1e-8, 10_000, 3).unwrap();
        let b = select_ndp(&g, 1e-8, 10_000, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn iteration_budget_is_enforced() {
        let g = Graph::undirected(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]).unwrap();
        assert!(matches!(
            select_ndp(&g, 1e-14, 1, 0),
            Err(PoolError::PowerIterationNoConvergence(1))
        ));
    }
}
