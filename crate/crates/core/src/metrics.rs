//! Clustering evaluation: NMI, Hungarian alignment, accuracy and macro-F1.
//!
//! NMI uses the arithmetic mean of the two entropies as normalizer
//! (`2·I / (H(Y) + H(Ŷ))`). Other variants (geometric, max) give
//! different numbers.

use std::collections::HashMap;

use crate::error::{PoolError, Result};

fn check_lengths(a: &[usize], b: &[usize]) -> Result<()> {
    if a.len() != b.len() {
        return Err(PoolError::InvalidArgument(format!(
            "label vectors differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(PoolError::InvalidArgument("label vectors are empty".into()));
    }
    Ok(())
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

pub fn nmi(y_true: &[usize], y_pred: &[usize]) -> Result<f64> {
    check_lengths(y_true, y_pred)?;
    let n = y_true.len() as f64;
    let mut joint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut ct: HashMap<usize, usize> = HashMap::new();
    let mut cp: HashMap<usize, usize> = HashMap::new();
    for (&a, &b) in y_true.iter().zip(y_pred) {
        *joint.entry((a, b)).or_default() += 1;
        *ct.entry(a).or_default() += 1;
        *cp.entry(b).or_default() += 1;
    }
    let ht = entropy(ct.values().copied(), n);
    let hp = entropy(cp.values().copied(), n);
    if ht == 0.0 || hp == 0.0 {
        return Ok(if ht == hp { 1.0 } else { 0.0 });
    }
    // Sort the contingency cells so the sum is order-stable.
    let mut cells: Vec<_> = joint.into_iter().collect();
    cells.sort_unstable();
    let mi: f64 = cells
        .iter()
        .map(|&((a, b), c)| {
            let pab = c as f64 / n;
            let pa = ct[&a] as f64 / n;
            let pb = cp[&b] as f64 / n;
            pab * (pab / (pa * pb)).ln()
        })
        .sum();
    Ok((2.0 * mi / (ht + hp)).clamp(0.0, 1.0))
}

/// Minimum-cost assignment on a square matrix: returns `π` with row `k`
/// assigned to column `π[k]`. Among optimal permutations the
/// lexicographically smallest is returned.
pub fn hungarian(cost: &[Vec<f64>]) -> Result<Vec<usize>> {
    let n = cost.len();
    if cost.iter().any(|r| r.len() != n) {
        return Err(PoolError::InvalidArgument("cost matrix must be square".into()));
    }
    if cost.iter().flatten().any(|v| !v.is_finite()) {
        return Err(PoolError::NonFinite("cost matrix"));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let optimum = min_cost(cost, &vec![false; n], &vec![false; n]);
    let scale = cost.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * scale * n as f64;

    // Fix rows one at a time to the smallest column that keeps the
    // remaining problem optimal.
    let mut row_used = vec![false; n];
    let mut col_used = vec![false; n];
    let mut perm = vec![0; n];
    let mut fixed = 0.0;
    for r in 0..n {
        row_used[r] = true;
        for c in 0..n {
            if col_used[c] {
                continue;
            }
            col_used[c] = true;
            let rest = if r + 1 < n {
                min_cost(cost, &row_used, &col_used)
            } else {
                0.0
            };
            if fixed + cost[r][c] + rest <= optimum + tol {
                perm[r] = c;
                fixed += cost[r][c];
                break;
            }
            col_used[c] = false;
        }
    }
    Ok(perm)
}

/// Optimal cost over the rows and columns not yet used, via the
/// potential-based O(n³) shortest augmenting path method.
fn min_cost(cost: &[Vec<f64>], row_used: &[bool], col_used: &[bool]) -> f64 {
    let rows: Vec<usize> = (0..cost.len()).filter(|&r| !row_used[r]).collect();
    let cols: Vec<usize> = (0..cost.len()).filter(|&c| !col_used[c]).collect();
    let m = rows.len();
    if m == 0 {
        return 0.0;
    }
    let a = |i: usize, j: usize| cost[rows[i - 1]][cols[j - 1]];
    // 1-based arrays; column 0 is a virtual start.
    let mut u = vec![0.0; m + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=m {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = a(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=m).map(|j| a(p[j], j)).sum()
}

/// Maps each predicted label to a true label so that agreement is maximal.
/// Returns `(mapping, matched count)`.
fn align(y_true: &[usize], y_pred: &[usize]) -> Result<(Vec<usize>, usize)> {
    check_lengths(y_true, y_pred)?;
    let k = y_true.iter().chain(y_pred).max().map_or(0, |m| m + 1);
    let mut counts = vec![vec![0usize; k]; k];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        counts[p][t] += 1;
    }
    let cost: Vec<Vec<f64>> = counts
        .iter()
        .map(|r| r.iter().map(|&c| -(c as f64)).collect())
        .collect();
    let perm = hungarian(&cost)?;
    let matched = (0..k).map(|p| counts[p][perm[p]]).sum();
    Ok((perm, matched))
}

/// Fraction of nodes whose predicted label, after optimal relabeling,
/// equals the true label.
pub fn clust_acc(y_true: &[usize], y_pred: &[usize]) -> Result<f64> {
    let (_, matched) = align(y_true, y_pred)?;
    Ok(matched as f64 / y_true.len() as f64)
}

/// Unweighted mean of per-class F1 after optimal relabeling, over every
/// class that occurs in the truth or the aligned prediction. Classes with
/// zero precision and recall contribute 0.
pub fn macro_f1(y_true: &[usize], y_pred: &[usize]) -> Result<f64> {
    let (perm, _) = align(y_true, y_pred)?;
    let aligned: Vec<usize> = y_pred.iter().map(|&p| perm[p]).collect();
    Ok(macro_f1_aligned(y_true, &aligned))
}

fn macro_f1_aligned(y_true: &[usize], aligned: &[usize]) -> f64 {
    let k = y_true.iter().chain(aligned).max().map_or(0, |m| m + 1);
    let mut tp = vec![0usize; k];
    let mut true_count = vec![0usize; k];
    let mut pred_count = vec![0usize; k];
    for (&t, &p) in y_true.iter().zip(aligned) {
        true_count[t] += 1;
        pred_count[p] += 1;
        if t == p {
            tp[t] += 1;
        }
    }
    let mut total = 0.0;
    let mut classes = 0;
    for c in 0..k {
        if true_count[c] == 0 && pred_count[c] == 0 {
            continue;
        }
        classes += 1;
        let prec = if pred_count[c] > 0 { tp[c] as f64 / pred_count[c] as f64 } else { 0.0 };
        let rec = if true_count[c] > 0 { tp[c] as f64 / true_count[c] as f64 } else { 0.0 };
        if prec + rec > 0.0 {
            total += 2.0 * prec * rec / (prec + rec);
        }
    }
    total / classes as f64
}
