use crate::error::{PoolError, Result};
use crate::select::SelectOutput;

/// Keeps the `⌈ratio·N⌉` highest-scoring nodes (lower index wins ties).
///
/// Kept nodes are listed in ascending index order and each becomes its own
/// cluster. The assignment is structural (value 1); the gate `tanh(score)`
/// of every node is stored in `extra` and applied by Reduce and Lift.
pub fn select_topk(scores: &[f64], ratio: f64) -> Result<SelectOutput> {
    let n = scores.len();
    if n == 0 {
        return Err(PoolError::InvalidArgument("top-k needs at least one node".into()));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(PoolError::NonFinite("scores"));
    }
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(PoolError::InvalidArgument("ratio must lie in (0, 1]".into()));
    }
    let k = ((ratio * n as f64).ceil() as usize).clamp(1, n);

    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort on descending score keeps lower indices first among ties.
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut kept = order[..k].to_vec();
    kept.sort_unstable();

    let entries = kept.iter().enumerate().map(|(c, &i)| (i, c, 1.0)).collect();
    let mut out = SelectOutput::sparse(n, k, entries);
    out.kept_nodes = Some(kept);
    out.extra = Some(scores.iter().map(|s| s.tanh()).collect());
    Ok(out)
}
