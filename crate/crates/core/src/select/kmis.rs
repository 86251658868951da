use crate::error::{PoolError, Result};
use crate::graph::Graph;
use crate::select::traverse::{k_hop_ball, nearest_source};
use crate::select::SelectOutput;

/// Maximal `k`-independent set pooling.
///
/// Builds a maximal independent set of the `k`-th power of the graph
/// (no two kept nodes within `k` hops) greedily in ascending index order,
/// then assigns every other node to the hop-nearest kept node.
pub fn select_kmis(g: &Graph, k: usize) -> Result<SelectOutput> {
    g.require_symmetric()?;
    if k == 0 {
        return Err(PoolError::InvalidArgument("k must be at least 1".into()));
    }
    let n = g.num_nodes();
    let mut covered = vec![false; n];
    let mut mark = vec![0usize; n];
    let mut ball = Vec::new();
    let mut mis = Vec::new();
    for i in 0..n {
        if covered[i] {
            continue;
        }
        mis.push(i);
        covered[i] = true;
        k_hop_ball(g, i, k, &mut ball, &mut mark);
        for &v in &ball {
            covered[v] = true;
        }
    }

    let cluster_of_kept: std::collections::HashMap<usize, usize> =
        mis.iter().enumerate().map(|(c, &i)| (i, c)).collect();
    let nearest = nearest_source(g, &mis);
    let labels: Vec<usize> = nearest
        .iter()
        .map(|o| cluster_of_kept[&o.expect("every node is within k hops of the set").1])
        .collect();
    let mut out = SelectOutput::from_labels(&labels, mis.len().max(1));
    out.kept_nodes = Some(mis);
    Ok(out)
}
