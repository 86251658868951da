use crate::error::{PoolError, Result};
use crate::graph::Graph;
use crate::select::{Assignment, SelectOutput};

/// Multi-source unweighted BFS. Returns, per node, the hop distance to the
/// nearest source and that source (lowest source index among equally near
/// ones), or `None` when no source is reachable.
pub(crate) fn nearest_source(g: &Graph, sources: &[usize]) -> Vec<Option<(usize, usize)>> {
    let n = g.num_nodes();
    let mut best: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut frontier: Vec<usize> = Vec::new();
    for &s in sources {
        if best[s].is_none() {
            best[s] = Some((0, s));
            frontier.push(s);
        }
    }
    let mut depth = 0;
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &u in &frontier {
            let (_, owner) = best[u].expect("frontier nodes are labelled");
            for (v, w) in g.neighbors(u) {
                if v == u || w == 0.0 {
                    continue;
                }
                match &mut best[v] {
                    slot @ None => {
                        *slot = Some((depth + 1, owner));
                        next.push(v);
                    }
                    Some((d, o)) if *d == depth + 1 && owner < *o => *o = owner,
                    _ => {}
                }
            }
        }
        frontier = next;
        depth += 1;
    }
    best
}

/// Nodes within `k` hops of `start`, excluding `start`.
pub(crate) fn k_hop_ball(g: &Graph, start: usize, k: usize, seen: &mut Vec<usize>, mark: &mut [usize]) {
    // `mark` holds a per-call stamp to avoid clearing between calls.
    let stamp = start + 1;
    seen.clear();
    mark[start] = stamp;
    let mut frontier = vec![start];
    for _ in 0..k {
        let mut next = Vec::new();
        for &u in &frontier {
            for (v, w) in g.neighbors(u) {
                if w != 0.0 && mark[v] != stamp {
                    mark[v] = stamp;
                    seen.push(v);
                    next.push(v);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
}

/// Extends a partial sparse assignment to a full partition: every
/// unassigned node joins the cluster of the hop-nearest assigned node
/// (lowest node index among equally near ones).
pub fn assign_all_nodes(so: &SelectOutput, g: &Graph) -> Result<SelectOutput> {
    let Assignment::Sparse(entries) = &so.assignment else {
        return Err(PoolError::InvalidArgument(
            "assign_all_nodes needs a sparse assignment".into(),
        ));
    };
    if so.num_nodes != g.num_nodes() {
        return Err(PoolError::InvalidArgument("selection and graph sizes differ".into()));
    }
    let mut cluster_of = vec![None; so.num_nodes];
    for &(i, c, v) in entries {
        cluster_of[i] = Some((c, v));
    }
    if cluster_of.iter().all(Option::is_some) {
        return Ok(so.clone());
    }
    let sources: Vec<usize> = (0..so.num_nodes).filter(|&i| cluster_of[i].is_some()).collect();
    let nearest = nearest_source(g, &sources);
    let mut out_entries = Vec::with_capacity(so.num_nodes);
    for i in 0..so.num_nodes {
        let (c, v) = match cluster_of[i] {
            Some(cv) => cv,
            None => {
                let (_, src) = nearest[i].ok_or(PoolError::UnreachableNode(i))?;
                (cluster_of[src].expect("sources are assigned").0, 1.0)
            }
        };
        out_entries.push((i, c, v));
    }
    Ok(SelectOutput {
        assignment: Assignment::Sparse(out_entries),
        ..so.clone()
    })
}
