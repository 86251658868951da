use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::graph::Graph;
use crate::select::SelectOutput;

/// Greedy normalized-cut matching.
///
/// Vertices are visited in ascending index order, or in a seeded random
/// order when `shuffle_seed` is set. An unmatched vertex `i` is paired with
/// the unmatched neighbor `j` maximizing `w_ij·(1/d_i + 1/d_j)`, lower `j`
/// first on ties; vertices left without a partner become singletons.
/// Cluster ids follow creation order.
pub fn select_graclus(g: &Graph, shuffle_seed: Option<u64>) -> Result<SelectOutput> {
    g.require_nonnegative_symmetric()?;
    let n = g.num_nodes();
    let deg = g.degrees();
    let mut order: Vec<usize> = (0..n).collect();
    if let Some(seed) = shuffle_seed {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }

    let mut cluster = vec![usize::MAX; n];
    let mut next = 0;
    for &i in &order {
        if cluster[i] != usize::MAX {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for (j, w) in g.neighbors(i) {
            if j == i || cluster[j] != usize::MAX || w <= 0.0 {
                continue;
            }
            let score = w * (1.0 / deg[i] + 1.0 / deg[j]);
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((j, score));
            }
        }
        cluster[i] = next;
        if let Some((j, _)) = best {
            cluster[j] = next;
        }
        next += 1;
    }
    Ok(SelectOutput::from_labels(&cluster, next.max(1)))
}
