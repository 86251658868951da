#![allow(dead_code)]

use gpool::Graph;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Connected random graph: a random spanning tree plus each remaining
/// pair with probability `p`, weights in `[0.5, 2)` or unit.
pub fn random_connected(rng: &mut ChaCha8Rng, n: usize, p: f64, weighted: bool) -> Graph {
    let mut pairs = Vec::new();
    for v in 1..n {
        pairs.push((rng.random_range(0..v), v));
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p && !pairs.contains(&(i, j)) {
                pairs.push((i, j));
            }
        }
    }
    let mut edges = Vec::new();
    for (i, j) in pairs {
        let w = if weighted { rng.random_range(0.5..2.0) } else { 1.0 };
        edges.push((i, j, w));
        edges.push((j, i, w));
    }
    Graph::from_edges(n, edges).unwrap()
}

/// Random symmetric graph, possibly disconnected.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64, weighted: bool) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                let w = if weighted { rng.random_range(0.5..2.0) } else { 1.0 };
                edges.push((i, j, w));
                edges.push((j, i, w));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

pub fn random_features(rng: &mut ChaCha8Rng, n: usize, f: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, f, |_, _| rng.random_range(-1.0..1.0))
}

/// Row-stochastic `N × K` matrix from softmax of uniform logits.
pub fn random_soft(rng: &mut ChaCha8Rng, n: usize, k: usize) -> DMatrix<f64> {
    let theta = DMatrix::from_fn(n, k, |_, _| rng.random_range(-2.0..2.0));
    gpool::select::softmax_rows(&theta)
}

/// Connected components by union-find.
pub fn components(g: &Graph) -> Vec<usize> {
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut c = x;
        while p[c] != r {
            let next = p[c];
            p[c] = r;
            c = next;
        }
        r
    }
    let n = g.num_nodes();
    let mut parent: Vec<usize> = (0..n).collect();
    for &(i, j, _) in g.edges() {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut ids = std::collections::HashMap::new();
    (0..n)
        .map(|v| {
            let r = find(&mut parent, v);
            let next = ids.len();
            *ids.entry(r).or_insert(next)
        })
        .collect()
}

/// All-pairs hop distances by BFS; `usize::MAX` when unreachable.
pub fn hop_distances(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.num_nodes();
    (0..n)
        .map(|s| {
            let mut d = vec![usize::MAX; n];
            d[s] = 0;
            let mut queue = std::collections::VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for (v, _) in g.neighbors(u) {
                    if d[v] == usize::MAX {
                        d[v] = d[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            d
        })
        .collect()
}

/// Two disjoint cliques of `m` nodes each.
pub fn two_cliques(m: usize) -> Graph {
    let mut pairs = Vec::new();
    for base in [0, m] {
        for i in 0..m {
            for j in i + 1..m {
                pairs.push((base + i, base + j));
            }
        }
    }
    Graph::undirected(2 * m, &pairs).unwrap()
}
