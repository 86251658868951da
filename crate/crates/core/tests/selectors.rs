mod common;

use gpool::select::{laplacian_top_eigenvector, select_graclus, select_ndp, SelectorConfig, SelectorKind};
use gpool::{Graph, LaplacianKind};
use rand::Rng;

use common::*;

#[test]
fn graclus_is_a_maximal_matching() {
    let mut rng = rng(21);
    for t in 0..100 {
        let n = rng.random_range(1..=25);
        let g = random_graph(&mut rng, n, 0.2, t % 2 == 0);
        let so = select_graclus(&g, (t % 3 == 0).then_some(t)).unwrap();
        so.validate().unwrap();
        let labels: Vec<usize> = so.hard_labels().into_iter().map(Option::unwrap).collect();
        let mut members = vec![Vec::new(); so.num_clusters];
        for (v, &c) in labels.iter().enumerate() {
            members[c].push(v);
        }
        for m in &members {
            match m.as_slice() {
                [_] => {}
                [a, b] => assert!(g.adjacency().get(*a, *b) > 0.0, "pair {a},{b} not adjacent"),
                other => panic!("cluster {other:?}"),
            }
        }
        // No edge joins two singletons.
        for &(i, j, _) in g.edges() {
            if i != j {
                assert!(members[labels[i]].len() == 2 || members[labels[j]].len() == 2);
            }
        }
    }
}

/// Sign pattern of the top Laplacian eigenvector from a dense solver.
fn dense_top_side(g: &Graph) -> Vec<usize> {
    let l = g.laplacian(LaplacianKind::Combinatorial).unwrap().to_dense();
    let eig = l.symmetric_eigen();
    let top = eig.eigenvalues.imax();
    let mut v: Vec<f64> = eig.eigenvectors.column(top).iter().copied().collect();
    let mut pivot = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[pivot].abs() + 1e-9 {
            pivot = i;
        }
    }
    if v[pivot] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    (0..v.len()).filter(|&i| v[i] >= -1e-9).collect()
}

#[test]
fn ndp_on_bipartite_graphs_matches_dense_oracle() {
    let c4 = Graph::undirected(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
    let c6 = Graph::undirected(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)]).unwrap();
    let k23 = Graph::undirected(5, &[(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)]).unwrap();
    for (g, lambda, sides) in [
        (&c4, 4.0, [vec![0, 2], vec![1, 3]]),
        (&c6, 4.0, [vec![0, 2, 4], vec![1, 3, 5]]),
        (&k23, 5.0, [vec![0, 1], vec![2, 3, 4]]),
    ] {
        let (l, _) = laplacian_top_eigenvector(g, 1e-12, 100_000, 3).unwrap().unwrap();
        assert!((l - lambda).abs() < 1e-9);
        let kept = select_ndp(g, 1e-12, 100_000, 3).unwrap().kept_nodes.unwrap();
        assert!(sides.contains(&kept), "{kept:?}");
        if g.num_nodes() == 5 {
            assert_eq!(kept, dense_top_side(g));
        }
    }
}

#[test]
fn deterministic_selectors() {
    let mut rng = rng(22);
    for kind in [SelectorKind::Ndp, SelectorKind::Graclus, SelectorKind::Kmis, SelectorKind::Nmf, SelectorKind::Topk] {
        let mut cfg = SelectorConfig::new(kind);
        cfg.nmf_max_iters = 100_000;
        for _ in 0..5 {
            let n = rng.random_range(3..20);
            let g = random_connected(&mut rng, n, 0.2, true);
            let a = cfg.select(&g).unwrap();
            a.validate().unwrap();
            assert_eq!(a, cfg.select(&g).unwrap(), "{}", kind.name());
        }
    }
}

#[test]
fn node_selectors_keep_nodes() {
    let g = Graph::undirected(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
    let so = SelectorConfig::new(SelectorKind::Kmis).select(&g).unwrap();
    assert_eq!(so.num_clusters, 1);
    assert_eq!(so.kept_nodes, Some(vec![0]));
    for kind in [SelectorKind::Ndp, SelectorKind::Topk] {
        let so = SelectorConfig::new(kind).select(&g).unwrap();
        assert_eq!(so.kept_nodes.as_ref().unwrap().len(), so.num_clusters);
    }
}
