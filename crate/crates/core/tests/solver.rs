mod common;

use gpool::metrics::clust_acc;
use gpool::sbm::{generate_sbm, SbmConfig};
use gpool::solver::{cluster, cluster_from_logits, initial_logits, SolverConfig};

#[test]
fn relabeling_initial_columns_permutes_labels() {
    let g = generate_sbm(&SbmConfig {
        nodes: 120,
        classes: 3,
        ..Default::default()
    })
    .unwrap();
    for spec in ["mincut-cut,mincut-ortho", "dmon-mod,dmon-collapse", "diff-lp,diff-ent"] {
        let mut cfg = SolverConfig::new(spec.parse().unwrap(), 3);
        cfg.max_iters = 300;
        let theta = initial_logits(&g, &cfg);
        let perm = [1, 2, 0];
        let permuted = theta.select_columns(perm.iter());
        let a = cluster_from_logits(&g, &cfg, theta).unwrap();
        let b = cluster_from_logits(&g, &cfg, permuted).unwrap();
        assert_eq!(clust_acc(&a.labels, &b.labels).unwrap(), 1.0, "{spec}");
    }
}

#[test]
fn best_loss_never_exceeds_initial() {
    let g = common::two_cliques(6);
    for seed in 0..5 {
        let mut cfg = SolverConfig::new("justbalance,tv".parse().unwrap(), 2);
        cfg.seed = seed;
        cfg.max_iters = 400;
        let r = cluster(&g, &cfg).unwrap();
        assert!(!r.history.is_empty());
        assert!(r.best_loss <= r.history[0].total);
        assert!(r.history.iter().all(|h| h.total.is_finite()));
        assert_eq!(r.labels.len(), g.num_nodes());
    }
}
