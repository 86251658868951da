//! Acceptance criteria. Runs without the libtest harness and prints one
//! `PASS`/`FAIL` line per criterion; exits nonzero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use gpool::metrics::{clust_acc, hungarian, macro_f1, nmi};
use gpool::objectives::{LossKind, Objective, ObjectiveSpec};
use gpool::pipeline::format::decode_file;
use gpool::pipeline::{
    block_diagonal_select, load_and_collate, precoarsen_dataset, precoarsen_to_bytes, CachedPooler, PoolCache,
};
use gpool::rcl::{connect_kron, connect_sparse, reduce};
use gpool::sbm::{generate_sbm, SbmConfig};
use gpool::select::{select_kmis, SelectorConfig, SelectorKind};
use gpool::solver::{cluster, SolverConfig};
use gpool::timing::{run_bench, speedup, BenchConfig, BenchMode};
use gpool::{
    global_pool, to_dense_batch, to_sparse_batch, Connector, CooMatrix, Graph, LaplacianKind, PoolError, Pooler,
    Readout, Reduce, SelectOutput,
};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;

use common::*;

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn clustering_quality() -> Outcome {
    let mut report = Vec::new();
    let mut ok = true;
    for (spec, bar) in [("dmon-mod,dmon-collapse", 0.85), ("mincut-cut,mincut-ortho", 0.75)] {
        let mut scores = Vec::new();
        let mut slowest = Duration::ZERO;
        for seed in 0..5 {
            let g = generate_sbm(&SbmConfig {
                seed,
                ..Default::default()
            })
            .map_err(|e| e.to_string())?;
            let mut cfg = SolverConfig::new(spec.parse().map_err(|e: PoolError| e.to_string())?, 5);
            cfg.max_iters = 2000;
            cfg.seed = seed;
            let t = Instant::now();
            let r = cluster(&g, &cfg).map_err(|e| e.to_string())?;
            slowest = slowest.max(t.elapsed());
            if r.best_loss > r.history[0].total || r.history.iter().any(|h| !h.total.is_finite()) {
                ok = false;
            }
            scores.push(nmi(g.labels().unwrap(), &r.labels).map_err(|e| e.to_string())?);
        }
        let m = mean(&scores);
        ok &= m >= bar && slowest < Duration::from_secs(60);
        report.push(format!("{spec} mean NMI {m:.3} (>= {bar}), slowest run {:.2}s", slowest.as_secs_f64()));
    }
    check(ok, report.join("; "))
}

fn two_clique_oracle() -> Outcome {
    let g = two_cliques(10);
    let truth = components(&g);
    let mut perfect = 0;
    for seed in 0..5 {
        let mut cfg = SolverConfig::new("mincut-cut,mincut-ortho".parse().unwrap(), 2);
        cfg.seed = seed;
        let r = cluster(&g, &cfg).map_err(|e| e.to_string())?;
        if nmi(&truth, &r.labels).unwrap() == 1.0 {
            perfect += 1;
        }
    }
    check(perfect >= 4, format!("{perfect}/5 seeds reach NMI = 1"))
}

/// Whether `s` sits within `1e-3` of a kink of an `|·|` term.
fn near_kink(kind: LossKind, s: &DMatrix<f64>, g: &Graph) -> bool {
    match kind {
        LossKind::Tv => g
            .edges()
            .iter()
            .any(|&(i, j, _)| (0..s.ncols()).any(|k| (s[(i, k)] - s[(j, k)]).abs() < 1e-3)),
        LossKind::AsymBalance => (0..s.ncols()).any(|k| {
            let m = s.column(k).mean();
            s.column(k).iter().any(|v| (v - m).abs() < 1e-3)
        }),
        _ => false,
    }
}

fn gradient_suite() -> Outcome {
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut worst_kind = LossKind::MincutCut;
    for (ki, kind) in LossKind::ALL.into_iter().enumerate() {
        let mut rng = rng(1000 + ki as u64);
        let mut done = 0;
        while done < 20 {
            let g = random_connected(&mut rng, 10, 0.4, true);
            let s = random_soft(&mut rng, 10, 3);
            if near_kink(kind, &s, &g) {
                continue;
            }
            let spec = ObjectiveSpec::new(vec![(kind, 1.0)]).unwrap();
            let obj = Objective::new(spec, &g);
            let lv = obj.term(kind, &s).map_err(|e| format!("{kind}: {e}"))?;
            let mut fd = DMatrix::zeros(10, 3);
            for idx in 0..30 {
                let mut plus = s.clone();
                plus[idx] += h;
                let mut minus = s.clone();
                minus[idx] -= h;
                let fp = obj.term(kind, &plus).unwrap().value;
                let fm = obj.term(kind, &minus).unwrap().value;
                fd[idx] = (fp - fm) / (2.0 * h);
            }
            let scale = fd.norm().max(lv.grad_s.norm()).max(1e-8);
            let rel = (&lv.grad_s - &fd).norm() / scale;
            if rel > worst {
                worst = rel;
                worst_kind = kind;
            }
            done += 1;
        }
    }
    check(
        worst <= 1e-4,
        format!("10 losses x 20 instances, worst relative error {worst:.2e} ({worst_kind})"),
    )
}

/// Effective resistances between all pairs of `nodes` from the
/// pseudoinverse of the combinatorial Laplacian.
fn resistances(g: &Graph, nodes: &[usize]) -> Vec<f64> {
    let lap = g.laplacian(LaplacianKind::Combinatorial).unwrap().to_dense();
    let pinv = lap.pseudo_inverse(1e-12).unwrap();
    let mut out = Vec::new();
    for (a, &i) in nodes.iter().enumerate() {
        for &j in &nodes[a + 1..] {
            out.push(pinv[(i, i)] + pinv[(j, j)] - 2.0 * pinv[(i, j)]);
        }
    }
    out
}

fn kron_oracle() -> Outcome {
    let mut rng = rng(4);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.random_range(3..=10);
        let g = random_connected(&mut rng, n, 0.3, true);
        let mut nodes: Vec<usize> = (0..n).collect();
        nodes.shuffle(&mut rng);
        let mut kept = nodes[..rng.random_range(2..n)].to_vec();
        kept.sort_unstable();
        let before = resistances(&g, &kept);
        let reduced = connect_kron(&g, &kept, 0.0).map_err(|e| e.to_string())?;
        let gk = Graph::from_edges(kept.len(), reduced.into_entries()).unwrap();
        let after = resistances(&gk, &(0..kept.len()).collect::<Vec<_>>());
        for (b, a) in before.iter().zip(&after) {
            worst = worst.max((b - a).abs());
        }
    }
    check(worst <= 1e-8, format!("50 graphs, max resistance deviation {worst:.2e}"))
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    // Lexicographic order.
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..k).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (1..k).rev().find(|&i| p[i - 1] < p[i]) else {
            break;
        };
        let j = (i..k).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
    }
    out
}

/// Every maximal set of nodes pairwise more than `k` hops apart.
fn maximal_k_independent_sets(dist: &[Vec<usize>], k: usize) -> Vec<Vec<usize>> {
    let n = dist.len();
    let independent = |set: &[usize]| {
        set.iter()
            .enumerate()
            .all(|(a, &u)| set[a + 1..].iter().all(|&v| dist[u][v] > k))
    };
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        let set: Vec<usize> = (0..n).filter(|&v| mask & (1 << v) != 0).collect();
        if !independent(&set) {
            continue;
        }
        let maximal = (0..n)
            .filter(|v| !set.contains(v))
            .all(|v| set.iter().any(|&u| dist[u][v] <= k));
        if maximal {
            out.push(set);
        }
    }
    out
}

fn algebra_oracles() -> Outcome {
    let mut rng = rng(5);
    // connect_sparse against dense SᵀAS.
    let mut worst: f64 = 0.0;
    for t in 0..100 {
        let n = rng.random_range(1..=16);
        let g = random_graph(&mut rng, n, 0.3, true);
        let k = rng.random_range(1..=n);
        let so = if t % 2 == 0 {
            let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
            SelectOutput::from_labels(&labels, k)
        } else {
            SelectOutput::dense(random_soft(&mut rng, n, k))
        };
        let sparse = connect_sparse(&g, &so, false).map_err(|e| e.to_string())?.to_dense();
        let s = so.to_dense();
        let dense = s.transpose() * g.dense_adjacency() * &s;
        worst = worst.max((sparse - dense).abs().max());
    }
    if worst > 1e-12 {
        return Err(format!("connect_sparse deviates from dense SᵀAS by {worst:.2e}"));
    }

    // Hungarian against brute force.
    for t in 0..200 {
        let k = rng.random_range(1..=6);
        let cost: Vec<Vec<f64>> = (0..k)
            .map(|_| {
                (0..k)
                    .map(|_| {
                        if t % 2 == 0 {
                            rng.random_range(0..4) as f64
                        } else {
                            rng.random_range(-5.0..5.0)
                        }
                    })
                    .collect()
            })
            .collect();
        let total = |p: &[usize]| p.iter().enumerate().map(|(r, &c)| cost[r][c]).sum::<f64>();
        let perms = permutations(k);
        let best = perms.iter().map(|p| total(p)).fold(f64::INFINITY, f64::min);
        let expected = perms.iter().find(|p| total(p) <= best + 1e-9).unwrap();
        let got = hungarian(&cost).map_err(|e| e.to_string())?;
        if &got != expected {
            return Err(format!("hungarian {got:?} != brute force {expected:?} on {cost:?}"));
        }
    }

    // KMIS against enumeration.
    let mut checked = 0;
    for _ in 0..100 {
        let n = rng.random_range(1..=12);
        let g = random_graph(&mut rng, n, 0.25, false);
        let dist = hop_distances(&g);
        for k in [1, 2] {
            let so = select_kmis(&g, k).map_err(|e| e.to_string())?;
            let kept = so.kept_nodes.clone().unwrap();
            let mut sorted = kept.clone();
            sorted.sort_unstable();
            if !maximal_k_independent_sets(&dist, k).contains(&sorted) {
                return Err(format!("kmis k={k} kept {kept:?} is not a maximal {k}-independent set"));
            }
            // Every node joins a hop-nearest kept node.
            for (v, c) in so.hard_labels().into_iter().enumerate() {
                let c = c.ok_or("unassigned node")?;
                let nearest = kept.iter().map(|&u| dist[u][v]).min().unwrap();
                if dist[kept[c]][v] != nearest {
                    return Err(format!("node {v} not assigned to a nearest kept node"));
                }
            }
            checked += 1;
        }
    }
    Ok(format!(
        "connect_sparse max deviation {worst:.1e} on 100 instances; hungarian 200/200; kmis {checked} enumerations"
    ))
}

fn efficiency() -> Outcome {
    let graphs: Vec<Graph> = (0..64)
        .map(|seed| {
            generate_sbm(&SbmConfig {
                nodes: 2000,
                classes: 5,
                p_in: 0.025,
                p_out: 0.00125,
                feature_dim: 4,
                feature_shift: 1.0,
                seed,
            })
            .unwrap()
        })
        .collect();
    let edges = graphs.iter().map(|g| g.num_entries() / 2).sum::<usize>() / graphs.len();
    let mut report = vec![format!("mean {edges} edges")];
    let mut ok = true;
    for (kind, bar) in [(SelectorKind::Ndp, 20.0), (SelectorKind::Kmis, 2.0)] {
        let pooler = Pooler::new(SelectorConfig::new(kind), Connector::default()).unwrap();
        let bench = |mode| {
            let mut cfg = BenchConfig::new(mode);
            cfg.batch_size = 32;
            run_bench(&graphs, &pooler, &cfg).map_err(|e| e.to_string())
        };
        let direct = bench(BenchMode::Direct)?;
        let pre = bench(BenchMode::Precoarsen)?;
        let ratio = speedup(&direct, &pre).ok_or("N/C")?;
        ok &= ratio >= bar;
        report.push(format!("{} precoarsen speedup {ratio:.1}x (>= {bar})", kind.name()));
    }

    let pooler = Pooler::new(SelectorConfig::new(SelectorKind::Ndp), Connector::default()).unwrap();
    let g = &graphs[0];
    let mut ratios = Vec::new();
    for _ in 0..3 {
        let cached = CachedPooler::new(pooler.clone());
        let t = Instant::now();
        let first = cached.pool(g).map_err(|e| e.to_string())?;
        let t1 = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let second = cached.pool(g).map_err(|e| e.to_string())?;
        let t2 = t.elapsed().as_secs_f64();
        ok &= first == second && cached.select_calls() == 1;
        ratios.push(t1 / t2);
    }
    ratios.sort_by(f64::total_cmp);
    ok &= ratios[1] >= 5.0;
    report.push(format!("cached second call {:.1}x faster (>= 5)", ratios[1]));
    check(ok, report.join("; "))
}

fn pipeline_exactness() -> Outcome {
    let mut rng = rng(7);
    let graphs: Vec<Graph> = (0..40)
        .map(|_| {
            let n = rng.random_range(2..=30);
            let x = random_features(&mut rng, n, 3);
            random_connected(&mut rng, n, 0.15, true).with_features(x).unwrap()
        })
        .collect();
    let poolers = [
        (SelectorKind::Graclus, Connector::default()),
        (SelectorKind::Kmis, Connector::default()),
        (SelectorKind::Kmis, Connector::kron()),
        (SelectorKind::Ndp, Connector::kron()),
        (SelectorKind::Topk, Connector::Kron { sparsify_eps: 0.0 }),
        (SelectorKind::Nmf, Connector::default()),
    ];
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut caches = Vec::new();
    for (p, &(kind, conn)) in poolers.iter().enumerate() {
        let mut sel = SelectorConfig::new(kind);
        sel.nmf_max_iters = 100_000;
        let pooler = Pooler::new(sel, conn).unwrap();
        let path = dir.path().join(format!("{p}.tgpc"));
        precoarsen_dataset(&graphs, &pooler, &path, 2).map_err(|e| e.to_string())?;
        let bytes = std::fs::read(&path).unwrap();
        // Byte-identical round trip and rerun.
        let reencoded = gpool::pipeline::format::encode_file(
            decode_file(&bytes)
                .map_err(|e| e.to_string())?
                .iter()
                .map(gpool::pipeline::format::encode_record)
                .collect::<Vec<_>>()
                .into_iter(),
        );
        if reencoded != bytes || precoarsen_to_bytes(&graphs, &pooler, 1).unwrap() != bytes {
            return Err(format!("{} file does not round-trip", kind.name()));
        }
        let cache = PoolCache::open(&path, &pooler).map_err(|e| e.to_string())?;
        caches.push((pooler, cache, bytes));
    }

    for t in 0..50 {
        let (pooler, cache, _) = &caches[t % caches.len()];
        let size = rng.random_range(1..=8);
        let ids: Vec<usize> = (0..size).map(|_| rng.random_range(0..graphs.len())).collect();
        let batch = load_and_collate(cache, &graphs, &ids).map_err(|e| e.to_string())?;
        let direct: Vec<(SelectOutput, CooMatrix)> =
            ids.iter().map(|&i| pooler.select_connect(&graphs[i]).unwrap()).collect();
        let selects: Vec<&SelectOutput> = direct.iter().map(|d| &d.0).collect();
        let adjs: Vec<&CooMatrix> = direct.iter().map(|d| &d.1).collect();
        if batch.select_block != block_diagonal_select(&selects)
            || batch.adj_pooled_union != CooMatrix::block_diagonal(&adjs)
        {
            return Err(format!("batch {t} ({}) differs from direct pooling", pooler.selector.kind.name()));
        }
        let pooled = batch.reduce(Reduce::Mean).map_err(|e| e.to_string())?;
        let readout = global_pool(
            Readout::Sparse {
                x: &pooled,
                batch: &batch.batch_pooled,
                num_graphs: ids.len(),
            },
            Reduce::Sum,
        )
        .unwrap();
        for (b, &i) in ids.iter().enumerate() {
            let own = reduce(graphs[i].features(), selects[b], Reduce::Mean).unwrap();
            let expect = own.row_sum();
            if (readout.row(b) - expect).abs().max() > 1e-12 {
                return Err(format!("batch {t}: reduce+readout differs for graph {i}"));
            }
        }
    }

    // CRC fuzzing: flip one bit inside a record payload or checksum.
    let mut detected = 0;
    for trial in 0..100 {
        let bytes = &caches[trial % caches.len()].2;
        let mut spans = Vec::new();
        let mut pos = 14;
        while pos < bytes.len() {
            let len = u64::from_le_bytes(bytes[pos..pos + 8].try_into().unwrap()) as usize;
            spans.push((pos + 8, pos + 8 + len + 4));
            pos += 8 + len + 4;
        }
        let (lo, hi) = spans[rng.random_range(0..spans.len())];
        let mut corrupt = bytes.clone();
        corrupt[rng.random_range(lo..hi)] ^= 1 << rng.random_range(0..8);
        if matches!(decode_file(&corrupt), Err(PoolError::CorruptRecord { .. })) {
            detected += 1;
        }
    }
    check(
        detected == 100,
        format!("50 batches bit-exact; {} files round-trip; CRC fuzz {detected}/100 detected", caches.len()),
    )
}

fn batching_equivalence() -> Outcome {
    let mut rng = rng(8);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let b = rng.random_range(1..=6);
        let graphs: Vec<Graph> = (0..b)
            .map(|_| {
                let n = rng.random_range(1..=10);
                let x = random_features(&mut rng, n, 3);
                random_graph(&mut rng, n, 0.3, false).with_features(x).unwrap()
            })
            .collect();
        let refs: Vec<&Graph> = graphs.iter().collect();
        let dense = to_dense_batch(&refs).unwrap();
        let sparse = to_sparse_batch(&refs).unwrap();
        for aggr in [Reduce::Sum, Reduce::Mean, Reduce::Max] {
            let d = global_pool(
                Readout::Dense {
                    feat: &dense.feat,
                    mask: &dense.mask,
                },
                aggr,
            )
            .map_err(|e| e.to_string())?;
            let s = global_pool(
                Readout::Sparse {
                    x: sparse.union.features(),
                    batch: &sparse.batch,
                    num_graphs: sparse.num_graphs,
                },
                aggr,
            )
            .map_err(|e| e.to_string())?;
            worst = worst.max((d - s).abs().max());
        }
    }
    check(worst <= 1e-9, format!("100 batches x sum/mean/max, max deviation {worst:.1e}"))
}

fn metric_fixtures() -> Outcome {
    let a = nmi(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap();
    let b = clust_acc(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap();
    let c = macro_f1(&[0, 0, 0, 1], &[0, 0, 1, 1]).unwrap();
    check(
        a == 0.0 && b == 0.5 && (c - 11.0 / 15.0).abs() < 1e-15,
        format!("nmi {a}, clust_acc {b}, macro_f1 {c}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("clustering quality on SBM", clustering_quality),
        ("two-clique oracle", two_clique_oracle),
        ("gradient suite", gradient_suite),
        ("Kron effective resistance", kron_oracle),
        ("algebra oracles", algebra_oracles),
        ("efficiency", efficiency),
        ("pipeline exactness", pipeline_exactness),
        ("batching equivalence", batching_equivalence),
        ("metric fixtures", metric_fixtures),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {}. {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}. {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
