use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use gpool::metrics::{clust_acc, macro_f1, nmi};
use gpool::objectives::ObjectiveSpec;
use gpool::solver::{cluster, SolverConfig};
use serde::Serialize;

use crate::args::ClusterArgs;
use crate::error::{CliError, CliResult};

#[derive(Debug, Serialize)]
struct Report {
    schema: u32,
    command: &'static str,
    config: ConfigEcho,
    graph: GraphSummary,
    history: HistorySummary,
    metrics: Option<Metrics>,
    labels: Vec<usize>,
}

#[derive(Debug, Serialize)]
struct ConfigEcho {
    objective: String,
    k: usize,
    iters: usize,
    lr: f64,
    patience: usize,
    seed: u64,
    smoothing: usize,
    hosc_alpha: f64,
    input: String,
}

#[derive(Debug, Serialize)]
struct GraphSummary {
    nodes: usize,
    edges: usize,
    features: usize,
}

#[derive(Debug, Serialize)]
struct HistorySummary {
    iterations: usize,
    converged_at: usize,
    initial_loss: f64,
    final_loss: f64,
    best_loss: f64,
    best_iter: usize,
    final_terms: BTreeMap<String, f64>,
}

#[derive(Debug, Serialize)]
struct Metrics {
    nmi: f64,
    clust_acc: f64,
    macro_f1: f64,
}

fn read_labels(path: &Path) -> CliResult<Vec<usize>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            l.trim()
                .parse()
                .map_err(|_| CliError::Input(format!("{}:{}: bad label `{}`", path.display(), n + 1, l.trim())))
        })
        .collect()
}

pub fn run(a: &ClusterArgs) -> CliResult {
    if a.k < 2 {
        return Err(CliError::Usage(format!("--k must be at least 2, got {}", a.k)));
    }
    let mut objective: ObjectiveSpec = a.objective.parse()?;
    objective.hosc_alpha = a.hosc_alpha;
    let g = crate::input::load_graph(&a.input, a.symmetrize)?;
    let truth = match &a.labels {
        Some(p) => {
            let l = read_labels(p)?;
            if l.len() != g.num_nodes() {
                return Err(CliError::Input(format!(
                    "{} has {} labels for {} nodes",
                    p.display(),
                    l.len(),
                    g.num_nodes()
                )));
            }
            Some(l)
        }
        None => g.labels().map(<[usize]>::to_vec),
    };
    if a.metrics && truth.is_none() {
        return Err(CliError::MissingLabels(
            "metrics requested but the graph has no labels and no --labels file was given".into(),
        ));
    }

    let cfg = SolverConfig {
        objective: objective.clone(),
        num_clusters: a.k,
        max_iters: a.iters,
        lr: a.lr,
        patience: a.patience,
        seed: a.seed,
        feature_smoothing_steps: a.smoothing,
    };
    let r = cluster(&g, &cfg)?;
    let metrics = match &truth {
        Some(t) => Some(Metrics {
            nmi: nmi(t, &r.labels)?,
            clust_acc: clust_acc(t, &r.labels)?,
            macro_f1: macro_f1(t, &r.labels)?,
        }),
        None => None,
    };
    let last = r.history.last().expect("history is never empty");
    let report = Report {
        schema: 1,
        command: "cluster",
        config: ConfigEcho {
            objective: objective.to_string(),
            k: a.k,
            iters: a.iters,
            lr: a.lr,
            patience: a.patience,
            seed: a.seed,
            smoothing: a.smoothing,
            hosc_alpha: a.hosc_alpha,
            input: a.input.display().to_string(),
        },
        graph: GraphSummary {
            nodes: g.num_nodes(),
            edges: g.num_entries(),
            features: g.num_features(),
        },
        history: HistorySummary {
            iterations: r.history.len(),
            converged_at: r.converged_at,
            initial_loss: r.history[0].total,
            final_loss: last.total,
            best_loss: r.best_loss,
            best_iter: r.best_iter,
            final_terms: last.terms.iter().map(|(k, v)| (k.name().to_string(), *v)).collect(),
        },
        metrics,
        labels: r.labels.clone(),
    };
    let json = serde_json::to_string_pretty(&report)?;
    match &a.report {
        Some(path) => {
            fs::write(path, json + "\n")?;
            match &report.metrics {
                Some(m) => println!(
                    "nmi {:.4}  clust_acc {:.4}  macro_f1 {:.4}  best loss {:.6} at iter {}",
                    m.nmi, m.clust_acc, m.macro_f1, r.best_loss, r.best_iter
                ),
                None => println!("best loss {:.6} at iter {}", r.best_loss, r.best_iter),
            }
        }
        None => println!("{json}"),
    }
    if let Some(path) = &a.assignments {
        let text: String = r.labels.iter().map(|l| format!("{l}\n")).collect();
        fs::write(path, text)?;
    }
    Ok(())
}
