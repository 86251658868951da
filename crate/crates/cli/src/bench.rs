use std::fs;
use std::path::PathBuf;

use gpool::timing::{run_bench, speedup, BenchConfig, BenchMode, BenchReport, MIN_REPEAT};
use gpool::Graph;
use serde::Serialize;

use crate::args::BenchArgs;
use crate::error::{CliError, CliResult};

#[derive(Debug, Serialize)]
struct JsonReport {
    schema: u32,
    command: &'static str,
    pooler: String,
    connect: &'static str,
    graphs: usize,
    batch_size: usize,
    repeat: usize,
    modes: Vec<JsonMode>,
}

#[derive(Debug, Serialize)]
struct JsonMode {
    mode: &'static str,
    /// `None` when some graph did not converge.
    mean_secs_per_batch: Option<f64>,
    std_secs_per_batch: Option<f64>,
    speedup_vs_direct: Option<f64>,
    setup_secs: f64,
    not_converged: usize,
}

fn load_dataset(dir: &PathBuf, symmetrize: bool) -> CliResult<Vec<Graph>> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && matches!(p.extension().and_then(|e| e.to_str()), Some("txt" | "graph")))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Usage(format!("no graph files in {}", dir.display())));
    }
    paths
        .iter()
        .map(|p| crate::input::load_graph(p, symmetrize))
        .collect()
}

fn fmt_secs(v: Option<f64>) -> String {
    v.map_or_else(|| "N/C".to_string(), |s| format!("{s:.6}"))
}

pub fn run(a: &BenchArgs) -> CliResult {
    if a.repeat < MIN_REPEAT {
        return Err(CliError::Usage(format!("--repeat must be at least {MIN_REPEAT}")));
    }
    if a.batch_size == 0 || a.jobs == 0 {
        return Err(CliError::Usage("--batch-size and --jobs must be positive".into()));
    }
    let pooler = a.pooler.build()?;
    let graphs = load_dataset(&a.input, a.pooler.symmetrize)?;

    let mut modes = vec![BenchMode::Direct];
    for &m in &a.mode {
        let m = BenchMode::from(m);
        if !modes.contains(&m) {
            modes.push(m);
        }
    }
    let mut reports: Vec<BenchReport> = Vec::new();
    for mode in modes {
        let cfg = BenchConfig {
            mode,
            repeat: a.repeat,
            batch_size: a.batch_size,
            jobs: a.jobs,
        };
        reports.push(run_bench(&graphs, &pooler, &cfg)?);
    }

    println!(
        "pooler {} + {}  graphs {}  batch {}  batches {}  repeat {}",
        pooler.selector.kind.name(),
        pooler.connector.name(),
        graphs.len(),
        a.batch_size,
        reports[0].num_batches,
        a.repeat
    );
    println!("{:<11} {:>14} {:>14} {:>10} {:>10}", "mode", "mean s/batch", "std s/batch", "speedup", "setup s");
    let direct = &reports[0];
    let mut json_modes = Vec::new();
    for r in &reports {
        let ratio = speedup(direct, r);
        let ratio_text = match (r.mode, ratio) {
            (BenchMode::Direct, _) => "1.0".to_string(),
            (_, Some(x)) => format!("{x:.1}x"),
            (_, None) => "N/C".to_string(),
        };
        println!(
            "{:<11} {:>14} {:>14} {:>10} {:>10.3}",
            r.mode.name(),
            fmt_secs(r.mean()),
            fmt_secs(r.std()),
            ratio_text,
            r.setup_secs
        );
        if r.not_converged > 0 {
            println!("{:<11} N/C on {} of {} graphs", "", r.not_converged, graphs.len());
        }
        json_modes.push(JsonMode {
            mode: r.mode.name(),
            mean_secs_per_batch: r.mean(),
            std_secs_per_batch: r.std(),
            speedup_vs_direct: ratio,
            setup_secs: r.setup_secs,
            not_converged: r.not_converged,
        });
    }
    if let Some(path) = &a.report {
        let report = JsonReport {
            schema: 1,
            command: "bench",
            pooler: pooler.selector.kind.name().to_string(),
            connect: pooler.connector.name(),
            graphs: graphs.len(),
            batch_size: a.batch_size,
            repeat: a.repeat,
            modes: json_modes,
        };
        fs::write(path, serde_json::to_string_pretty(&report)? + "\n")?;
    }
    Ok(())
}
