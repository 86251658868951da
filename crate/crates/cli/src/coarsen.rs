use std::fs;

use gpool::io::write_graph;
use gpool::pipeline::format::{encode_file, encode_record};
use gpool::pipeline::CacheRecord;
use gpool::{Graph, PoolError};

use crate::args::CoarsenArgs;
use crate::error::{CliError, CliResult};

pub fn run(a: &CoarsenArgs) -> CliResult {
    let pooler = a.pooler.build()?;
    let g = crate::input::load_graph(&a.input, a.pooler.symmetrize)?;
    let cache_path = a.cache.clone().unwrap_or_else(|| a.output.with_extension("tgpc"));
    let mut record = CacheRecord {
        graph_id: 0,
        fingerprint: pooler.fingerprint(),
        pooled: None,
    };
    let (so, adj) = match pooler.select_connect(&g) {
        Ok(r) => r,
        Err(e @ (PoolError::NoConvergence(_) | PoolError::PowerIterationNoConvergence(_))) => {
            fs::write(&cache_path, encode_file(std::iter::once(encode_record(&record))))?;
            eprintln!("N/C record written to {}", cache_path.display());
            return Err(e.into());
        }
        Err(e) => return Err(e.into()),
    };
    record.pooled = Some((so.clone(), adj.clone()));
    let out = pooler.finish(g.features(), so, adj)?;
    let k = out.select.num_clusters;
    let pooled = Graph::new(k, out.adj_pooled.entries().to_vec(), out.x_pooled, None)?;
    write_graph(&a.output, &pooled).map_err(CliError::at(&a.output))?;
    fs::write(&cache_path, encode_file(std::iter::once(encode_record(&record))))?;
    println!(
        "{} + {}: {} -> {} nodes, {} entries; wrote {} and {}",
        pooler.selector.kind.name(),
        pooler.connector.name(),
        g.num_nodes(),
        k,
        pooled.num_entries(),
        a.output.display(),
        cache_path.display()
    );
    Ok(())
}
