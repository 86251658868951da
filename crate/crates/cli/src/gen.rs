use std::fs;

use gpool::io::write_graph;
use gpool::sbm::{generate_sbm, SbmConfig};

use crate::args::SbmArgs;
use crate::error::{CliError, CliResult};

pub fn run(a: &SbmArgs) -> CliResult {
    let valid = |p: f64| (0.0..=1.0).contains(&p);
    if !valid(a.p_in) || !valid(a.p_out) || a.p_out > a.p_in {
        return Err(CliError::Usage(format!(
            "need 0 <= p_out <= p_in <= 1, got p_in = {}, p_out = {}",
            a.p_in, a.p_out
        )));
    }
    if a.p_out == a.p_in {
        eprintln!("warning: p_out = p_in, the block structure carries no information");
    }
    if a.nodes == 0 || a.classes == 0 || a.count == 0 {
        return Err(CliError::Usage("--nodes, --classes and --count must be positive".into()));
    }
    let config = |i: usize| SbmConfig {
        nodes: a.nodes,
        classes: a.classes,
        p_in: a.p_in,
        p_out: a.p_out,
        feature_dim: a.feature_dim,
        feature_shift: a.feature_shift,
        seed: a.seed.wrapping_add(i as u64),
    };
    if a.count == 1 {
        let g = generate_sbm(&config(0))?;
        write_graph(&a.out, &g).map_err(CliError::at(&a.out))?;
        println!("wrote {} ({} nodes, {} edges)", a.out.display(), g.num_nodes(), g.num_entries() / 2);
        return Ok(());
    }
    fs::create_dir_all(&a.out)?;
    for i in 0..a.count {
        let path = a.out.join(format!("graph_{i:04}.txt"));
        write_graph(&path, &generate_sbm(&config(i))?).map_err(CliError::at(&path))?;
    }
    println!("wrote {} graphs to {}", a.count, a.out.display());
    Ok(())
}
