use std::path::Path;

use gpool::io::read_graph;
use gpool::Graph;

use crate::error::{CliError, CliResult};

pub fn load_graph(path: &Path, symmetrize: bool) -> CliResult<Graph> {
    let g = read_graph(path).map_err(CliError::at(path))?;
    Ok(if symmetrize { g.symmetrized()? } else { g })
}
