mod args;
mod bench;
mod cluster;
mod coarsen;
mod error;
mod gen;
mod input;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, GenCommand};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(GenCommand::Sbm(a)) => gen::run(a),
        Command::Coarsen(a) => coarsen::run(a),
        Command::Cluster(a) => cluster::run(a),
        Command::Bench(a) => bench::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
