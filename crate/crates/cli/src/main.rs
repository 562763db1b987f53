use std::process::ExitCode;

use clap::Parser;
use gradkit_cli::{run, Cli, RunConfig};

fn main() -> ExitCode {
    let config = RunConfig::from(Cli::parse());
    let stdout = std::io::stdout();
    match run(&config, &mut stdout.lock()) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gradkit: {e:#}");
            ExitCode::FAILURE
        }
    }
}
