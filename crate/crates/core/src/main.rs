use std::process::ExitCode;

use clap::Parser;
use sparse_nerve::cli::{configure_threads, exit_code_for, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(cli)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("sparse-nerve: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
