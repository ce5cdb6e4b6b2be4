use std::process::ExitCode;

use clap::Parser;
use tauberian_lab::cli::{init_threads, run, Cli, EXIT_INPUT};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_INPUT as u8);
    }
    ExitCode::from(run(&cli) as u8)
}
