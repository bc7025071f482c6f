use std::process::ExitCode;

use clap::Parser;
use qlfseg::cli::{run, Cli};

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qlfseg: {e}");
            ExitCode::FAILURE
        }
    }
}
