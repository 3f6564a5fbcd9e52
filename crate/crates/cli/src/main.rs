use std::process::ExitCode;

use clap::Parser;

mod commands;
mod input;

use commands::{Cli, Failure};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, message }) => {
            eprintln!("bhvkit: {message}");
            ExitCode::from(code)
        }
    }
}
