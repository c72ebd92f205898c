use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod failure;

use args::Cli;
use failure::Failure;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.jobs {
        Some(jobs) => match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            Ok(pool) => pool.install(|| commands::run(&cli)),
            Err(e) => Err(Failure::internal(format!("cannot start {jobs} worker threads: {e}"))),
        },
        None => commands::run(&cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code())
        }
    }
}
