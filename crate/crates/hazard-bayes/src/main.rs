use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(hazard_bayes::cli::run(std::env::args()) as u8)
}
