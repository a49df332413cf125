use std::process::ExitCode;

use clap::Parser;

use vee_sgc::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    ExitCode::from(run(&cli) as u8)
}
