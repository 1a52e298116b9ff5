use std::process::ExitCode;

use clap::Parser;
use friedlander_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(d) = e.diagnostic() {
                eprintln!("{d}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
