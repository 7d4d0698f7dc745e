use std::process::ExitCode;

use clap::Parser;
use evdep_cli::commands::StatusReport;
use evdep_cli::io::to_json;
use evdep_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("evdep {}: {e}", cli.command.name());
            if let Ok(s) = to_json(&StatusReport::failure(cli.command.name(), &e)) {
                print!("{s}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
