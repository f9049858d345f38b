mod args;
mod commands;
mod run;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let dir = cli.profile_dir.as_deref();
    let result = match cli.command {
        Command::Energy(a) => commands::energy(a, dir),
        Command::Breakeven(a) => commands::breakeven(a, dir),
        Command::Sweep(a) => commands::sweep(a, dir),
        Command::Landscape(a) => commands::landscape_cmd(a, dir),
        Command::Verify(a) => commands::verify(a),
        Command::Presets(a) => commands::presets(a, dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
