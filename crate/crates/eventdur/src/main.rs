use std::process::ExitCode;

use clap::Parser;
use eventdur::args::{Cli, Command};
use eventdur::run::{replay, run};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let dir = cli.out.resolve();
    let result = match &cli.command {
        Command::Run(config) => run(config, &dir),
        Command::Replay { manifest, verify } => replay(manifest, &dir, *verify),
    };
    match result {
        Ok(manifest) => {
            for a in &manifest.artifacts {
                println!("{}", dir.join(&a.file).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.report());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
