use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use qpcodes_cli::{run, Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &output.text).map_err(|e| (path.clone(), e)),
        None => {
            print!("{}", output.text);
            Ok(())
        }
    };
    if let Err((path, e)) = written {
        eprintln!("error: cannot write {}: {e}", path.display());
        return ExitCode::from(1);
    }
    if let Some(script) = &output.script {
        let target: Option<PathBuf> = match &cli.command {
            Command::Figure(args) if args.script.is_some() => args.script.clone(),
            _ => cli.out.as_ref().map(|p| p.with_extension("gp")),
        };
        if let Some(path) = target {
            if let Err(e) = std::fs::write(&path, script) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
    }
    ExitCode::SUCCESS
}
