use std::process::ExitCode;

use clap::Parser;
use mlsa_harness::{run, Cli, ExperimentConfig, HarnessError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mlsa: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    let cfg = ExperimentConfig::from_cli(cli)?;
    let report = run(&cfg)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for path in report.write(&cfg.out_dir, cfg.svg)? {
        println!("{}", path.display());
    }
    Ok(())
}
