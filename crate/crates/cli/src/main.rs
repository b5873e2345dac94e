use std::process::ExitCode;

use clap::Parser;
use steerkit_cli::{run, write_outputs, RunConfig, Status};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let config = RunConfig::parse();
    let result = run(&config).and_then(|report| {
        write_outputs(&config, &report)?;
        Ok(report)
    });
    match result {
        Ok(report) => {
            if let Some(path) = &report.counterexample {
                eprintln!("{:?}: counterexample written to {}", report.status, path.display());
            }
            ExitCode::from(report.status.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(Status::Indeterminate.exit_code())
        }
    }
}
