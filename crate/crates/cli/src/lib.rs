//! Reproducible verification runs over the `steerkit` toolkit.
//!
//! [`run`] executes one [`RunConfig`] and returns a [`Report`] whose header
//! records the configuration, toolkit version, grid checksum and a
//! timestamp. Everything except the timestamp is a deterministic function
//! of the configuration.

pub mod commands;
pub mod config;
pub mod report;

use std::path::Path;

use anyhow::Context;

pub use config::{Command, RunConfig};
pub use report::{emit_plot_data, Counterexample, Report, Status};

use report::{counterexample_path, Header, SCHEMA_VERSION};

/// Runs `config`, honouring `--replay`. Failing inputs are written to the
/// counterexample file named in the returned report.
pub fn run(config: &RunConfig) -> anyhow::Result<Report> {
    let (command, replay) = match &config.replay {
        Some(path) => {
            let ce = Counterexample::read(path)?;
            anyhow::ensure!(
                ce.command.name() == config.command.name(),
                "{} holds a `{}` run; replay it with `steerkit {} --replay ...`",
                path.display(),
                ce.command.name(),
                ce.command.name()
            );
            let inputs = ce.inputs();
            (ce.command, (!inputs.is_empty()).then_some(inputs))
        }
        None => (config.command.clone(), None),
    };
    let want_scan = config.csv.is_some();
    let outcome = match &command {
        Command::Simulate3(a) => commands::simulate3(a, replay),
        Command::Simulate4(a) => commands::simulate4(a, replay),
        Command::LhsCheck(a) => commands::lhs_check(a, replay),
        Command::Radius(a) => commands::radius(a, want_scan),
        Command::Farkas(a) => commands::farkas(a),
        Command::Separation(a) => commands::separation(a, want_scan),
        Command::Stress(a) => commands::stress(a, replay),
    }?;

    let counterexample = if outcome.failures.is_empty() {
        None
    } else {
        let path = counterexample_path(config.out.as_deref());
        let ce = Counterexample {
            schema_version: SCHEMA_VERSION,
            command: command.clone(),
            failures: outcome.failures.clone(),
        };
        write(&path, &serde_json::to_string_pretty(&ce)?)?;
        Some(path)
    };

    let mut effective = config.clone();
    effective.command = command.clone();
    Ok(Report {
        header: Header {
            schema_version: SCHEMA_VERSION,
            toolkit_version: steerkit::VERSION,
            command: command.name(),
            config: effective,
            grid: outcome.grid,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        },
        status: outcome.status,
        summary: outcome.summary,
        results: outcome.results,
        failures: outcome.failures,
        counterexample,
        plot: outcome.plot,
    })
}

/// Writes the report and plot data where `config` asks for them; the
/// report goes to standard output when no `--out` is given.
pub fn write_outputs(config: &RunConfig, report: &Report) -> anyhow::Result<()> {
    let json = report.to_json()?;
    match &config.out {
        Some(path) => write(path, &json)?,
        None => println!("{json}"),
    }
    if let Some(path) = &config.csv {
        write(path, &emit_plot_data(report)?)?;
    }
    Ok(())
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
