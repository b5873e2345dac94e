use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use steerkit::{GridSummary, PovmFile};

use crate::config::{Command, RunConfig};

pub const SCHEMA_VERSION: u32 = 1;

/// Reference visibilities drawn as horizontal lines in plots.
pub const REFERENCE_LINES: [(&str, f64); 3] = [("5/12", 5.0 / 12.0), ("0.4517", 0.4517), ("1/2", 0.5)];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Indeterminate,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Indeterminate => 2,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Header {
    pub schema_version: u32,
    pub toolkit_version: &'static str,
    pub command: &'static str,
    pub config: RunConfig,
    pub grid: Option<GridSummary>,
    pub timestamp: String,
}

/// One POVM fed to a sweep, in replayable form.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Input {
    pub index: usize,
    pub seed: Option<u64>,
    pub povm: PovmFile,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Failure {
    pub input: Option<Input>,
    pub reason: String,
}

/// Everything `--replay` needs to re-run a failure.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Counterexample {
    pub schema_version: u32,
    pub command: Command,
    pub failures: Vec<Failure>,
}

impl Counterexample {
    pub fn read(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let ce: Counterexample =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        anyhow::ensure!(
            ce.schema_version == SCHEMA_VERSION,
            "counterexample schema {} is not supported",
            ce.schema_version
        );
        Ok(ce)
    }

    pub fn inputs(&self) -> Vec<Input> {
        self.failures.iter().filter_map(|f| f.input.clone()).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PlotRow {
    pub series: String,
    pub label: String,
    pub x: f64,
    pub y: f64,
}

impl PlotRow {
    pub fn new(series: &str, label: impl ToString, x: f64, y: f64) -> Self {
        PlotRow {
            series: series.to_string(),
            label: label.to_string(),
            x,
            y,
        }
    }
}

/// What a command produces before the header is attached.
#[derive(Debug)]
pub struct Outcome {
    pub status: Status,
    pub grid: Option<GridSummary>,
    pub summary: Value,
    pub results: Value,
    pub failures: Vec<Failure>,
    pub plot: Vec<PlotRow>,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub header: Header,
    pub status: Status,
    pub summary: Value,
    pub results: Value,
    pub failures: Vec<Failure>,
    pub counterexample: Option<PathBuf>,
    #[serde(skip)]
    pub plot: Vec<PlotRow>,
}

impl Report {
    pub fn to_json(&self) -> anyhow::Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Plot rows of `report` as CSV text, followed by the reference lines.
pub fn emit_plot_data(report: &Report) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &report.plot {
        w.serialize(row)?;
    }
    for (label, r) in REFERENCE_LINES {
        w.serialize(PlotRow::new("reference", label, r, r))?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// `report.json` -> `report.counterexample.json`; without `--out` the file
/// goes to the working directory.
pub fn counterexample_path(out: Option<&Path>) -> PathBuf {
    match out {
        Some(p) => p.with_extension("counterexample.json"),
        None => PathBuf::from("steerkit-counterexample.json"),
    }
}
