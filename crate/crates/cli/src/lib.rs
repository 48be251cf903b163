//! Experiment runner behind the `orbitlab` binary.
//!
//! A run reads one [`ExperimentConfig`], executes the requested command or
//! preset and writes `report.json` and `table.csv` to an output directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

mod commands;
pub mod config;
mod presets;

pub use config::{Command, ExperimentConfig, Preset};

pub const REPORT_FILE: &str = "report.json";
pub const TABLE_FILE: &str = "table.csv";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    Input(#[from] orbitlab_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl RunError {
    /// Process exit status for this error. A failed verdict is not an error
    /// and exits with 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Input(_) => 2,
            _ => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub command: Command,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    pub verdict: Verdict,
    pub config: ExperimentConfig,
    pub result: serde_json::Value,
}

/// Flat rows for plotting; every cell is already formatted.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        self.rows.push(row.into_iter().collect());
    }

    pub fn to_csv(&self) -> Result<String, RunError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| RunError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Shortest round-trip rendering with a '.' decimal point.
pub(crate) fn num(x: f64) -> String {
    format!("{x:?}")
}

pub(crate) fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Report,
    pub table: Table,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.report.verdict == Verdict::Pass
    }

    pub fn report_json(&self) -> Result<String, RunError> {
        let mut s = serde_json::to_string_pretty(&self.report)?;
        s.push('\n');
        Ok(s)
    }
}

pub(crate) struct Findings {
    pub pass: bool,
    pub result: serde_json::Value,
    pub table: Table,
}

/// Runs the experiment in memory.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    cfg.validate()?;
    let findings = match cfg.command {
        Command::Construct => commands::construct(cfg, false)?,
        Command::Certify => commands::construct(cfg, true)?,
        Command::Criterion => commands::criterion(cfg)?,
        Command::Probe => commands::probe(cfg)?,
        Command::Findim => commands::findim(cfg)?,
        Command::Spectrum => commands::spectrum_cmd(cfg)?,
        Command::Kernel => commands::kernel(cfg)?,
        Command::Jordan => commands::jordan(cfg)?,
        Command::Preset => presets::run(cfg, cfg.preset.expect("validated"))?,
    };
    Ok(Outcome {
        report: Report {
            command: cfg.command,
            preset: cfg.preset.filter(|_| cfg.command == Command::Preset),
            verdict: Verdict::from_bool(findings.pass),
            config: cfg.clone(),
            result: findings.result,
        },
        table: findings.table,
    })
}

/// Runs the experiment and writes `report.json` and `table.csv` into `out_dir`.
pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Outcome, RunError> {
    let outcome = execute(cfg)?;
    write_outputs(&outcome, out_dir)?;
    Ok(outcome)
}

pub fn write_outputs(outcome: &Outcome, out_dir: &Path) -> Result<(PathBuf, PathBuf), RunError> {
    fs::create_dir_all(out_dir)?;
    let report = out_dir.join(REPORT_FILE);
    let table = out_dir.join(TABLE_FILE);
    fs::write(&report, outcome.report_json()?)?;
    fs::write(&table, outcome.table.to_csv()?)?;
    Ok((report, table))
}
