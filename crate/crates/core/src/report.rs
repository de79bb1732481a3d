//! Invariant reports and artifact writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// Header comment of every CSV artifact.
pub const CSV_SCHEMA_LINE: &str = "# squeezelab-schema v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    /// Measured and reported without a pass/fail verdict.
    Info,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantEntry {
    pub name: String,
    pub status: Status,
    pub measured: Option<f64>,
    pub tolerance: Option<f64>,
    /// Hard invariants decide the exit status.
    pub hard: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct InvariantReport {
    pub scenario: String,
    pub entries: Vec<InvariantEntry>,
}

impl InvariantReport {
    pub fn new(scenario: impl Into<String>) -> Self {
        Self { scenario: scenario.into(), entries: Vec::new() }
    }

    fn push(&mut self, name: &str, status: Status, measured: Option<f64>, tolerance: Option<f64>, hard: bool, detail: impl Into<String>) {
        self.entries.push(InvariantEntry { name: name.into(), status, measured, tolerance, hard, detail: detail.into() });
    }

    /// Hard check that `measured ≤ tolerance` (NaN fails).
    pub fn at_most(&mut self, name: &str, measured: f64, tolerance: f64, detail: impl Into<String>) {
        let status = if measured <= tolerance { Status::Pass } else { Status::Fail };
        self.push(name, status, Some(measured), Some(tolerance), true, detail);
    }

    /// Hard check that `measured ≥ threshold` (NaN fails).
    pub fn at_least(&mut self, name: &str, measured: f64, threshold: f64, detail: impl Into<String>) {
        let status = if measured >= threshold { Status::Pass } else { Status::Fail };
        self.push(name, status, Some(measured), Some(threshold), true, detail);
    }

    pub fn info(&mut self, name: &str, measured: f64, detail: impl Into<String>) {
        self.push(name, Status::Info, Some(measured), None, false, detail);
    }

    pub fn skipped(&mut self, name: &str, reason: impl Into<String>) {
        self.push(name, Status::Skipped, None, None, false, reason);
    }

    /// A stage that could not run to completion.
    pub fn failure(&mut self, name: &str, detail: impl Into<String>) {
        self.push(name, Status::Fail, None, None, true, detail);
    }

    pub fn get(&self, name: &str) -> Option<&InvariantEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn all_hard_pass(&self) -> bool {
        self.entries.iter().all(|e| !e.hard || e.status == Status::Pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &InvariantEntry> {
        self.entries.iter().filter(|e| e.hard && e.status != Status::Pass)
    }
}

/// Writes rows as CSV under the schema comment line.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{CSV_SCHEMA_LINE}")?;
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}
