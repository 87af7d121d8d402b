//! Result rows and their CSV / JSON serialization.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{ScenarioConfig, ScenarioKind};

/// How a row's `value` is judged against `reference` and `tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    /// `|value − reference| ≤ tolerance`
    Within,
    /// `value ≥ reference − tolerance`
    AtLeast,
    /// `value ≤ reference + tolerance`
    AtMost,
    /// Reported only; always passes.
    Info,
}

impl Check {
    pub fn passes(self, value: f64, reference: f64, tolerance: f64) -> bool {
        match self {
            Self::Within => (value - reference).abs() <= tolerance,
            Self::AtLeast => value >= reference - tolerance,
            Self::AtMost => value <= reference + tolerance,
            Self::Info => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub label: String,
    pub instance: usize,
    pub param: String,
    pub param_value: f64,
    pub value: f64,
    pub reference: f64,
    pub abs_error: f64,
    pub tolerance: f64,
    pub check: Check,
    pub pass: bool,
}

impl Row {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        label: impl Into<String>,
        instance: usize,
        param: impl Into<String>,
        param_value: f64,
        value: f64,
        reference: f64,
        tolerance: f64,
        check: Check,
    ) -> Self {
        Self {
            label: label.into(),
            instance,
            param: param.into(),
            param_value,
            value,
            reference,
            abs_error: (value - reference).abs(),
            tolerance,
            check,
            pass: check.passes(value, reference, tolerance),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: ScenarioKind,
    pub seed: u64,
    pub config_hash: String,
    pub config: ScenarioConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
    pub rows: Vec<Row>,
}

impl RunReport {
    pub fn new(config: ScenarioConfig, rows: Vec<Row>) -> Self {
        Self {
            scenario: config.scenario,
            seed: config.seed,
            config_hash: config_hash(&config),
            config,
            wall_time_s: None,
            rows,
        }
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.pass).count()
    }

    pub fn all_pass(&self) -> bool {
        self.failures() == 0
    }
}

/// SHA-256 of the canonical JSON form of the effective configuration.
pub fn config_hash(cfg: &ScenarioConfig) -> String {
    let bytes = serde_json::to_vec(cfg).expect("config serializes");
    let digest = Sha256::digest(&bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv encoding failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("json encoding failed: {0}")]
    Json(#[from] serde_json::Error),
}

/// Rows only, one header line, no metadata.
pub fn write_csv<W: Write>(report: &RunReport, out: W) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    if report.rows.is_empty() {
        w.write_record([
            "label",
            "instance",
            "param",
            "param_value",
            "value",
            "reference",
            "abs_error",
            "tolerance",
            "check",
            "pass",
        ])?;
    }
    for row in &report.rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|source| ReportError::Io {
        path: "<csv>".into(),
        source,
    })?;
    Ok(())
}

pub fn to_csv_string(report: &RunReport) -> Result<String, ReportError> {
    let mut buf = Vec::new();
    write_csv(report, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Full report; `wall_time_s` is dropped unless `include_timing`.
pub fn to_json_string(report: &RunReport, include_timing: bool) -> Result<String, ReportError> {
    let mut r = report.clone();
    if !include_timing {
        r.wall_time_s = None;
    }
    let mut s = serde_json::to_string_pretty(&r)?;
    s.push('\n');
    Ok(s)
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), ReportError> {
    let io = |source| ReportError::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn emit_csv(report: &RunReport, path: &Path) -> Result<(), ReportError> {
    write_atomic(path, to_csv_string(report)?.as_bytes())
}

pub fn emit_json(report: &RunReport, path: &Path, include_timing: bool) -> Result<(), ReportError> {
    write_atomic(path, to_json_string(report, include_timing)?.as_bytes())
}
