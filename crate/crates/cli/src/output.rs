//! Reports, CSV rows and machine-readable failures.

use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::process::ExitCode;

use serde::Serialize;

use smallness_core::rational::{self, Rational};
use smallness_core::Error;

use crate::Format;

/// A run that could not produce a verdict.
#[derive(Debug)]
pub struct Failure {
    pub kind: String,
    pub message: String,
    pub code: u8,
}

impl Failure {
    pub fn usage(message: String) -> Self {
        Failure { kind: "usage".into(), message: message.trim_end().to_string(), code: 2 }
    }

    /// Prints `{"error": kind, "message": ...}` to standard error.
    pub fn report(&self) -> ExitCode {
        let body = serde_json::json!({ "error": self.kind, "message": self.message });
        eprintln!("{body}");
        ExitCode::from(self.code)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        // A rejected certificate or a broken invariant is a failed check, not bad input.
        let code = match e {
            Error::Certificate(_) | Error::Internal(_) => 1,
            _ => 2,
        };
        Failure { kind: e.kind().into(), message: e.to_string(), code }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Error::from(e).into()
    }
}

/// One CSV line. Numbers are decimal approximations; the JSON report has
/// the exact values.
#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub id: String,
    pub n: usize,
    pub p: String,
    pub bound: String,
    pub exact: String,
    pub verdict: &'static str,
}

impl Row {
    pub fn new(id: impl Into<String>, n: usize, p: &Rational, bound: Option<&Rational>, exact: Option<&Rational>, ok: bool) -> Self {
        Row {
            id: id.into(),
            n,
            p: decimal(p),
            bound: bound.map(decimal).unwrap_or_default(),
            exact: exact.map(decimal).unwrap_or_default(),
            verdict: if ok { "pass" } else { "fail" },
        }
    }
}

fn decimal(r: &Rational) -> String {
    format!("{:e}", rational::to_f64(r))
}

pub struct Outcome {
    pub report: String,
    pub rows: Vec<Row>,
    pub passed: bool,
}

impl Outcome {
    pub fn new<T: Serialize>(report: &T, rows: Vec<Row>, passed: bool) -> Result<Self, Failure> {
        let mut text = serde_json::to_string_pretty(report).map_err(Error::from)?;
        text.push('\n');
        Ok(Outcome { report: text, rows, passed })
    }

    pub fn emit(&self, format: Format, path: Option<&Path>) -> Result<(), Failure> {
        let body = match format {
            Format::Json => self.report.clone().into_bytes(),
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                if self.rows.is_empty() {
                    w.write_record(["id", "n", "p", "bound", "exact", "verdict"]).map_err(csv_error)?;
                }
                for row in &self.rows {
                    w.serialize(row).map_err(csv_error)?;
                }
                w.into_inner().map_err(|e| Failure::from(e.into_error()))?
            }
        };
        match path {
            Some(p) => fs::write(p, body)?,
            None => io::stdout().lock().write_all(&body)?,
        }
        Ok(())
    }
}

fn csv_error(e: csv::Error) -> Failure {
    Failure { kind: "io".into(), message: e.to_string(), code: 2 }
}
