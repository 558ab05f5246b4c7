//! The shared run report and its text, JSON and CSV renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use fbcap_core::PsdSpec;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

/// Envelope shared by every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub input: InputEcho,
    /// Every number the command produced.
    pub outputs: Value,
    pub verdicts: BTreeMap<String, bool>,
    pub messages: Vec<String>,
    /// `None` when timing is disabled, so that seeded runs are byte-identical.
    pub wall_time_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputEcho {
    pub psd: Option<PsdSpec>,
    pub psd_source: Option<String>,
    pub power: Option<f64>,
    pub quadrature_tol: f64,
    pub root_tol: f64,
    pub seed: Option<u64>,
    /// Command-specific arguments.
    pub parameters: BTreeMap<String, Value>,
}

/// Rows for `--format csv`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| CliError::Invalid(format!("csv output: {e}"));
        w.write_record(&self.columns).map_err(fail)?;
        for row in &self.rows {
            w.write_record(row.iter().map(csv_cell)).map_err(fail)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::Invalid(format!("csv output: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv of utf-8 cells"))
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// A finished command. `failure` is set when the run produced a report but
/// one of its internal checks failed; the report is still printed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: RunReport,
    pub table: Table,
    pub failure: Option<CliError>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        self.failure.as_ref().map_or(0, CliError::exit_code)
    }
}

pub fn to_json(report: &RunReport) -> String {
    serde_json::to_string_pretty(report).expect("reports always serialize")
}

/// Six decimals, switching to scientific notation for values that would
/// otherwise print as zero or as a long run of digits.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e9).contains(&a) {
        format!("{x:.6}")
    } else if x.is_finite() {
        format!("{x:.6e}")
    } else {
        x.to_string()
    }
}

fn format_scalar(v: &Value) -> String {
    match v {
        Value::Null => "none".into(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => u.to_string(),
            (_, Some(i)) => i.to_string(),
            _ => format_number(n.as_f64().unwrap_or(f64::NAN)),
        },
        Value::String(s) => s.clone(),
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(format_scalar).collect();
            format!("[{}]", parts.join(", "))
        }
        Value::Object(_) => serde_json::to_string(v).unwrap_or_default(),
    }
}

/// `key = value` lines for scalars, dotted keys for nested objects and an
/// aligned block for arrays of objects.
pub fn to_text(report: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# fbcap {}", report.command);
    if let Some(psd) = &report.input.psd {
        let _ = writeln!(
            out,
            "# psd {}",
            serde_json::to_string(psd).unwrap_or_default()
        );
    }
    write_value(&mut out, "", &report.outputs);
    for (name, ok) in &report.verdicts {
        let _ = writeln!(out, "verdict.{name} = {ok}");
    }
    for msg in &report.messages {
        let _ = writeln!(out, "{msg}");
    }
    if let Some(t) = report.wall_time_s {
        let _ = writeln!(out, "wall_time_s = {t:.6}");
    }
    out
}

fn write_value(out: &mut String, key: &str, v: &Value) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                let name = if key.is_empty() {
                    k.clone()
                } else {
                    format!("{key}.{k}")
                };
                write_value(out, &name, child);
            }
        }
        Value::Array(items) if !items.is_empty() && items.iter().all(Value::is_object) => {
            write_table(out, key, items);
        }
        other => {
            let _ = writeln!(out, "{key} = {}", format_scalar(other));
        }
    }
}

fn write_table(out: &mut String, key: &str, items: &[Value]) {
    let mut columns: Vec<&str> = Vec::new();
    for item in items {
        for k in item.as_object().into_iter().flat_map(|m| m.keys()) {
            if !columns.contains(&k.as_str()) {
                columns.push(k);
            }
        }
    }
    let cells: Vec<Vec<String>> = items
        .iter()
        .map(|item| {
            columns
                .iter()
                .map(|c| format_scalar(item.get(*c).unwrap_or(&Value::Null)))
                .collect()
        })
        .collect();
    let widths: Vec<usize> = columns
        .iter()
        .enumerate()
        .map(|(j, c)| {
            cells
                .iter()
                .map(|r| r[j].len())
                .chain([c.len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |row: &[&str]| {
        let padded: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(s, w)| format!("{s:>w$}"))
            .collect();
        padded.join("  ")
    };
    let _ = writeln!(out, "[{key}]");
    let _ = writeln!(out, "{}", line(&columns));
    for r in &cells {
        let refs: Vec<&str> = r.iter().map(String::as_str).collect();
        let _ = writeln!(out, "{}", line(&refs));
    }
}
