//! Report assembly and emission.
//!
//! A report holds one section per executed command. Each section carries its
//! named results as JSON values, the pass/fail assertions, and optionally a
//! table used for CSV output. Wall time is deliberately not part of a report so
//! that identical runs stay byte-identical; the binary prints it to stderr.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;
use crate::{CliError, Command};

pub const SCHEMA: u32 = 1;

/// One pass/fail check. Bounds are inclusive unless `strict` is set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub strict: bool,
    pub detail: String,
}

impl Assertion {
    pub fn within(name: &str, value: f64, lower: f64, upper: f64) -> Self {
        Assertion {
            name: name.to_string(),
            passed: value >= lower && value <= upper,
            value,
            lower: Some(lower),
            upper: Some(upper),
            strict: false,
            detail: String::new(),
        }
    }

    pub fn at_most(name: &str, value: f64, upper: f64) -> Self {
        Assertion {
            name: name.to_string(),
            passed: value <= upper,
            value,
            lower: None,
            upper: Some(upper),
            strict: false,
            detail: String::new(),
        }
    }

    pub fn above(name: &str, value: f64, lower: f64) -> Self {
        Assertion {
            name: name.to_string(),
            passed: value > lower,
            value,
            lower: Some(lower),
            upper: None,
            strict: true,
            detail: String::new(),
        }
    }

    /// Strictly decreasing sequence; the value is the largest successive ratio.
    pub fn decreasing(name: &str, values: &[f64]) -> Self {
        let ratio = values.windows(2).map(|w| w[1] / w[0]).fold(f64::NEG_INFINITY, f64::max);
        Assertion {
            name: name.to_string(),
            passed: values.len() >= 2 && values.windows(2).all(|w| w[1] < w[0]),
            value: ratio,
            lower: None,
            upper: Some(1.0),
            strict: true,
            detail: format!("sequence {}", list(values)),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

fn list(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6e}")).collect();
    format!("[{}]", parts.join(", "))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Cell {
    Num(f64),
    Text(String),
}

/// Rows for the CSV emitter.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorInfo {
    pub kind: &'static str,
    pub exit_code: i32,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Section {
    pub command: String,
    pub results: BTreeMap<String, Value>,
    pub assertions: Vec<Assertion>,
    pub error: Option<ErrorInfo>,
    #[serde(skip)]
    pub table: Option<Table>,
}

impl Section {
    pub fn new(command: Command) -> Self {
        Section {
            command: command.name().to_string(),
            results: BTreeMap::new(),
            assertions: Vec::new(),
            error: None,
            table: None,
        }
    }

    pub fn result<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let v = serde_json::to_value(value).map_err(|e| CliError::Output(e.to_string()))?;
        self.results.insert(name.to_string(), v);
        Ok(())
    }

    pub fn assert(&mut self, a: Assertion) {
        self.assertions.push(a);
    }

    pub fn passed(&self) -> bool {
        self.error.is_none() && self.assertions.iter().all(|a| a.passed)
    }

    pub fn exit_code(&self) -> i32 {
        match &self.error {
            Some(e) => e.exit_code,
            None if self.passed() => 0,
            None => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub config: RunConfig,
    pub sections: Vec<Section>,
    pub passed: bool,
}

impl Report {
    pub fn new(command: Command, config: RunConfig, sections: Vec<Section>) -> Self {
        let passed = sections.iter().all(Section::passed);
        Report { schema: SCHEMA, command: command.name().to_string(), config, sections, passed }
    }

    /// Highest section code: configuration errors over numerical errors over failed checks.
    pub fn exit_code(&self) -> i32 {
        self.sections.iter().map(Section::exit_code).max().unwrap_or(0)
    }

    pub fn failed_assertions(&self) -> Vec<String> {
        self.sections
            .iter()
            .flat_map(|s| s.assertions.iter().filter(|a| !a.passed).map(move |a| format!("{}/{}", s.command, a.name)))
            .collect()
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| CliError::Output(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// The command's own table for single-command runs that define one, the
    /// assertion table otherwise.
    pub fn to_csv(&self) -> String {
        if let [section] = self.sections.as_slice() {
            if let Some(t) = &section.table {
                return render_csv(t);
            }
        }
        let mut t = Table::new(&["command", "name", "passed", "value", "lower", "upper", "strict"]);
        for s in &self.sections {
            for a in &s.assertions {
                t.push(vec![
                    Cell::Text(s.command.clone()),
                    Cell::Text(a.name.clone()),
                    Cell::Text(a.passed.to_string()),
                    Cell::Num(a.value),
                    a.lower.map_or(Cell::Text(String::new()), Cell::Num),
                    a.upper.map_or(Cell::Text(String::new()), Cell::Num),
                    Cell::Text(a.strict.to_string()),
                ]);
            }
            if let Some(e) = &s.error {
                t.push(vec![
                    Cell::Text(s.command.clone()),
                    Cell::Text(format!("error:{}", e.kind)),
                    Cell::Text("false".into()),
                    Cell::Num(f64::NAN),
                    Cell::Text(String::new()),
                    Cell::Text(String::new()),
                    Cell::Text(String::new()),
                ]);
            }
        }
        render_csv(&t)
    }
}

/// 17 significant digits, `.` decimal separator.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

fn render_csv(t: &Table) -> String {
    let mut out = t.header.join(",");
    out.push('\n');
    for row in &t.rows {
        for (i, c) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            match c {
                Cell::Num(v) => out.push_str(&format_number(*v)),
                Cell::Text(s) if s.contains(',') || s.contains('"') => {
                    let _ = write!(out, "\"{}\"", s.replace('"', "\"\""));
                }
                Cell::Text(s) => out.push_str(s),
            }
        }
        out.push('\n');
    }
    out
}
