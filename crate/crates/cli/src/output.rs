use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

/// Rows for `--format csv`.
#[derive(Debug, Default)]
pub struct CsvTable {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn render(&self) -> csv::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner().map_err(|e| e.into_error().into())
    }
}

/// What a subcommand produced.
pub struct Artifact {
    pub result: Value,
    pub csv: CsvTable,
    /// Raw text written verbatim regardless of format.
    pub raw: Option<String>,
    /// A failed certificate; the artifact is still written.
    pub violation: Option<String>,
}

impl Artifact {
    pub fn new<T: Serialize>(result: &T, csv: CsvTable) -> Self {
        let result = serde_json::to_value(result).expect("reports serialize");
        Self { result, csv, raw: None, violation: None }
    }

    pub fn violation_if(mut self, failed: bool, what: impl Into<String>) -> Self {
        if failed && self.violation.is_none() {
            self.violation = Some(what.into());
        }
        self
    }
}

pub fn envelope(config: &Value, body: (&str, Value)) -> Value {
    let mut out = json!({
        "tool": "resil",
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
    });
    out[body.0] = body.1;
    out
}

pub fn emit(bytes: &[u8], out: Option<&Path>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()
        }
    }
}

pub fn render_json(value: &Value) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("json values serialize");
    bytes.push(b'\n');
    bytes
}

pub fn render_csv(table: &CsvTable) -> std::io::Result<Vec<u8>> {
    table.render().map_err(std::io::Error::other)
}

/// Number formatting for CSV cells: shortest round-trip representation.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}
