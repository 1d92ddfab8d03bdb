//! Machine-readable reports.
//!
//! Every subcommand emits one JSON report on stdout (or to `--out`). Keys
//! are sorted and wall-clock timing is zero unless explicitly requested, so
//! a rerun with the same seed produces byte-identical output.

use serde::Serialize;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: String,
    pub command: String,
    pub inputs: serde_json::Value,
    pub results: serde_json::Value,
    pub timing_ms: u64,
}

impl Report {
    pub fn new(command: &str, inputs: serde_json::Value, results: serde_json::Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            inputs,
            results,
            timing_ms: 0,
        }
    }

    /// Deterministic rendering: serde_json's map is ordered, so converting
    /// through `Value` sorts every object's keys.
    pub fn render(&self) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        let mut rendered = serde_json::to_string_pretty(&value).expect("value renders");
        rendered.push('\n');
        rendered
    }
}
