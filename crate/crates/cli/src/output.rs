//! Output rendering: RFC-4180 CSV with LF endings and round-trippable
//! 17-significant-digit floats, JSON with sorted keys, and the metadata
//! block every file carries (spec, command, seed, tool version).

use std::path::Path;

use serde_json::{json, Map, Value};

use crate::config::{OutputFormat, Resolved};
use crate::Failure;

/// 17 significant digits: enough to reparse the exact f64.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Builds a CSV body: header row plus records, LF-terminated.
pub struct Csv {
    body: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut body = header
            .iter()
            .map(|h| csv_escape(h))
            .collect::<Vec<_>>()
            .join(",");
        body.push('\n');
        Self {
            body,
            columns: header.len(),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.columns, "csv row width mismatch");
        let line = fields
            .iter()
            .map(|f| csv_escape(f))
            .collect::<Vec<_>>()
            .join(",");
        self.body.push_str(&line);
        self.body.push('\n');
    }

    pub fn finish(self) -> String {
        self.body
    }
}

/// Metadata block embedded in JSON outputs and written as the `.meta.json`
/// sidecar next to CSV files.
pub fn meta(
    command: &str,
    resolved: &Resolved,
    params: Value,
    game: Option<&ipgg::GameSpec>,
) -> Value {
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": resolved.seed,
        "game": game.map(|g| serde_json::to_value(g).expect("spec serializes")),
        "params": params,
    })
}

/// Serializes through `Value` so every object's keys come out sorted.
pub fn to_sorted_json(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("json serializes");
    text.push('\n');
    text
}

/// Writes the rendered body to the output path or stdout. CSV written to a
/// file gets its metadata in `<path>.meta.json`; JSON embeds it inline.
pub fn emit(
    resolved: &Resolved,
    csv_body: String,
    json_value: Value,
    meta: Value,
) -> Result<(), Failure> {
    match resolved.format {
        OutputFormat::Json => {
            let mut object = match json_value {
                Value::Object(map) => map,
                other => {
                    let mut map = Map::new();
                    map.insert("data".into(), other);
                    map
                }
            };
            object.insert("meta".into(), meta);
            let text = to_sorted_json(&Value::Object(object));
            write_or_print(resolved.output.as_deref(), &text)
        }
        OutputFormat::Csv => {
            write_or_print(resolved.output.as_deref(), &csv_body)?;
            if let Some(path) = resolved.output.as_deref() {
                let sidecar = sidecar_path(path);
                std::fs::write(&sidecar, to_sorted_json(&meta)).map_err(|e| {
                    Failure::invalid(format!("cannot write {}: {e}", sidecar.display()))
                })?;
            }
            Ok(())
        }
    }
}

pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut name = path.as_os_str().to_os_string();
    name.push(".meta.json");
    std::path::PathBuf::from(name)
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::invalid(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
