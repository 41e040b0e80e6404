//! Deterministic CSV output with a metadata preamble.
//!
//! All benchmark results are written as UTF-8 CSV with LF line endings.
//! Leading `#`-prefixed comment lines carry run metadata (tool version,
//! master seed, resolved configuration and its hash), then a header row,
//! then data rows. Floating-point fields are rendered with 17 significant
//! digits so values round-trip bit-exactly, which is what makes serial and
//! parallel runs byte-comparable.

use std::path::Path;

use crate::{Error, Result};

/// Render a float with 17 significant digits (round-trips f64 exactly).
pub fn float_field(x: f64) -> String {
    format!("{x:.16e}")
}

/// Render an optional float; `None` becomes the empty field.
pub fn opt_float_field(x: Option<f64>) -> String {
    x.map(float_field).unwrap_or_default()
}

/// Quote a CSV field only when it contains a comma, quote, or newline.
fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// A CSV document: metadata comments, one header row, data rows.
#[derive(Clone, Debug, Default)]
pub struct CsvDoc {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvDoc {
    pub fn new(header: &[&str]) -> CsvDoc {
        CsvDoc {
            meta: Vec::new(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_meta(&mut self, key: &str, value: impl Into<String>) {
        self.meta.push((key.to_string(), value.into()));
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width matches header");
        self.rows.push(row);
    }

    /// Render the whole document as a string (LF line endings).
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            // Metadata values may span lines (the resolved config does);
            // each line gets its own comment prefix so the CSV body stays
            // machine-readable.
            for (i, line) in v.split('\n').enumerate() {
                if i == 0 {
                    out.push_str(&format!("# {k}: {line}\n"));
                } else {
                    out.push_str(&format!("# {k}.{i}: {line}\n"));
                }
            }
        }
        out.push_str(&self.header.iter().map(|f| quote(f)).collect::<Vec<_>>().join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(|f| quote(f)).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    /// Write to a file, or to stdout when no path is given.
    pub fn write_to(&self, path: Option<&Path>) -> Result<()> {
        let text = self.render();
        match path {
            Some(p) => std::fs::write(p, text).map_err(|e| {
                Error::Io(std::io::Error::new(
                    e.kind(),
                    format!("cannot write {}: {e}", p.display()),
                ))
            }),
            None => {
                use std::io::Write;
                std::io::stdout().write_all(text.as_bytes()).map_err(Error::Io)
            }
        }
    }
}

/// Standard metadata block: tool version, master seed, config hash, and the
/// resolved configuration text.
pub fn config_meta(doc: &mut CsvDoc, seed: u64, resolved: &str) {
    doc.push_meta("version", env!("CARGO_PKG_VERSION"));
    doc.push_meta("seed", seed.to_string());
    doc.push_meta("config_sha256", super::config::config_hash(resolved));
    doc.push_meta("config", resolved.trim_end().to_string());
}
