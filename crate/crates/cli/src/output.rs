use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use crate::{Failure, Format};

pub const SCHEMA: u32 = 1;
pub const VERSION: &str = concat!("gentropy ", env!("CARGO_PKG_VERSION"));

/// An artifact: run metadata plus a JSON body and a CSV table.
pub struct Artifact {
    pub config: Value,
    pub body: Value,
    pub csv: String,
}

impl Artifact {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let doc = json!({
                    "schema": SCHEMA,
                    "version": VERSION,
                    "config": self.config,
                    "result": self.body,
                });
                let mut s = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
                s.push('\n');
                s
            }
            Format::Csv => format!(
                "# {VERSION} schema {SCHEMA}\n# config {}\n{}",
                self.config, self.csv
            ),
        }
    }

    pub fn write(&self, path: Option<&Path>, format: Format) -> Result<(), Failure> {
        if let Some(p) = path {
            fs::write(p, self.render(format))
                .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display())))?;
        }
        Ok(())
    }
}

/// JSON number, or `"inf"`/`"-inf"`/`"nan"` for non-finite values.
pub fn real(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
