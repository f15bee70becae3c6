use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

/// Rounds to 6 significant digits.
pub fn sig6(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.5e}").parse().expect("formatted float parses")
}

/// Threshold in the usual 4-decimal form.
pub fn dp4(x: f64) -> String {
    format!("{x:.4}")
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: &'static str,
    pub version: &'static str,
    pub args: Value,
    pub params: Option<Value>,
    pub seeds: Vec<u64>,
    pub duration_s: f64,
}

impl RunManifest {
    pub fn new(subcommand: &'static str, args: &impl Serialize) -> Self {
        RunManifest {
            subcommand,
            version: env!("CARGO_PKG_VERSION"),
            args: serde_json::to_value(args).unwrap_or(Value::Null),
            params: None,
            seeds: Vec::new(),
            duration_s: 0.0,
        }
    }
}

/// A finished run: JSON document plus an optional attachment (extension, body).
pub struct Artifact {
    pub result: Value,
    pub attachment: Option<(&'static str, String)>,
    /// Human-readable text for stdout in place of the JSON.
    pub summary: Option<String>,
}

impl Artifact {
    pub fn json(result: Value) -> Self {
        Artifact { result, attachment: None, summary: None }
    }

    pub fn with_csv(self, csv: String) -> Self {
        self.with_attachment("csv", csv)
    }

    pub fn with_attachment(mut self, ext: &'static str, body: String) -> Self {
        self.attachment = Some((ext, body));
        self
    }

    pub fn with_summary(mut self, text: String) -> Self {
        self.summary = Some(text);
        self
    }
}

pub fn csv_string(write: impl FnOnce(&mut Vec<u8>) -> mdsc_core::Result<()>) -> Result<String, CliError> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Prints, ignoring a closed pipe.
fn stdout(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn write_file(path: &Path, body: &str) -> Result<(), CliError> {
    fs::write(path, body).map_err(|e| CliError::Compute(mdsc_core::Error::Io(e)))
}

/// Embeds the manifest and either writes `<out>/<name>.json` (+ attachment) or
/// prints the JSON to stdout.
pub fn emit(out: Option<&PathBuf>, mut manifest: RunManifest, elapsed: Duration, art: Artifact) -> Result<(), CliError> {
    manifest.duration_s = elapsed.as_secs_f64();
    let mut doc = match art.result {
        Value::Object(map) => Value::Object(map),
        other => json!({ "result": other }),
    };
    doc["manifest"] = serde_json::to_value(&manifest).expect("manifest serializes");
    let text = serde_json::to_string_pretty(&doc).expect("result serializes");
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| CliError::Compute(mdsc_core::Error::Io(e)))?;
            write_file(&dir.join(format!("{}.json", manifest.subcommand)), &text)?;
            if let Some((ext, body)) = &art.attachment {
                write_file(&dir.join(format!("{}.{ext}", manifest.subcommand)), body)?;
            }
            if let Some(s) = &art.summary {
                stdout(s);
            }
        }
        None => match &art.summary {
            Some(s) => stdout(s),
            None => stdout(&format!("{text}\n")),
        },
    }
    Ok(())
}
