//! Run manifests: what was invoked, with which resolved settings, reading and
//! writing which files. Written before the heavy computation starts so a
//! crashed run still leaves its provenance behind.

use std::fs;
use std::path::Path;

use serde::Serialize;

#[derive(Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub version: String,
    pub timestamp_utc: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub config: serde_json::Value,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        Self {
            subcommand: subcommand.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            timestamp_utc: chrono::Utc::now().to_rfc3339(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            config: serde_json::Value::Null,
        }
    }

    pub fn input(mut self, path: impl AsRef<str>) -> Self {
        self.inputs.push(path.as_ref().to_string());
        self
    }

    pub fn input_path(mut self, path: &Path) -> Self {
        self.inputs.push(path.display().to_string());
        self
    }

    pub fn output(mut self, path: &Path) -> Self {
        self.outputs.push(path.display().to_string());
        self
    }

    pub fn config(mut self, value: serde_json::Value) -> Self {
        self.config = value;
        self
    }

    pub fn write_to(mut self, path: &Path) -> std::io::Result<()> {
        self.outputs.push(path.display().to_string());
        fs::write(path, serde_json::to_string_pretty(&self).expect("manifest serializes"))
    }
}
