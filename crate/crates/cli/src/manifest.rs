//! Run manifests: every file output carries a JSON sidecar describing the
//! invocation that produced it.

use crate::CliError;
use serde::Serialize;
use std::time::Instant;

#[derive(Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub parameters: serde_json::Value,
    pub tool_version: &'static str,
    pub tolerances: serde_json::Value,
    pub output_paths: Vec<String>,
    pub wall_time_ms: f64,
}

pub struct ManifestBuilder {
    command: &'static str,
    parameters: serde_json::Value,
    tolerances: serde_json::Value,
    started: Instant,
}

impl ManifestBuilder {
    pub fn new(command: &'static str, parameters: serde_json::Value) -> Self {
        Self {
            command,
            parameters,
            tolerances: serde_json::json!({}),
            started: Instant::now(),
        }
    }

    pub fn tolerances(mut self, tolerances: serde_json::Value) -> Self {
        self.tolerances = tolerances;
        self
    }

    pub fn finish(self, output_paths: &[&str]) -> RunManifest {
        RunManifest {
            command: self.command,
            parameters: self.parameters,
            tool_version: env!("CARGO_PKG_VERSION"),
            tolerances: self.tolerances,
            output_paths: output_paths.iter().map(|s| s.to_string()).collect(),
            wall_time_ms: self.started.elapsed().as_secs_f64() * 1e3,
        }
    }
}

/// Writes `<path>.manifest.json` next to an output file.
pub fn write_sidecar(path: &str, manifest: &RunManifest) -> Result<(), CliError> {
    let sidecar = format!("{path}.manifest.json");
    let body = serde_json::to_string_pretty(manifest)
        .map_err(|e| CliError::Io(format!("manifest serialization: {e}")))?;
    std::fs::write(&sidecar, body + "\n")?;
    Ok(())
}
