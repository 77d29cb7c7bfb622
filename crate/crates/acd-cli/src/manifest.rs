//! Run manifests: every command writes one JSON manifest beside its outputs,
//! echoing the command, inputs, resolved parameters, seed and version.
//! Wall-clock timings are recorded but excluded from reproducibility
//! comparisons.

use crate::CliError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    /// key=value echo of every resolved parameter; round-trip parseable as a
    /// config file.
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    pub version: String,
    pub wall_clock_ms: BTreeMap<String, u64>,
}

pub struct ManifestBuilder {
    manifest: RunManifest,
    stage_started: Option<(String, Instant)>,
}

impl ManifestBuilder {
    pub fn new(command: &str, inputs: &[&Path], seed: u64) -> ManifestBuilder {
        ManifestBuilder {
            manifest: RunManifest {
                command: command.to_string(),
                inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
                params: BTreeMap::new(),
                seed,
                version: env!("CARGO_PKG_VERSION").to_string(),
                wall_clock_ms: BTreeMap::new(),
            },
            stage_started: None,
        }
    }

    pub fn param(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.manifest
            .params
            .insert(key.to_string(), value.to_string());
        self
    }

    /// Starts a named stage, closing the previous one.
    pub fn stage(&mut self, name: &str) {
        self.finish_stage();
        self.stage_started = Some((name.to_string(), Instant::now()));
    }

    fn finish_stage(&mut self) {
        if let Some((name, started)) = self.stage_started.take() {
            self.manifest
                .wall_clock_ms
                .insert(name, started.elapsed().as_millis() as u64);
        }
    }

    pub fn write(mut self, path: &PathBuf) -> Result<(), CliError> {
        self.finish_stage();
        let json = serde_json::to_string_pretty(&self.manifest)
            .map_err(|e| CliError::Compute(format!("manifest: {e}")))?;
        std::fs::write(path, json + "\n")
            .map_err(|e| CliError::Compute(format!("manifest {}: {e}", path.display())))
    }
}
