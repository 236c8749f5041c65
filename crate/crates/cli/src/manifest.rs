//! Per-command manifests. A manifest holds the fully resolved config plus
//! every version string the outputs depend on, so `--config <manifest>`
//! reruns the command with the same result.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use promptcase::backend::BackendDescriptor;
use promptcase::hash::fnv1a64;
use promptcase::io::write_atomic;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub command: String,
    pub tool_version: String,
    pub config: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend: Option<BackendDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summarizer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lexicon: Option<String>,
    /// Content hashes of the inputs read, by file name.
    #[serde(default)]
    pub inputs: BTreeMap<String, String>,
    /// Content hashes of the files written, by file name.
    #[serde(default)]
    pub outputs: BTreeMap<String, String>,
    #[serde(default)]
    pub summary: serde_json::Value,
}

impl Manifest {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Manifest {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            backend: None,
            summarizer: None,
            lexicon: None,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            summary: serde_json::Value::Null,
        }
    }

    pub fn file_name(command: &str) -> String {
        format!("{command}.manifest.json")
    }

    /// Hashes a file that was read.
    pub fn input(&mut self, path: &Path) -> CliResult<()> {
        let bytes = std::fs::read(path).map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))?;
        self.inputs.insert(display_name(path), content_hash(&bytes));
        Ok(())
    }

    /// Writes `bytes` atomically and records its hash.
    pub fn output(&mut self, path: &Path, bytes: &[u8]) -> CliResult<()> {
        write_atomic(path, bytes).map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))?;
        self.outputs.insert(display_name(path), content_hash(bytes));
        Ok(())
    }

    pub fn write(&self, out: &Path) -> CliResult<()> {
        let path = out.join(Self::file_name(&self.command));
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        write_atomic(&path, text.as_bytes()).map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
    }
}

fn display_name(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

pub fn content_hash(bytes: &[u8]) -> String {
    format!("fnv1a64:{:016x}", fnv1a64(bytes))
}
