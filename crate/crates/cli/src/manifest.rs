use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments after the program name, as given.
    pub args: Vec<String>,
    pub config_paths: Vec<String>,
    pub seed: u64,
    pub out_dir: String,
    /// `running`, `ok` or `failed`.
    pub status: String,
    pub error: Option<String>,
    pub sim_time_start: f64,
    pub sim_time_end: Option<f64>,
    pub outputs: Vec<String>,
    pub started_unix_ms: u128,
    pub finished_unix_ms: Option<u128>,
}

pub fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> CliResult<()> {
        let path = dir.join(FILE);
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Manifest(e.to_string()))?;
        std::fs::write(&path, text + "\n").map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Manifest(format!("{}: {e}", path.display())))
    }

    /// Recorded arguments with any `--out` removed.
    pub fn args_without_out(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.args.len());
        let mut it = self.args.iter();
        while let Some(a) = it.next() {
            if a == "--out" {
                it.next();
            } else if !a.starts_with("--out=") {
                out.push(a.clone());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn out_flag_is_stripped() {
        let m = RunManifest {
            tool: "ferrolab".into(),
            version: "0".into(),
            command: "experiment".into(),
            args: ["experiment", "--out", "a", "chaos", "--out=b", "--cycles", "2"]
                .map(String::from)
                .to_vec(),
            config_paths: vec![],
            seed: 1,
            out_dir: "a".into(),
            status: "ok".into(),
            error: None,
            sim_time_start: 0.0,
            sim_time_end: None,
            outputs: vec![],
            started_unix_ms: 0,
            finished_unix_ms: None,
        };
        assert_eq!(m.args_without_out(), ["experiment", "chaos", "--cycles", "2"]);
    }
}
