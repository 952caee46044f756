use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::Failure;

/// One pass/fail check of a run.
#[derive(Debug, Clone, Serialize)]
pub struct Gate {
    pub name: String,
    /// What the check compares, in words.
    pub checks: String,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

impl Gate {
    /// Passes when `value <= bound`.
    pub fn at_most(name: &str, checks: &str, value: f64, bound: f64) -> Self {
        Self { name: name.into(), checks: checks.into(), value, bound, passed: value <= bound }
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    config_hash: String,
    config: ExperimentConfig,
    constants: &'a Value,
    gates: &'a [Gate],
    outputs: &'a [String],
    passed: bool,
}

/// Output directory plus the list of files written so far.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    pub fn create(dir: &Path) -> Result<Self, Failure> {
        fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn json<S: Serialize>(&mut self, name: &str, value: &S) -> Result<(), Failure> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Io(e.to_string()))?;
        text.push('\n');
        fs::write(self.dir.join(name), text).map_err(|e| Failure::Io(e.to_string()))?;
        self.files.push(name.into());
        Ok(())
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), Failure> {
        let io = |e: csv::Error| Failure::Io(e.to_string());
        let mut w = csv::Writer::from_path(self.dir.join(name)).map_err(io)?;
        w.write_record(header).map_err(io)?;
        for row in rows {
            w.write_record(row.iter().map(|v| format!("{v:e}"))).map_err(io)?;
        }
        w.flush().map_err(|e| Failure::Io(e.to_string()))?;
        self.files.push(name.into());
        Ok(())
    }

    /// Writes `manifest.json` and returns whether every gate passed.
    pub fn manifest(mut self, command: &str, config: &ExperimentConfig, constants: Value, gates: &[Gate]) -> Result<bool, Failure> {
        let passed = gates.iter().all(|g| g.passed);
        self.files.push("manifest.json".into());
        let m = Manifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            config_hash: config.hash(),
            config: config.normalized(),
            constants: &constants,
            gates,
            outputs: &self.files,
            passed,
        };
        let mut text = serde_json::to_string_pretty(&m).map_err(|e| Failure::Io(e.to_string()))?;
        text.push('\n');
        fs::write(self.dir.join("manifest.json"), text).map_err(|e| Failure::Io(e.to_string()))?;
        Ok(passed)
    }
}
