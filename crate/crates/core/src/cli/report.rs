//! Report files: CSVs with a version/config-hash header line and a
//! machine-readable JSON summary with one pass/fail entry per asserted
//! inequality.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

pub const WORKBENCH_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub workbench_version: &'static str,
    pub config_sha256: String,
    pub kind: String,
    pub seed: Option<u64>,
    pub checks: Vec<Check>,
    pub all_passed: bool,
    pub outputs: Vec<String>,
}

pub struct ReportWriter {
    out_dir: PathBuf,
    config_hash: String,
    outputs: Vec<String>,
}

pub fn config_hash(config_bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(config_bytes);
    hex(&hasher.finalize())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl ReportWriter {
    pub fn new(out_dir: &Path, config_bytes: &[u8]) -> std::io::Result<Self> {
        std::fs::create_dir_all(out_dir)?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            config_hash: config_hash(config_bytes),
            outputs: Vec::new(),
        })
    }

    pub fn header_line(&self) -> String {
        format!("# rdcp v{WORKBENCH_VERSION} config_sha256={}\n", self.config_hash)
    }

    pub fn write_csv(&mut self, name: &str, body: &str) -> std::io::Result<PathBuf> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, format!("{}{body}", self.header_line()))?;
        self.outputs.push(name.to_string());
        Ok(path)
    }

    pub fn write_text(&mut self, name: &str, body: &str) -> std::io::Result<PathBuf> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, body)?;
        self.outputs.push(name.to_string());
        Ok(path)
    }

    pub fn finish(
        mut self,
        kind: &str,
        seed: Option<u64>,
        checks: Vec<Check>,
    ) -> std::io::Result<Summary> {
        let all_passed = checks.iter().all(|c| c.passed);
        self.outputs.push("report.json".to_string());
        let summary = Summary {
            workbench_version: WORKBENCH_VERSION,
            config_sha256: self.config_hash.clone(),
            kind: kind.to_string(),
            seed,
            checks,
            all_passed,
            outputs: self.outputs.clone(),
        };
        let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
        std::fs::write(self.out_dir.join("report.json"), json)?;
        Ok(summary)
    }
}
