//! Report, series and manifest files.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::run::{Outcome, SCHEMA_VERSION};

pub const REPORT_FILE: &str = "report.json";
pub const SERIES_FILE: &str = "series.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Timing {
    pub operation: String,
    pub seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub toolkit_version: &'static str,
    pub command: String,
    pub parallel: bool,
    pub workers: Option<usize>,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub config: Value,
    pub timings: Vec<Timing>,
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn file_digest(path: &Path) -> Result<FileDigest> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(FileDigest {
        file: path.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned()),
        bytes: bytes.len() as u64,
        sha256: sha256_hex(&bytes),
    })
}

pub fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

pub struct RunContext<'a> {
    pub command: &'a str,
    pub config: &'a Config,
    pub workers: Option<usize>,
    pub started_unix: f64,
}

/// Writes the report, the CSV series and the manifest into `dir`.
pub fn write_outputs(dir: &Path, ctx: &RunContext<'_>, outcome: &Outcome) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut report = serde_json::to_string_pretty(&outcome.report).expect("reports serialize");
    report.push('\n');
    let report_path = dir.join(REPORT_FILE);
    let series_path = dir.join(SERIES_FILE);
    std::fs::write(&report_path, report).with_context(|| format!("writing {}", report_path.display()))?;
    std::fs::write(&series_path, &outcome.csv).with_context(|| format!("writing {}", series_path.display()))?;

    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        toolkit_version: env!("CARGO_PKG_VERSION"),
        command: ctx.command.to_string(),
        parallel: dimlab_core::par::is_parallel(),
        workers: ctx.workers,
        started_unix: ctx.started_unix,
        finished_unix: unix_now(),
        config: serde_json::to_value(ctx.config).expect("configs serialize"),
        timings: outcome.timings.iter().map(|(o, s)| Timing { operation: o.clone(), seconds: *s }).collect(),
        outputs: vec![file_digest(&report_path)?, file_digest(&series_path)?],
    };
    let manifest_path = dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifests serialize");
    text.push('\n');
    std::fs::write(&manifest_path, text).with_context(|| format!("writing {}", manifest_path.display()))?;
    Ok(report_path)
}
