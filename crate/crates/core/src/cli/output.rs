use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::heatkernel::export::atomic_write;

/// Reproduction metadata attached to every summary.
#[derive(Debug, Clone, Serialize)]
pub struct RunMeta {
    pub command: &'static str,
    pub manifold: String,
    pub seed: u64,
    pub n_paths: usize,
    pub steps: usize,
    pub delta: Option<f64>,
    pub eps: Option<f64>,
    pub version: &'static str,
}

impl RunMeta {
    pub fn new(command: &'static str, manifold: String, seed: u64, n_paths: usize, steps: usize) -> Self {
        Self {
            command,
            manifold,
            seed,
            n_paths,
            steps,
            delta: None,
            eps: None,
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

/// Builds a CSV in memory from a header and string rows.
pub fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

pub fn write_bytes(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    let path = dir.join(name);
    atomic_write(&path, bytes)?;
    Ok(path)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_bytes(dir, name, &bytes)
}

/// Formats an optional number, empty when absent.
pub fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
