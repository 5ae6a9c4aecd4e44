use crate::error::{CliError, CliResult};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub claim: String,
    pub reference: String,
    pub measured: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: bool,
}

impl Claim {
    pub fn new(claim: &str, reference: &str, measured: f64, tolerance: f64, pass: bool) -> Self {
        let finite = |x: f64| x.is_finite().then_some(x);
        Self {
            claim: claim.into(),
            reference: reference.into(),
            measured: finite(measured),
            tolerance: finite(tolerance),
            pass,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config_file: String,
    pub config_sha256: String,
    pub deterministic: bool,
    pub threads: usize,
    pub notes: Vec<String>,
    pub claims: Vec<Claim>,
    pub all_pass: bool,
    /// sha256 of every other file written by the run.
    pub files: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn read_manifest(dir: &Path) -> CliResult<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let bytes = std::fs::read(&path)
        .map_err(|e| CliError::MissingManifest(format!("no manifest at {}: {e}", path.display())))?;
    Ok(serde_json::from_slice(&bytes)?)
}
