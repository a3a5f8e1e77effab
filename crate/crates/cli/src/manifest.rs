use std::path::PathBuf;

use clap::ValueEnum;
use mtd_core::{EngineConfig, Variant, WalkParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Smartmtd,
    SmartmtdCore,
    SmartmtdC,
    SmartmtdP,
    Voting,
    Sums,
    Avglog,
}

impl Method {
    pub fn variant(self) -> Option<Variant> {
        match self {
            Method::Smartmtd => Some(Variant::Full),
            Method::SmartmtdCore => Some(Variant::Core),
            Method::SmartmtdC => Some(Variant::CopyDetection),
            Method::SmartmtdP => Some(Variant::Popularity),
            Method::Voting | Method::Sums | Method::Avglog => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Smartmtd => "smartmtd",
            Method::SmartmtdCore => "smartmtd-core",
            Method::SmartmtdC => "smartmtd-c",
            Method::SmartmtdP => "smartmtd-p",
            Method::Voting => "voting",
            Method::Sums => "sums",
            Method::Avglog => "avglog",
        }
    }
}

/// Every `EngineConfig` field, flattened for serialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSnapshot {
    pub beta: f64,
    pub delta: f64,
    pub pp_max: f64,
    pub np_max: f64,
    pub pc_max: f64,
    pub nc_max: f64,
    pub max_outer_iters: usize,
    pub walk_tol: f64,
    pub walk_max_iters: usize,
    pub detect_copying: bool,
    pub use_popularity: bool,
}

impl From<&EngineConfig> for ConfigSnapshot {
    fn from(c: &EngineConfig) -> Self {
        Self {
            beta: c.beta,
            delta: c.delta,
            pp_max: c.pp_max,
            np_max: c.np_max,
            pc_max: c.pc_max,
            nc_max: c.nc_max,
            max_outer_iters: c.max_outer_iters,
            walk_tol: c.walk.tol,
            walk_max_iters: c.walk.max_iters,
            detect_copying: c.detect_copying,
            use_popularity: c.use_popularity,
        }
    }
}

impl From<&ConfigSnapshot> for EngineConfig {
    fn from(c: &ConfigSnapshot) -> Self {
        Self {
            beta: c.beta,
            delta: c.delta,
            pp_max: c.pp_max,
            np_max: c.np_max,
            pc_max: c.pc_max,
            nc_max: c.nc_max,
            max_outer_iters: c.max_outer_iters,
            walk: WalkParams {
                tol: c.walk_tol,
                max_iters: c.walk_max_iters,
            },
            detect_copying: c.detect_copying,
            use_popularity: c.use_popularity,
        }
    }
}

/// Everything needed to reproduce a `run` result directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub method: Method,
    pub config: ConfigSnapshot,
    pub claims: PathBuf,
    pub gold: Option<PathBuf>,
    pub delimiter: char,
    pub header: bool,
    /// Runs are deterministic; kept for datasets produced by `synth`.
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
    pub threads: Option<usize>,
}

impl RunManifest {
    /// SHA-256 over the manifest with the output directory and thread count
    /// blanked, so relocated or re-threaded runs share a hash.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.out_dir = PathBuf::new();
        canonical.threads = None;
        let bytes = serde_json::to_vec(&canonical).expect("manifest serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

pub fn text_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn comment_header(hash: &str) -> String {
    format!("# mtd {} manifest={hash}\n", env!("CARGO_PKG_VERSION"))
}
