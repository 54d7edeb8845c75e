//! Run manifests.

use serde::Serialize;

use crate::config::{ExperimentConfig, Kind};
use crate::output::OutputRecord;

/// One derived random stream family: replicas `0..replicas` of
/// `derive_stream(master_seed, experiment_id, ·)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StreamRecord {
    pub experiment_id: String,
    pub cell: Option<usize>,
    pub u: Option<f64>,
    #[serde(rename = "T")]
    pub t: Option<f64>,
    pub replicas: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub started_unix_ms: u128,
    pub elapsed_ms: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub artifact: &'static str,
    pub version: &'static str,
    pub generator: &'static str,
    pub kind: Kind,
    pub config_hash: String,
    /// The resolved config, every default included.
    pub config: ExperimentConfig,
    pub thresholds: fri_core::defaults::Thresholds,
    pub master_seed: u64,
    pub streams: Vec<StreamRecord>,
    pub outputs: Vec<OutputRecord>,
    /// Rows carry their cell and replica; this command regenerates them all.
    pub reproduce: String,
    pub workers: usize,
    pub truncated_runs: u64,
    pub failed_checks: usize,
    pub timing: Timing,
}
