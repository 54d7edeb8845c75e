//! Experiment driver for `fri-core`: TOML configs in, CSV/JSONL artifacts and
//! a manifest out.

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod experiments;
pub mod manifest;
pub mod output;
pub mod runner;
pub mod verify;

use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use config::{ExperimentConfig, Kind};
use manifest::{RunManifest, Timing};
use runner::Runner;

pub struct RunResult {
    pub manifest: RunManifest,
    pub summary: Option<String>,
}

/// Runs one experiment and writes its artifacts plus `manifest.json` into `dir`.
pub fn execute(
    kind: Kind,
    config: ExperimentConfig,
    workers: usize,
    dir: &Path,
    force: bool,
    reproduce: String,
) -> anyhow::Result<RunResult> {
    config.validate()?;
    output::prepare_dir(dir, force)?;
    let started = SystemTime::now().duration_since(UNIX_EPOCH)?.as_millis();
    let clock = Instant::now();
    let mut runner = Runner::new(kind, config, workers)?;
    let outcome = experiments::dispatch(&mut runner)?;
    let outputs = output::write_all(dir, &outcome.artifacts)?;
    let manifest = RunManifest {
        artifact: "fri-lab-run",
        version: env!("CARGO_PKG_VERSION"),
        generator: fri_core::rng::GENERATOR_ID,
        kind,
        config_hash: runner.config.hash(kind),
        master_seed: runner.seed(),
        thresholds: fri_core::defaults::thresholds(),
        streams: runner.streams,
        outputs,
        reproduce,
        workers: runner.workers,
        truncated_runs: runner.truncated_runs,
        failed_checks: outcome.failed_checks,
        timing: Timing { started_unix_ms: started, elapsed_ms: clock.elapsed().as_millis() },
        config: runner.config,
    };
    std::fs::write(dir.join("manifest.json"), serde_json::to_vec_pretty(&manifest)?)?;
    Ok(RunResult { manifest, summary: outcome.summary })
}
