//! Command-line front end.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use crate::config::{ExperimentConfig, Kind};

pub const EXIT_ERROR: u8 = 1;
pub const EXIT_FAILED_CHECKS: u8 = 2;
pub const EXIT_TRUNCATED: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "fri-lab", version, about = "Finite-range random interlacement experiments")]
pub struct Args {
    /// One of: sample, clusters, growth, truncated, coupling, brw, spectral,
    /// entropy, convergence, verify.
    pub kind: Kind,
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; defaults to `<output.dir>/<kind>`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Overwrite a non-empty output directory.
    #[arg(long)]
    pub force: bool,
    /// Exit with status 3 if any run was truncated by a budget.
    #[arg(long)]
    pub strict: bool,
}

impl Args {
    fn reproduce(&self, seed: u64, out: &std::path::Path) -> String {
        format!(
            "fri-lab {} --config {} --seed {seed} --out {} --workers {} --force",
            self.kind,
            self.config.display(),
            out.display(),
            self.workers
        )
    }
}

pub fn run(args: Args) -> anyhow::Result<ExitCode> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = Some(seed);
    }
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from(&config.output.dir).join(args.kind.name()));
    let reproduce = args.reproduce(config.seed(), &out);
    let res = crate::execute(args.kind, config, args.workers, &out, args.force, reproduce)?;
    if let Some(summary) = &res.summary {
        println!("{summary}");
    }
    let m = &res.manifest;
    println!(
        "wrote {} files to {} (seed {}, {} truncated runs)",
        m.outputs.len() + 1,
        out.display(),
        m.master_seed,
        m.truncated_runs
    );
    Ok(if m.failed_checks > 0 {
        eprintln!("{} checks failed", m.failed_checks);
        ExitCode::from(EXIT_FAILED_CHECKS)
    } else if args.strict && m.truncated_runs > 0 {
        eprintln!("{} runs were truncated", m.truncated_runs);
        ExitCode::from(EXIT_TRUNCATED)
    } else {
        ExitCode::SUCCESS
    })
}

pub fn main_with(args: impl IntoIterator<Item = std::ffi::OsString>) -> ExitCode {
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_ERROR) } else { ExitCode::SUCCESS };
        }
    };
    match run(args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
