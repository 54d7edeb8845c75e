//! Runs the full criterion suite and prints one PASS/FAIL line per criterion.
//! Every sample size and tolerance is pinned inside `fri_lab::verify`.

use std::process::ExitCode;
use std::time::Instant;

use fri_lab::config::{ExperimentConfig, GraphConfig, Kind};
use fri_lab::runner::Runner;
use fri_lab::verify::{Suite, CRITERIA};

const SEED: u64 = 20_261_014;

fn main() -> ExitCode {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let config = ExperimentConfig::new(SEED, GraphConfig::regular_tree(3));
    let mut runner = Runner::new(Kind::Verify, config, workers).expect("runner");
    let mut suite = Suite::new(&mut runner);
    let mut failed = 0;
    println!("acceptance: {} criteria, seed {SEED}", CRITERIA.len());
    for (id, name) in CRITERIA {
        let start = Instant::now();
        match suite.run(id) {
            Ok(c) => {
                failed += usize::from(!c.passed);
                println!("{} ({:.1} s)", c.line(), start.elapsed().as_secs_f64());
            }
            Err(e) => {
                failed += 1;
                println!("FAIL criterion {id:>2} {name}: error: {e:#}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", CRITERIA.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
