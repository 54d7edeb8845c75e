//! Parallel replica execution with deterministic stream assignment.

use fri_core::rng::{derive_stream, StreamRng};
use fri_core::stats::Estimate;
use fri_core::{FriParams, GraphOracle, VertexKey};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Kind};
use crate::manifest::StreamRecord;

/// Fixed number of chunks a Monte Carlo estimate is split into, so results do
/// not depend on the worker count.
pub const MC_CHUNKS: u64 = 64;

pub struct Runner {
    pub kind: Kind,
    pub config: ExperimentConfig,
    pub oracle: GraphOracle,
    pub workers: usize,
    pool: rayon::ThreadPool,
    pub streams: Vec<StreamRecord>,
    pub truncated_runs: u64,
}

impl Runner {
    pub fn new(kind: Kind, config: ExperimentConfig, workers: usize) -> anyhow::Result<Self> {
        let oracle = config.graph.build()?;
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
        Ok(Runner {
            kind,
            config,
            oracle,
            workers: pool.current_num_threads(),
            pool,
            streams: Vec::new(),
            truncated_runs: 0,
        })
    }

    pub fn seed(&self) -> u64 {
        self.config.seed()
    }

    pub fn origin(&self) -> VertexKey {
        self.oracle.origin()
    }

    fn stream_id(&self, tag: &str, cell: Option<(usize, &FriParams)>) -> String {
        match cell {
            Some((i, p)) => format!("{}/{tag}/cell{i}/u={}/T={}", self.kind, p.u, p.t),
            None => format!("{}/{tag}", self.kind),
        }
    }

    fn record(&mut self, id: String, cell: Option<(usize, &FriParams)>, replicas: u64) {
        self.streams.push(StreamRecord {
            experiment_id: id,
            cell: cell.map(|c| c.0),
            u: cell.map(|c| c.1.u),
            t: cell.map(|c| c.1.t),
            replicas,
        });
    }

    /// Runs `f(replica, rng)` for `replica in 0..n` on the pool, each with its
    /// own stream; results come back in replica order.
    pub fn replicas<T, F>(
        &mut self,
        tag: &str,
        cell: Option<(usize, &FriParams)>,
        n: u64,
        f: F,
    ) -> anyhow::Result<Vec<T>>
    where
        T: Send,
        F: Fn(u64, &mut StreamRng) -> anyhow::Result<T> + Sync + Send,
    {
        let id = self.stream_id(tag, cell);
        self.record(id.clone(), cell, n);
        let seed = self.seed();
        self.pool.install(|| {
            (0..n)
                .into_par_iter()
                .map(|r| {
                    let mut rng = derive_stream(seed, &id, r);
                    f(r, &mut rng)
                })
                .collect()
        })
    }

    /// Splits `total` draws into [`MC_CHUNKS`] replicas; `f(draws, rng)`.
    pub fn chunks<T, F>(
        &mut self,
        tag: &str,
        cell: Option<(usize, &FriParams)>,
        total: u64,
        f: F,
    ) -> anyhow::Result<Vec<(T, u64)>>
    where
        T: Send,
        F: Fn(u64, &mut StreamRng) -> anyhow::Result<T> + Sync + Send,
    {
        let n = MC_CHUNKS.min(total).max(1);
        let sizes: Vec<u64> = (0..n).map(|i| total / n + u64::from(i < total % n)).collect();
        self.replicas(tag, cell, n, |r, rng| Ok((f(sizes[r as usize], rng)?, sizes[r as usize])))
    }

    pub fn install<T: Send>(&self, f: impl FnOnce() -> T + Send) -> T {
        self.pool.install(f)
    }
}

/// Combines estimates of the same mean from independent parts of sizes `n_i`.
pub fn merge_estimates(parts: &[(Estimate, u64)]) -> Estimate {
    let total: u64 = parts.iter().map(|p| p.1).sum();
    let n = total as f64;
    let mean = parts.iter().map(|(e, k)| e.mean * *k as f64).sum::<f64>() / n;
    let var = parts.iter().map(|(e, k)| (e.stderr * *k as f64).powi(2)).sum::<f64>();
    Estimate::new(mean, var.sqrt() / n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merged_bernoulli_equals_pooled() {
        let a = Estimate::from_bernoulli(30, 100);
        let b = Estimate::from_bernoulli(50, 100);
        let m = merge_estimates(&[(a, 100), (b, 100)]);
        assert!((m.mean - 0.4).abs() < 1e-15);
        assert!(m.stderr > 0.0 && m.stderr < a.stderr);
    }
}
