//! Monte Carlo bookkeeping and the chi-square machinery used by the checks.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::gamma::ln_gamma;

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn new(mean: f64, stderr: f64) -> Self {
        Self { mean, stderr }
    }

    pub fn exact(value: f64) -> Self {
        Self { mean: value, stderr: 0.0 }
    }

    pub fn from_bernoulli(successes: u64, trials: u64) -> Self {
        if trials == 0 {
            return Self::new(f64::NAN, f64::INFINITY);
        }
        let p = successes as f64 / trials as f64;
        Self::new(p, (p * (1.0 - p) / trials as f64).sqrt())
    }

    pub fn scale(self, factor: f64) -> Self {
        Self::new(self.mean * factor, self.stderr * factor.abs())
    }

    /// Standard error of the difference of two independent estimates.
    pub fn combined_stderr(&self, other: &Estimate) -> f64 {
        self.stderr.hypot(other.stderr)
    }

    /// `|a - b| <= k * sqrt(se_a^2 + se_b^2)`.
    pub fn agrees_with(&self, other: &Estimate, k: f64) -> bool {
        (self.mean - other.mean).abs() <= k * self.combined_stderr(other)
    }

    /// `mean + k*se >= bound`: the estimate does not contradict a lower bound.
    pub fn at_least(&self, bound: f64, k: f64) -> bool {
        self.mean + k * self.stderr >= bound
    }
}

/// Streaming `(count, sum, sum of squares)` accumulator; merging is order-insensitive.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct RunningStats {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &RunningStats) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    pub fn estimate(&self) -> Estimate {
        Estimate::new(self.mean(), (self.variance() / self.count as f64).sqrt())
    }
}

impl FromIterator<f64> for RunningStats {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut stats = RunningStats::default();
        for x in iter {
            stats.push(x);
        }
        stats
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

pub fn chi_square_sf(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    (1.0 - dist.cdf(statistic)).clamp(0.0, 1.0)
}

pub fn chi_square_quantile(prob: f64, dof: usize) -> f64 {
    ChiSquared::new(dof as f64).expect("positive degrees of freedom").inverse_cdf(prob)
}

/// Minimum expected count per cell after pooling.
pub const MIN_EXPECTED: f64 = 5.0;

/// Pearson goodness of fit of `observed` counts against cell probabilities.
///
/// Cells are pooled left to right until each pooled cell has expected count
/// at least [`MIN_EXPECTED`]; an underfull remainder joins the last pooled
/// cell. Pooling depends only on the expected counts. `fitted` is the number
/// of parameters estimated from the data.
pub fn goodness_of_fit(observed: &[u64], probs: &[f64], fitted: usize) -> ChiSquareTest {
    assert_eq!(observed.len(), probs.len(), "one probability per cell");
    let n: u64 = observed.iter().sum();
    let n = n as f64;
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        obs += o as f64;
        exp += p * n;
        if exp >= MIN_EXPECTED {
            pooled.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    if exp > 0.0 || obs > 0.0 {
        match pooled.last_mut() {
            Some(last) => {
                last.0 += obs;
                last.1 += exp;
            }
            None => pooled.push((obs, exp)),
        }
    }
    let statistic: f64 = pooled.iter().filter(|(_, e)| *e > 0.0).map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = pooled.len().saturating_sub(1 + fitted);
    ChiSquareTest { statistic, dof, p_value: chi_square_sf(statistic, dof) }
}

/// Chi-square test of homogeneity for two samples binned on the same cells.
/// Cells empty in both samples are dropped.
pub fn two_sample_chi_square(a: &[u64], b: &[u64]) -> ChiSquareTest {
    assert_eq!(a.len(), b.len(), "samples must share their binning");
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    let (na, nb) = (na as f64, nb as f64);
    let total = na + nb;
    let mut statistic = 0.0;
    let mut cells = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        let col = (x + y) as f64;
        if col == 0.0 {
            continue;
        }
        cells += 1;
        let ea = col * na / total;
        let eb = col * nb / total;
        statistic += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
    }
    let dof = cells.saturating_sub(1);
    ChiSquareTest { statistic, dof, p_value: chi_square_sf(statistic, dof) }
}

pub fn poisson_pmf(k: u64, mean: f64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let k = k as f64;
    (k * mean.ln() - mean - ln_gamma(k + 1.0)).exp()
}

/// Plug-in Shannon entropy (nats) of an empirical histogram with the
/// Miller–Madow bias correction `(m - 1) / 2n`, `m` the number of occupied cells.
pub fn plug_in_entropy_miller_madow(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    let occupied = counts.iter().filter(|&&c| c > 0).count() as f64;
    let plug_in: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum();
    plug_in + (occupied - 1.0) / (2.0 * n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_estimate() {
        let e = Estimate::from_bernoulli(25, 100);
        assert_eq!(e.mean, 0.25);
        assert!((e.stderr - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn running_stats_merge_is_order_insensitive() {
        let xs = [1.0, 4.0, 2.5, 7.0, -1.0];
        let all: RunningStats = xs.iter().copied().collect();
        let mut left: RunningStats = xs[..2].iter().copied().collect();
        let right: RunningStats = xs[2..].iter().copied().collect();
        left.merge(&right);
        assert_eq!(left.count, all.count);
        assert!((left.mean() - all.mean()).abs() < 1e-12);
        assert!((left.variance() - all.variance()).abs() < 1e-12);
    }

    #[test]
    fn perfect_fit_has_p_one() {
        let test = goodness_of_fit(&[50, 30, 20], &[0.5, 0.3, 0.2], 0);
        assert!(test.statistic.abs() < 1e-12);
        assert_eq!(test.dof, 2);
        assert!((test.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pooling_merges_sparse_tail() {
        // expected counts 90, 9, 0.9, 0.1 -> cells {90}, {9}, {1}; the last joins {9}
        let test = goodness_of_fit(&[90, 9, 1, 0], &[0.9, 0.09, 0.009, 0.001], 0);
        assert_eq!(test.dof, 1);
    }

    #[test]
    fn gross_misfit_is_rejected() {
        let test = goodness_of_fit(&[900, 100], &[0.5, 0.5], 0);
        assert!(test.p_value < 1e-10);
    }

    #[test]
    fn two_sample_identical_histograms() {
        let test = two_sample_chi_square(&[10, 0, 30, 60], &[10, 0, 30, 60]);
        assert_eq!(test.dof, 2);
        assert!(test.statistic.abs() < 1e-12);
    }

    #[test]
    fn poisson_pmf_sums_to_one() {
        let total: f64 = (0..100).map(|k| poisson_pmf(k, 3.7)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(poisson_pmf(0, 0.0), 1.0);
    }

    #[test]
    fn miller_madow_uniform() {
        let counts = vec![1000u64; 4];
        let h = plug_in_entropy_miller_madow(&counts);
        assert!((h - (4f64.ln() + 3.0 / 8000.0)).abs() < 1e-12);
    }
}
