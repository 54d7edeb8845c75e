//! Scalar distributions used by the samplers.
//!
//! Both samplers are part of the determinism contract: changing the method
//! changes every downstream sample for a fixed seed.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

/// Means below this use sequential inversion; above it the exact rejection
/// sampler from `rand_distr`.
pub const POISSON_INVERSION_LIMIT: f64 = 30.0;

pub fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    if mean < POISSON_INVERSION_LIMIT {
        let u: f64 = rng.random();
        let mut k = 0u64;
        let mut p = (-mean).exp();
        let mut cdf = p;
        while u > cdf {
            k += 1;
            p *= mean / k as f64;
            let next = cdf + p;
            // cdf stopped moving: rounding left u just above 1 - eps
            if next == cdf {
                break;
            }
            cdf = next;
        }
        k
    } else {
        Poisson::new(mean).expect("finite positive mean").sample(rng) as u64
    }
}

/// Length `L` with `Pr(L = n) = (1/(T+1)) (T/(T+1))^n`, drawn by inverting the CDF.
pub fn geometric_length<R: Rng + ?Sized>(t: f64, rng: &mut R) -> usize {
    // 1 - U lies in (0, 1], so the logarithm is finite
    let u = 1.0 - rng.random::<f64>();
    let log_q = -(1.0 / t).ln_1p();
    if !log_q.is_finite() || log_q == 0.0 {
        return 0;
    }
    let n = (u.ln() / log_q).floor();
    if n >= usize::MAX as f64 {
        usize::MAX
    } else {
        n as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;
    use crate::stats::{goodness_of_fit, poisson_pmf};

    #[test]
    fn poisson_zero_mean_is_zero() {
        let mut rng = derive_stream(1, "poisson-zero", 0);
        assert!((0..100).all(|_| poisson(0.0, &mut rng) == 0));
    }

    #[test]
    fn poisson_inversion_matches_pmf() {
        for mean in [0.3f64, 2.5, 12.0, 45.0] {
            let mut rng = derive_stream(5, "poisson-fit", mean.to_bits());
            let top = (mean + 8.0 * mean.sqrt() + 8.0) as usize;
            let mut counts = vec![0u64; top + 1];
            for _ in 0..200_000 {
                let k = poisson(mean, &mut rng) as usize;
                counts[k.min(top)] += 1;
            }
            let mut probs: Vec<f64> = (0..top).map(|k| poisson_pmf(k as u64, mean)).collect();
            probs.push(1.0 - probs.iter().sum::<f64>());
            let test = goodness_of_fit(&counts, &probs, 0);
            assert!(test.p_value > 0.001, "mean {mean}: p = {}", test.p_value);
        }
    }

    #[test]
    fn geometric_length_law() {
        let t = 3.0;
        let mut rng = derive_stream(9, "geometric-fit", 0);
        let top = 40;
        let mut counts = vec![0u64; top + 1];
        for _ in 0..200_000 {
            counts[geometric_length(t, &mut rng).min(top)] += 1;
        }
        let q = t / (t + 1.0);
        let mut probs: Vec<f64> = (0..top).map(|n| (1.0 - q) * q.powi(n as i32)).collect();
        probs.push(q.powi(top as i32));
        let test = goodness_of_fit(&counts, &probs, 0);
        assert!(test.p_value > 0.001, "p = {}", test.p_value);
    }

    #[test]
    fn geometric_length_tiny_t_is_zero() {
        let mut rng = derive_stream(9, "geometric-tiny", 0);
        assert!((0..1000).all(|_| geometric_length(1e-12, &mut rng) == 0));
    }
}
