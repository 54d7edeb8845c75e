//! Upper bound on the base entropy of the FRI factor, in nats.
//!
//! The factor records the walks started at the identity: a count
//! `N ~ Poisson(u s/(T+1))`, then i.i.d. lengths `L_i ~ Geom(1/(T+1))`, then
//! uniform steps. The bound is `H(N) + E[N] H(L_1) + E[N] E[L_1] ln s`.

use serde::Serialize;

use crate::error::{FriError, Result};

/// Summation of the Poisson entropy stops once the remaining mass is below this.
pub const POISSON_TAIL_TOL: f64 = 1e-15;

pub fn nats_to_bits(h: f64) -> f64 {
    h / std::f64::consts::LN_2
}

/// `-Σ_k p_k ln p_k` for `Poisson(λ)`.
pub fn poisson_entropy(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(FriError::InvalidParameter(format!("Poisson mean must be positive, got {lambda}")));
    }
    let mut h = 0.0;
    let mut log_p = -lambda;
    let mut mass = 0.0;
    let mut k = 0u64;
    loop {
        let p = log_p.exp();
        h -= p * log_p;
        mass += p;
        k += 1;
        log_p += lambda.ln() - (k as f64).ln();
        // past the mode the tail is dominated by a geometric series
        if k as f64 > lambda {
            let ratio = lambda / (k as f64 + 1.0);
            let tail = log_p.exp() / (1.0 - ratio);
            if tail < POISSON_TAIL_TOL || 1.0 - mass < POISSON_TAIL_TOL {
                return Ok(h);
            }
        }
    }
}

/// `H(x, 1 - x)`.
pub fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p > 0.0 { -p * p.ln() } else { 0.0 };
    term(x) + term(1.0 - x)
}

fn check(u: f64, t: f64, s: usize) -> Result<()> {
    if !(u >= 0.0 && u.is_finite()) {
        return Err(FriError::InvalidParameter(format!("u must be non-negative, got {u}")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(FriError::InvalidParameter(format!("T must be positive, got {t}")));
    }
    if s == 0 {
        return Err(FriError::InvalidParameter("s must be at least 1".into()));
    }
    Ok(())
}

/// Entropy of a single length, `(T+1) H(1/(T+1), T/(T+1))`.
pub fn length_entropy(t: f64) -> Result<f64> {
    check(0.0, t, 1)?;
    Ok((t + 1.0) * binary_entropy(1.0 / (t + 1.0)))
}

/// `E[N] H(L_1) = u s H(1/(T+1), T/(T+1))`.
pub fn length_entropy_term(u: f64, t: f64, s: usize) -> Result<f64> {
    check(u, t, s)?;
    Ok(u * s as f64 * binary_entropy(1.0 / (t + 1.0)))
}

/// `E[N] E[L_1] ln s = (u s/(T+1)) T ln s`.
pub fn path_entropy_term(u: f64, t: f64, s: usize) -> Result<f64> {
    check(u, t, s)?;
    let sf = s as f64;
    Ok(u * sf / (t + 1.0) * t * sf.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyBound {
    pub u: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub s: usize,
    pub h_n: f64,
    pub h_l: f64,
    pub h_w: f64,
    pub total: f64,
}

impl EntropyBound {
    /// `total / u`; `NaN` at `u = 0`.
    pub fn total_over_u(&self) -> f64 {
        self.total / self.u
    }
}

pub fn entropy_bound(u: f64, t: f64, s: usize) -> Result<EntropyBound> {
    check(u, t, s)?;
    let lambda = u * s as f64 / (t + 1.0);
    let h_n = if lambda > 0.0 { poisson_entropy(lambda)? } else { 0.0 };
    let h_l = length_entropy_term(u, t, s)?;
    let h_w = path_entropy_term(u, t, s)?;
    Ok(EntropyBound { u, t, s, h_n, h_l, h_w, total: h_n + h_l + h_w })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defaults::ENTROPY_RATIO_MAX;
    use crate::sampling::poisson;
    use crate::stats::{plug_in_entropy_miller_madow, poisson_pmf};
    use proptest::prelude::*;

    /// Plain summation over a generous fixed range.
    fn poisson_entropy_oracle(lambda: f64) -> f64 {
        (0..2000u64).map(|k| poisson_pmf(k, lambda)).filter(|&p| p > 0.0).map(|p| -p * p.ln()).sum()
    }

    #[test]
    fn poisson_entropy_values() {
        let h1 = poisson_entropy(1.0).unwrap();
        assert!((h1 - 1.3048).abs() < 5e-5, "{h1}");
        for lambda in [1e-6, 0.01, 0.3, 1.0, 5.0, 40.0, 300.0] {
            let h = poisson_entropy(lambda).unwrap();
            assert!((h - poisson_entropy_oracle(lambda)).abs() < 1e-12, "{lambda}");
        }
        assert!(poisson_entropy(1e-9).unwrap() < 1e-7);
        assert!(poisson_entropy(0.0).is_err());
        assert!(poisson_entropy(-1.0).is_err());
    }

    #[test]
    fn poisson_entropy_is_increasing() {
        let mut last = 0.0;
        for i in 1..=1000 {
            let h = poisson_entropy(0.01 * i as f64).unwrap();
            assert!(h > last);
            last = h;
        }
    }

    #[test]
    fn poisson_entropy_matches_plug_in() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(11);
        let n = 1_000_000;
        for lambda in [0.1, 1.0, 5.0] {
            let mut counts = vec![0u64; 64];
            for _ in 0..n {
                counts[poisson(lambda, &mut rng) as usize] += 1;
            }
            let est = plug_in_entropy_miller_madow(&counts);
            assert!((est - poisson_entropy(lambda).unwrap()).abs() < 3e-3, "{lambda}: {est}");
        }
    }

    #[test]
    fn length_terms() {
        assert!((length_entropy(1.0).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-12);
        // geometric entropy by direct summation
        for t in [0.5, 3.0, 20.0] {
            let q: f64 = t / (t + 1.0);
            let direct: f64 =
                (0..20_000).map(|n| q.powi(n) / (t + 1.0)).filter(|&p| p > 0.0).map(|p| -p * p.ln()).sum();
            assert!((direct - length_entropy(t).unwrap()).abs() < 1e-10);
        }
        assert_eq!(length_entropy_term(0.0, 3.0, 4).unwrap(), 0.0);
        for t in [0.1, 1.0, 10.0, 1e4] {
            assert!(length_entropy_term(1.0, t, 4).unwrap() <= 4.0 * 2f64.ln() + 1e-12);
        }
    }

    #[test]
    fn path_terms() {
        assert_eq!(path_entropy_term(1.0, 5.0, 1).unwrap(), 0.0);
        let v = path_entropy_term(1.0, 2.0, 4).unwrap();
        assert!((v - 4.0 / 3.0 * 2.0 * 4f64.ln()).abs() < 1e-12);
        assert!((v - 3.697).abs() < 1e-3);
        let far = path_entropy_term(0.5, 1e9, 3).unwrap();
        assert!((far - 0.5 * 3.0 * 3f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn bound_is_order_u() {
        let ratios: Vec<f64> =
            [1e-4, 1e-3, 1e-2, 1e-1].iter().map(|&u| entropy_bound(u, 10.0, 4).unwrap().total_over_u()).collect();
        let max = ratios.iter().cloned().fold(0.0, f64::max);
        assert!(max < ENTROPY_RATIO_MAX, "{ratios:?}");
        // H(N)/u grows like ln(1/u), so the ratio is largest at the smallest u
        assert!(ratios.windows(2).all(|w| w[0] > w[1]));
        assert_eq!(entropy_bound(0.0, 10.0, 4).unwrap().total, 0.0);
        assert!(entropy_bound(1e-3, 10.0, 4).unwrap().total < 0.01);
    }

    proptest! {
        #[test]
        fn bound_terms_are_consistent(u in 0.0f64..2.0, t in 0.01f64..1e3, s in 1usize..12) {
            let b = entropy_bound(u, t, s).unwrap();
            prop_assert!(b.h_n >= 0.0 && b.h_l >= 0.0 && b.h_w >= 0.0);
            prop_assert!((b.total - (b.h_n + b.h_l + b.h_w)).abs() <= 1e-12 * b.total.max(1.0));
            let bigger = entropy_bound(u * 1.01 + 1e-6, t, s).unwrap();
            prop_assert!(bigger.total > b.total);
        }
    }
}
