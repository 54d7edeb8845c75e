//! Versioned statistical thresholds and sample sizes.
//!
//! Every acceptance check reads its tolerance from here, and the CLI
//! records [`thresholds`] in each run manifest. Bump [`VERSION`] whenever a
//! value changes.

use serde::Serialize;

pub const VERSION: u32 = 1;

/// Lower bound on the speed-event probability (fixed by the speed lemma).
pub const DELTA0: f64 = 1.0 / 6.0;

/// Smallest acceptable chi-square p-value.
pub const P_VALUE_MIN: f64 = 1e-3;
/// Multiplier on standard errors for one- and two-sided agreement checks.
pub const SIGMA_MULTIPLIER: f64 = 3.0;
/// One-sided 95% normal quantile used by the monotone trend test.
pub const TREND_Z: f64 = 1.645;
/// Relative tolerance of exact identities evaluated two ways.
pub const IDENTITY_REL_TOL: f64 = 1e-12;
/// Allowed gap between the two spectral radius estimators.
pub const RHO_AGREEMENT: f64 = 0.03;
/// Relative tolerance on the mean offspring of the Galton–Watson law.
pub const OFFSPRING_MEAN_REL_TOL: f64 = 0.01;
/// Allowed gap between the exact and plug-in Poisson entropies, in nats.
pub const ENTROPY_MC_TOL: f64 = 1e-3;
/// Cap on `total/u` over the `u` grid `10^-4..10^-1` at `(T, s) = (10, 4)`.
pub const ENTROPY_RATIO_MAX: f64 = 16.0;
/// Truncation-rate guard of the random-interlacement reference.
pub const TRUNCATION_RATE_LIMIT: f64 = crate::process::TRUNCATION_RATE_LIMIT;

/// Default cap on the number of vertices of a growing cluster.
pub const VERTEX_BUDGET: usize = 1_000_000;
/// Largest ball handled with explicit vectors by power iteration.
pub const MAX_EXPLICIT_BALL: usize = 1_000_000;
/// Reports needed before moment diagnostics are computed.
pub const MIN_MOMENT_REPORTS: usize = 100;

#[derive(Debug, Clone, Serialize)]
pub struct Thresholds {
    pub version: u32,
    pub delta0: f64,
    pub p_value_min: f64,
    pub sigma_multiplier: f64,
    pub trend_z: f64,
    pub identity_rel_tol: f64,
    pub rho_agreement: f64,
    pub offspring_mean_rel_tol: f64,
    pub entropy_mc_tol: f64,
    pub entropy_ratio_max: f64,
    pub truncation_rate_limit: f64,
    pub vertex_budget: usize,
    pub max_explicit_ball: usize,
    pub min_moment_reports: usize,
}

pub fn thresholds() -> Thresholds {
    Thresholds {
        version: VERSION,
        delta0: DELTA0,
        p_value_min: P_VALUE_MIN,
        sigma_multiplier: SIGMA_MULTIPLIER,
        trend_z: TREND_Z,
        identity_rel_tol: IDENTITY_REL_TOL,
        rho_agreement: RHO_AGREEMENT,
        offspring_mean_rel_tol: OFFSPRING_MEAN_REL_TOL,
        entropy_mc_tol: ENTROPY_MC_TOL,
        entropy_ratio_max: ENTROPY_RATIO_MAX,
        truncation_rate_limit: TRUNCATION_RATE_LIMIT,
        vertex_budget: VERTEX_BUDGET,
        max_explicit_ball: MAX_EXPLICIT_BALL,
        min_moment_reports: MIN_MOMENT_REPORTS,
    }
}
