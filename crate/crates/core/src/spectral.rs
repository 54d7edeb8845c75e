//! Spectral radius and escape probabilities of the simple random walk.
//!
//! Power iteration works on the lazy chain `(I + P)/2` killed on leaving a
//! ball, whose top eigenvalue `μ` gives `ρ_B = 2μ - 1`. The Dirichlet value
//! `ρ_B` increases to `ρ` with the radius. On regular trees the top
//! eigenfunction is radial, so the ball collapses to a birth–death chain
//! on distances `0..=R`.

use indexmap::IndexSet;
use rand::Rng;
use serde::Serialize;

use crate::defaults::{DELTA0, MAX_EXPLICIT_BALL, SIGMA_MULTIPLIER};
use crate::error::{FriError, Result};
use crate::graphs::{ball, graph_distance, GraphOracle, VertexKey, Window};
use crate::sampling::geometric_length;
use crate::stats::Estimate;
use crate::walks::{first_visit_within, killed_walk_avoids, step, KilledWalkLaw};

pub const MAX_POWER_ITERATIONS: usize = 1_000_000;
/// Residual `‖Lf - μf‖ / ‖f‖` at which power iteration stops.
pub const POWER_RESIDUAL_TOL: f64 = 1e-10;
/// Even times with fewer returns than this are left out of the fit.
pub const MIN_RETURNS_PER_TIME: u64 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralMethod {
    PowerIterationBall,
    ReturnProbability,
}

impl SpectralMethod {
    pub fn label(self) -> &'static str {
        match self {
            SpectralMethod::PowerIterationBall => "power_iteration_ball",
            SpectralMethod::ReturnProbability => "return_probability",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralEstimate {
    /// In `(0, 1]`.
    pub rho_hat: f64,
    /// Zero for power iteration.
    pub stderr: f64,
    pub method: SpectralMethod,
    /// Ball radius or largest return time.
    pub radius_or_horizon: usize,
    /// Power iteration reached [`POWER_RESIDUAL_TOL`].
    pub converged: bool,
    /// Return fit had enough data. Always true for power iteration.
    pub reliable: bool,
    pub iterations: usize,
    /// Radial birth–death reduction was used.
    pub lumped: bool,
}

/// Power iteration for the top eigenvalue of the symmetric, positive
/// semidefinite operator `apply` on `R^n`. Returns `(μ, iterations, converged)`.
fn power_iterate(n: usize, mut apply: impl FnMut(&[f64], &mut [f64])) -> (f64, usize, bool) {
    let mut f = vec![1.0 / (n as f64).sqrt(); n];
    let mut g = vec![0.0; n];
    let mut mu = 0.0;
    for it in 1..=MAX_POWER_ITERATIONS {
        apply(&f, &mut g);
        mu = f.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>();
        let residual = f.iter().zip(&g).map(|(a, b)| (b - mu * a).powi(2)).sum::<f64>().sqrt();
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return (0.0, it, true);
        }
        for (a, b) in f.iter_mut().zip(&g) {
            *a = b / norm;
        }
        if residual < POWER_RESIDUAL_TOL {
            return (mu, it, true);
        }
    }
    (mu, MAX_POWER_ITERATIONS, false)
}

/// Dirichlet spectral radius of `ball(x, radius)`: the walk is killed when
/// it steps outside the ball.
pub fn estimate_rho_power_iteration(oracle: &GraphOracle, x: &VertexKey, radius: usize) -> Result<SpectralEstimate> {
    if radius == 0 {
        return Err(FriError::InvalidParameter("radius must be at least 1".into()));
    }
    if !oracle.contains(x) {
        return Err(FriError::ForeignVertex(x.to_string()));
    }
    let (mu, iterations, converged, lumped) = match oracle.regular_tree_degree() {
        Some(d) => {
            let (mu, it, ok) = radial_tree_power(d, radius);
            (mu, it, ok, true)
        }
        None => {
            let (mu, it, ok) = explicit_ball_power(oracle, x, radius)?;
            (mu, it, ok, false)
        }
    };
    Ok(SpectralEstimate {
        rho_hat: (2.0 * mu - 1.0).clamp(f64::MIN_POSITIVE, 1.0),
        stderr: 0.0,
        method: SpectralMethod::PowerIterationBall,
        radius_or_horizon: radius,
        converged,
        reliable: true,
        iterations,
        lumped,
    })
}

/// Distance-from-centre chain of the `d`-regular tree in symmetric form.
/// `off[r]` couples distances `r` and `r + 1`.
fn radial_tree_power(d: usize, radius: usize) -> (f64, usize, bool) {
    let d = d as f64;
    let off: Vec<f64> = (0..radius).map(|r| if r == 0 { (1.0 / d).sqrt() } else { (d - 1.0).sqrt() / d }).collect();
    power_iterate(radius + 1, |f, g| {
        for r in 0..f.len() {
            let mut pf = 0.0;
            if r > 0 {
                pf += off[r - 1] * f[r - 1];
            }
            if r < off.len() {
                pf += off[r] * f[r + 1];
            }
            g[r] = 0.5 * (f[r] + pf);
        }
    })
}

/// `D^{1/2} P D^{-1/2}` on the explicit ball, entries `1/sqrt(deg v deg w)`.
fn explicit_ball_power(oracle: &GraphOracle, x: &VertexKey, radius: usize) -> Result<(f64, usize, bool)> {
    let vertices: IndexSet<VertexKey> = ball(oracle, x, radius).iter().cloned().collect();
    if vertices.len() > MAX_EXPLICIT_BALL {
        return Err(FriError::InvalidParameter(format!(
            "ball of radius {radius} has {} vertices, more than {MAX_EXPLICIT_BALL}",
            vertices.len()
        )));
    }
    let inv_sqrt_deg: Vec<f64> = vertices.iter().map(|v| 1.0 / (oracle.degree(v) as f64).sqrt()).collect();
    let adjacency: Vec<Vec<usize>> = vertices
        .iter()
        .map(|v| oracle.neighbors(v).iter().filter_map(|w| vertices.get_index_of(w)).collect())
        .collect();
    Ok(power_iterate(vertices.len(), |f, g| {
        for (i, nbrs) in adjacency.iter().enumerate() {
            let pf: f64 = nbrs.iter().map(|&j| inv_sqrt_deg[j] * f[j]).sum::<f64>() * inv_sqrt_deg[i];
            g[i] = 0.5 * (f[i] + pf);
        }
    }))
}

/// Weighted least squares for `log p_n = a + n log ρ + β log n` over even
/// return times, weights equal to the return counts.
pub fn estimate_rho_return<R: Rng + ?Sized>(
    oracle: &GraphOracle,
    x: &VertexKey,
    n_max: usize,
    mc_samples: u64,
    rng: &mut R,
) -> Result<SpectralEstimate> {
    if n_max < 2 || n_max % 2 == 1 {
        return Err(FriError::InvalidParameter(format!("n_max must be even and at least 2, got {n_max}")));
    }
    if mc_samples == 0 {
        return Err(FriError::InvalidParameter("mc_samples must be at least 1".into()));
    }
    let counts = return_counts(oracle, x, n_max, mc_samples, rng);
    let mut points = Vec::new();
    for n in (2..=n_max).step_by(2) {
        let c = counts[n];
        if c >= MIN_RETURNS_PER_TIME {
            let p = c as f64 / mc_samples as f64;
            // Var(log p̂) ≈ (1 - p) / c
            points.push((n as f64, p.ln(), c as f64 / (1.0 - p).max(1e-12)));
        }
    }
    let unreliable = SpectralEstimate {
        rho_hat: 1.0,
        stderr: f64::INFINITY,
        method: SpectralMethod::ReturnProbability,
        radius_or_horizon: n_max,
        converged: true,
        reliable: false,
        iterations: 0,
        lumped: false,
    };
    let Some((slope, slope_se)) = fit_log_return(&points) else { return Ok(unreliable) };
    let rho = slope.exp();
    Ok(SpectralEstimate {
        rho_hat: rho.clamp(f64::MIN_POSITIVE, 1.0),
        stderr: rho * slope_se,
        reliable: true,
        ..unreliable
    })
}

/// `counts[n]` = number of walks at `x` at time `n`. Walks stop once they
/// are too far to come back by `n_max`.
fn return_counts<R: Rng + ?Sized>(
    oracle: &GraphOracle,
    x: &VertexKey,
    n_max: usize,
    mc_samples: u64,
    rng: &mut R,
) -> Vec<u64> {
    let mut counts = vec![0u64; n_max + 1];
    for _ in 0..mc_samples {
        let mut v = x.clone();
        let mut safe_until = 0;
        for (t, count) in counts.iter_mut().enumerate().skip(1) {
            v = step(oracle, &v, rng);
            if t < safe_until {
                continue;
            }
            match oracle.closed_form_distance(&v, x) {
                Some(0) => *count += 1,
                Some(d) if d > n_max - t => break,
                Some(d) => safe_until = t + d,
                None if &v == x => *count += 1,
                None => {}
            }
        }
    }
    counts
}

/// Slope of `n` and its standard error in the three-term fit; `None` with
/// fewer than four usable points or a singular design.
fn fit_log_return(points: &[(f64, f64, f64)]) -> Option<(f64, f64)> {
    if points.len() < 4 {
        return None;
    }
    // normal equations for columns (1, n, ln n)
    let mut xtwx = [[0.0f64; 3]; 3];
    let mut xtwy = [0.0f64; 3];
    for &(n, y, w) in points {
        let row = [1.0, n, n.ln()];
        for i in 0..3 {
            xtwy[i] += w * row[i] * y;
            for j in 0..3 {
                xtwx[i][j] += w * row[i] * row[j];
            }
        }
    }
    let inv = invert3(&xtwx)?;
    let coef: Vec<f64> = (0..3).map(|i| (0..3).map(|j| inv[i][j] * xtwy[j]).sum()).collect();
    // weights are inverse variances, so the covariance is the inverse itself
    Some((coef[1], inv[1][1].max(0.0).sqrt()))
}

fn invert3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let c = |i: usize, j: usize| {
        let (r0, r1) = ((i + 1) % 3, (i + 2) % 3);
        let (c0, c1) = ((j + 1) % 3, (j + 2) % 3);
        m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]
    };
    let det = (0..3).map(|j| m[0][j] * c(0, j)).sum::<f64>();
    let scale = m.iter().flatten().map(|x| x.abs()).fold(0.0, f64::max);
    if !(det.abs() > 1e-14 * scale.powi(3)) {
        return None;
    }
    let mut inv = [[0.0; 3]; 3];
    for (i, row) in inv.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = c(j, i) / det;
        }
    }
    Some(inv)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EscapeMode {
    /// Walk drawn from `P^(T)_x`; exact in law.
    Killed(f64),
    /// Simple random walk for `n` steps. Returns after the horizon are
    /// missed, so the estimate is biased upwards.
    Horizon(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EscapeEstimate {
    pub estimate: Estimate,
    pub mode: EscapeMode,
    /// Set in horizon mode: truncation can only overestimate escape.
    pub upward_biased: bool,
}

/// Probability that the walk from `x` avoids `K` at all times `t >= 1`.
pub fn escape_probability<R: Rng + ?Sized>(
    oracle: &GraphOracle,
    x: &VertexKey,
    k: &Window,
    mode: EscapeMode,
    mc_samples: u64,
    rng: &mut R,
) -> Result<EscapeEstimate> {
    if mc_samples == 0 {
        return Err(FriError::InvalidParameter("mc_samples must be at least 1".into()));
    }
    let escapes = match mode {
        EscapeMode::Killed(t) => {
            let law = KilledWalkLaw::new(x.clone(), t)?;
            (0..mc_samples).filter(|_| killed_walk_avoids(oracle, &law, k, 1, rng)).count()
        }
        EscapeMode::Horizon(n) => {
            (0..mc_samples).filter(|_| first_visit_within(oracle, x, n, k, 1, rng).is_never()).count()
        }
    };
    Ok(EscapeEstimate {
        estimate: Estimate::from_bernoulli(escapes as u64, mc_samples),
        mode,
        upward_biased: matches!(mode, EscapeMode::Horizon(_)),
    })
}

/// Escape sums over a finite set against `(1 - ρ̂)#K` and `(1 - ρ̂)²#K`.
#[derive(Debug, Clone, Serialize)]
pub struct EscapeSumReport {
    pub n_k: usize,
    pub rho_hat: f64,
    /// `Σ_{y∈K} esc(y)`.
    pub sum: Estimate,
    /// `Σ_{y∈K} esc(y)²`, each square corrected for its sampling bias.
    pub sum_sq: Estimate,
    pub bound: f64,
    pub bound_sq: f64,
    pub holds: bool,
    pub holds_sq: bool,
}

pub fn escape_sum_check<R: Rng + ?Sized>(
    oracle: &GraphOracle,
    k: &Window,
    mode: EscapeMode,
    mc_samples: u64,
    rho_hat: f64,
    rng: &mut R,
) -> Result<EscapeSumReport> {
    if k.is_empty() {
        return Err(FriError::EmptyWindow);
    }
    let (mut sum, mut var, mut sum_sq, mut var_sq) = (0.0, 0.0, 0.0, 0.0);
    for y in k {
        let e = escape_probability(oracle, y, k, mode, mc_samples, rng)?.estimate;
        sum += e.mean;
        var += e.stderr * e.stderr;
        let n = mc_samples as f64;
        let unbiased = if n > 1.0 { e.mean * e.mean - e.mean * (1.0 - e.mean) / (n - 1.0) } else { e.mean * e.mean };
        sum_sq += unbiased;
        var_sq += (2.0 * e.mean * e.stderr).powi(2);
    }
    let n_k = k.len() as f64;
    let bound = (1.0 - rho_hat) * n_k;
    let bound_sq = (1.0 - rho_hat).powi(2) * n_k;
    let sum = Estimate::new(sum, var.sqrt());
    let sum_sq = Estimate::new(sum_sq, var_sq.sqrt());
    Ok(EscapeSumReport {
        n_k: k.len(),
        rho_hat,
        holds: sum.at_least(bound, SIGMA_MULTIPLIER),
        holds_sq: sum_sq.at_least(bound_sq, SIGMA_MULTIPLIER),
        sum,
        sum_sq,
        bound,
        bound_sq,
    })
}

/// `σ = ln(1/ρ̂) / (2 ln D)`, so that `D^σ ρ̂ = ρ̂^{1/2} < 1`.
pub fn default_sigma(rho_hat: f64, d: usize) -> Result<f64> {
    if !(rho_hat > 0.0 && rho_hat < 1.0) || d < 2 {
        return Err(FriError::InvalidParameter(format!(
            "default sigma needs 0 < rho < 1 and D >= 2, got {rho_hat}, {d}"
        )));
    }
    Ok((1.0 / rho_hat).ln() / (2.0 * (d as f64).ln()))
}

/// Smallest `T` with `C D^{σT} ρ̂^T <= 1/2` for `C = 1`; `None` when
/// `D^σ ρ̂ >= 1`.
pub fn speed_threshold(rho_hat: f64, d: usize, sigma: f64) -> Option<usize> {
    let rate = (1.0 / rho_hat).ln() - sigma * (d as f64).ln();
    (rho_hat > 0.0 && rate > 0.0).then(|| (2f64.ln() / rate).ceil().max(1.0) as usize)
}

#[derive(Debug, Clone, Serialize)]
pub struct SpeedReport {
    pub t: usize,
    pub sigma: f64,
    /// `P^(T)_x(len ≥ T, d(x, w(T)) ≥ σT)`.
    pub probability: Estimate,
    pub length_marginal: Estimate,
    /// `(T/(T+1))^T`.
    pub length_marginal_exact: f64,
    pub delta0: f64,
    /// Heuristic `T0` for the supplied `ρ̂`.
    pub t0_heuristic: Option<usize>,
    pub t_at_least_t0: bool,
    pub holds: bool,
}

/// Monte Carlo check that the walk is long and far away at time `T` with
/// probability at least `δ0`.
pub fn check_speed_lemma<R: Rng + ?Sized>(
    oracle: &GraphOracle,
    x: &VertexKey,
    t: usize,
    sigma: f64,
    rho_hat: f64,
    mc_samples: u64,
    rng: &mut R,
) -> Result<SpeedReport> {
    if t == 0 || mc_samples == 0 {
        return Err(FriError::InvalidParameter("T and mc_samples must be at least 1".into()));
    }
    if !(sigma >= 0.0) {
        return Err(FriError::InvalidParameter(format!("sigma must be non-negative, got {sigma}")));
    }
    let need = (sigma * t as f64).ceil() as usize;
    let (mut long, mut both) = (0u64, 0u64);
    for _ in 0..mc_samples {
        if geometric_length(t as f64, rng) < t {
            continue;
        }
        long += 1;
        if need == 0 {
            both += 1;
            continue;
        }
        let mut v = x.clone();
        for _ in 0..t {
            v = step(oracle, &v, rng);
        }
        if graph_distance(oracle, x, &v, need - 1).is_none() {
            both += 1;
        }
    }
    let probability = Estimate::from_bernoulli(both, mc_samples);
    let t0 = speed_threshold(rho_hat, oracle.degree_bound(), sigma);
    Ok(SpeedReport {
        t,
        sigma,
        length_marginal: Estimate::from_bernoulli(long, mc_samples),
        length_marginal_exact: (t as f64 / (t as f64 + 1.0)).powi(t as i32),
        delta0: DELTA0,
        t0_heuristic: t0,
        t_at_least_t0: t0.is_some_and(|t0| t >= t0),
        holds: probability.at_least(DELTA0, SIGMA_MULTIPLIER),
        probability,
    })
}
