//! The FRI point process: the intensity `ν^(T)`, exact window samplers and
//! trace diagnostics against the random-interlacement limit.
//!
//! A window sample draws, for every `x ∈ L \ K`, a Poisson number of pairs
//! `(a, b)` from `P^(T)_x × P^(T)_x`, keeps the pairs where `a` never comes
//! back to `L` and `b` never visits `K`, and glues each kept pair into
//! `Con(a, b)`. With `K = ∅` the result is exactly `ω` restricted to the
//! walks that visit `L`.

use std::io::{self, Write};

use indexmap::{IndexMap, IndexSet};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FriError, Result};
use crate::graphs::{GraphOracle, VertexKey, Window};
use crate::sampling::poisson;
use crate::stats::{poisson_pmf, Estimate};
use crate::walks::{
    concatenate, first_visit_within, hitting_time, killed_walk_avoids, restrict_to_window, sample_killed_walk_avoiding,
    step, HitVariant, HittingTime, KilledWalkLaw, Walk,
};

/// Intensity `u` and average stopping time `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FriParams {
    pub u: f64,
    #[serde(rename = "T")]
    pub t: f64,
}

impl FriParams {
    /// `u = 0` is admitted as the degenerate empty process.
    pub fn new(u: f64, t: f64) -> Result<Self> {
        if !(u >= 0.0 && u.is_finite()) {
            return Err(FriError::InvalidParameter(format!("u must be non-negative and finite, got {u}")));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(FriError::InvalidParameter(format!("T must be positive and finite, got {t}")));
        }
        Ok(FriParams { u, t })
    }

    pub fn law(&self, start: VertexKey) -> KilledWalkLaw {
        KilledWalkLaw { start, t: self.t }
    }

    /// `T` as a natural number, when it is one.
    pub fn integer_t(&self) -> Option<usize> {
        (self.t.fract() == 0.0 && self.t >= 1.0).then_some(self.t as usize)
    }
}

/// `ν^(T)(w) = deg(w(0))/(T+1) · P^(T)_{w(0)}(w)`, evaluated term by term.
pub fn nu_t(oracle: &GraphOracle, params: &FriParams, w: &Walk) -> f64 {
    if !w.is_valid_in(oracle) {
        return 0.0;
    }
    let t = params.t;
    let keep = t / (t + 1.0);
    let mut p = 1.0 / (t + 1.0);
    for v in &w.vertices()[..w.len()] {
        p *= keep;
        p /= oracle.degree(v) as f64;
    }
    oracle.degree(w.start()) as f64 / (t + 1.0) * p
}

/// The same measure in its local form: `deg(w(0))/(T+1)^2` for length 0 and
/// `(T+1)^{-2} (T/(T+1))^ℓ Π_{0<k<ℓ} deg(w(k))^{-1}` otherwise.
pub fn nu_t_local(oracle: &GraphOracle, params: &FriParams, w: &Walk) -> f64 {
    if !w.is_valid_in(oracle) {
        return 0.0;
    }
    let t1 = params.t + 1.0;
    let l = w.len();
    if l == 0 {
        return oracle.degree(w.start()) as f64 / (t1 * t1);
    }
    let interior: f64 = w.vertices()[1..l].iter().map(|v| oracle.degree(v) as f64).product();
    (params.t / t1).powi(l as i32) / (t1 * t1 * interior)
}

/// `ln ν^(T)(w)`, `-inf` for walks outside the support.
pub fn log_nu_t(oracle: &GraphOracle, params: &FriParams, w: &Walk) -> f64 {
    if !w.is_valid_in(oracle) {
        return f64::NEG_INFINITY;
    }
    let t1 = params.t + 1.0;
    let l = w.len();
    if l == 0 {
        return (oracle.degree(w.start()) as f64).ln() - 2.0 * t1.ln();
    }
    let log_interior: f64 = w.vertices()[1..l].iter().map(|v| (oracle.degree(v) as f64).ln()).sum();
    l as f64 * (params.t / t1).ln() - 2.0 * t1.ln() - log_interior
}

/// The pair of windows `(L, K)` a configuration was sampled on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowAnnotation {
    pub l: Window,
    pub k: Window,
}

/// A finite counting measure on walks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WalkConfiguration {
    walks: IndexMap<Walk, u32>,
    window: Option<WindowAnnotation>,
}

impl WalkConfiguration {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn annotated(l: Window, k: Window) -> Self {
        WalkConfiguration { walks: IndexMap::new(), window: Some(WindowAnnotation { l, k }) }
    }

    pub fn window(&self) -> Option<&WindowAnnotation> {
        self.window.as_ref()
    }

    pub fn set_window(&mut self, window: Option<WindowAnnotation>) {
        self.window = window;
    }

    pub fn add(&mut self, w: Walk, mult: u32) {
        if mult > 0 {
            *self.walks.entry(w).or_insert(0) += mult;
        }
    }

    /// Multiset union. The annotation survives only if both sides agree.
    pub fn merge(&mut self, other: &WalkConfiguration) {
        for (w, &m) in &other.walks {
            self.add(w.clone(), m);
        }
        if self.window != other.window {
            self.window = None;
        }
    }

    pub fn multiplicity(&self, w: &Walk) -> u32 {
        self.walks.get(w).copied().unwrap_or(0)
    }

    /// Number of distinct walks.
    pub fn support_len(&self) -> usize {
        self.walks.len()
    }

    /// Total mass, multiplicities included.
    pub fn total(&self) -> u64 {
        self.walks.values().map(|&m| m as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.walks.is_empty()
    }

    /// Walks in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = (&Walk, u32)> {
        self.walks.iter().map(|(w, &m)| (w, m))
    }

    /// Entries ordered by start key, length, then path.
    pub fn sorted(&self) -> Vec<(&Walk, u32)> {
        let mut entries: Vec<_> = self.iter().collect();
        entries.sort_by(|(a, _), (b, _)| (a.start(), a.len(), a.vertices()).cmp(&(b.start(), b.len(), b.vertices())));
        entries
    }

    /// Total mass of the walks satisfying `pred`.
    pub fn count_where(&self, mut pred: impl FnMut(&Walk) -> bool) -> u64 {
        self.iter().filter(|(w, _)| pred(w)).map(|(_, m)| m as u64).sum()
    }

    /// Every walk visits `L` and, when `K` is non-empty, avoids `K`.
    pub fn respects_window(&self) -> bool {
        let Some(ann) = &self.window else { return true };
        self.walks.keys().all(|w| {
            !hitting_time(w, &ann.l, HitVariant::First).is_never()
                && hitting_time(w, &ann.k, HitVariant::First).is_never()
        })
    }

    /// JSONL dump: `header` on the first line, then one
    /// `{"walk": [...], "mult": m}` object per walk in sorted order.
    pub fn write_jsonl<W: Write>(&self, mut out: W, header: &serde_json::Value) -> io::Result<()> {
        writeln!(out, "{header}")?;
        for (w, m) in self.sorted() {
            writeln!(out, "{}", serde_json::json!({ "walk": w.to_json(), "mult": m }))?;
        }
        Ok(())
    }
}

/// A kept pair from the window sampler, with the vertex it was drawn at.
#[derive(Debug, Clone, PartialEq)]
pub struct RetainedPair {
    pub x: VertexKey,
    pub a: Walk,
    pub b: Walk,
}

/// Raw output of the window sampler: the kept pairs and how many pairs were
/// proposed in total.
#[derive(Debug, Clone, Default)]
pub struct WindowDraw {
    pub pairs: Vec<RetainedPair>,
    pub proposed: u64,
}

fn check_nested(l: &Window, k: &Window) -> Result<()> {
    if k.is_subset(l) {
        Ok(())
    } else {
        Err(FriError::WindowNotNested)
    }
}

/// For each `x ∈ L \ K` (in `L`'s order) draws `Poisson(u·deg x)` pairs and
/// keeps those with `tH_L(a) = ∞` and `H_K(b) = ∞`.
pub fn sample_window_pairs<R: Rng + ?Sized>(
    oracle: &GraphOracle,
    params: &FriParams,
    l: &Window,
    k: &Window,
    rng: &mut R,
) -> Result<WindowDraw> {
    check_nested(l, k)?;
    let mut draw = WindowDraw::default();
    for x in l.difference(k) {
        let n = poisson(params.u * oracle.degree(x) as f64, rng);
        draw.proposed += n;
        let law = params.law(x.clone());
        for _ in 0..n {
            let Some(a) = sample_killed_walk_avoiding(oracle, &law, l, 1, rng) else { continue };
            let Some(b) = sample_killed_walk_avoiding(oracle, &law, k, 0, rng) else { continue };
            draw.pairs.push(RetainedPair { x: x.clone(), a, b });
        }
    }
    Ok(draw)
}

/// `ω` restricted to `W_L \ W_K`, as a configuration annotated `(L, K)`.
pub fn sample_fri_window<R: Rng + ?Sized>(
    oracle: &GraphOracle,
    params: &FriParams,
    l: &Window,
    k: &Window,
    rng: &mut R,
) -> Result<WalkConfiguration> {
    let draw = sample_window_pairs(oracle, params, l, k, rng)?;
    let mut config = WalkConfiguration::annotated(l.clone(), k.clone());
    for pair in draw.pairs {
        config.add(concatenate(&pair.a, &pair.b).expect("both walks start at x"), 1);
    }
    Ok(config)
}

/// Number of walks of `ω` visiting `L`, without building them.
pub fn sample_window_count<R: Rng + ?Sized>(oracle: &GraphOracle, params: &FriParams, l: &Window, rng: &mut R) -> u64 {
    let mut count = 0;
    for x in l.iter() {
        let n = poisson(params.u * oracle.degree(x) as f64, rng);
        let law = params.law(x.clone());
        count += (0..n).filter(|_| killed_walk_avoids(oracle, &law, l, 1, rng)).count() as u64;
    }
    count
}

/// Monte Carlo estimate of `P^(T)_x(tH_x = ∞)`.
pub fn killed_escape_estimate<R: Rng + ?Sized>(
    oracle: &GraphOracle,
    law: &KilledWalkLaw,
    k: &Window,
    mc_samples: u64,
    rng: &mut R,
) -> Estimate {
    let escapes = (0..mc_samples).filter(|_| killed_walk_avoids(oracle, law, k, 1, rng)).count() as u64;
    Estimate::from_bernoulli(escapes, mc_samples)
}

/// `u · deg x · P^(T)_x(tH_x = ∞)`, the mean number of walks through `x`.
pub fn expected_walks_through<R: Rng + ?Sized>(
    oracle: &GraphOracle,
    params: &FriParams,
    x: &VertexKey,
    mc_samples: u64,
    rng: &mut R,
) -> Result<Estimate> {
    if mc_samples == 0 {
        return Err(FriError::InvalidParameter("mc_samples must be at least 1".into()));
    }
    let esc = killed_escape_estimate(oracle, &params.law(x.clone()), &Window::singleton(x.clone()), mc_samples, rng);
    Ok(esc.scale(params.u * oracle.degree(x) as f64))
}

/// An undirected edge with its endpoints in key order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge(VertexKey, VertexKey);

impl Edge {
    pub fn new(a: VertexKey, b: VertexKey) -> Self {
        if a <= b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn endpoints(&self) -> (&VertexKey, &VertexKey) {
        (&self.0, &self.1)
    }
}

/// Edges traversed by the support of `config`, in first-traversal order.
pub fn edges_of(config: &WalkConfiguration) -> IndexSet<Edge> {
    let mut edges = IndexSet::new();
    for (w, _) in config.iter() {
        for p in w.vertices().windows(2) {
            edges.insert(Edge::new(p[0].clone(), p[1].clone()));
        }
    }
    edges
}

/// Vertices visited by the support of `config`, in first-visit order.
pub fn vertices_of(config: &WalkConfiguration) -> Window {
    config.iter().flat_map(|(w, _)| w.vertices().iter().cloned()).collect()
}

/// Which walks of `ω ↾ W_K` a trace event counts.
#[derive(Debug, Clone, PartialEq)]
pub enum TracePattern {
    /// Every walk visiting `K`.
    Any,
    /// Walks whose restriction `w_K` equals the given walk.
    Exact(Walk),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountPredicate {
    Zero,
    AtLeast(u64),
    Exactly(u64),
}

impl CountPredicate {
    pub fn holds(&self, n: u64) -> bool {
        match *self {
            CountPredicate::Zero => n == 0,
            CountPredicate::AtLeast(m) => n >= m,
            CountPredicate::Exactly(m) => n == m,
        }
    }

    /// `Pr(N satisfies the predicate)` for `N ~ Poisson(mean)`, and its
    /// derivative in `mean`.
    pub fn poisson_probability(&self, mean: f64) -> (f64, f64) {
        let pmf = |k: u64| poisson_pmf(k, mean);
        let below = |k: u64| if k == 0 { 0.0 } else { pmf(k - 1) };
        match *self {
            CountPredicate::Zero => (pmf(0), -pmf(0)),
            CountPredicate::AtLeast(m) => {
                let cdf: f64 = (0..m).map(pmf).sum();
                ((1.0 - cdf).max(0.0), below(m))
            }
            CountPredicate::Exactly(m) => (pmf(m), below(m) - pmf(m)),
        }
    }
}

/// An event on the trace of `ω` on a finite window.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEvent {
    window: Window,
    pattern: TracePattern,
    predicate: CountPredicate,
}

impl TraceEvent {
    /// The window must be non-empty and an exact pattern must start and end
    /// in it.
    pub fn new(window: Window, pattern: TracePattern, predicate: CountPredicate) -> Result<Self> {
        if window.is_empty() {
            return Err(FriError::EmptyWindow);
        }
        if let TracePattern::Exact(p) = &pattern {
            if !window.contains(p.start()) || !window.contains(p.end()) {
                return Err(FriError::InvalidParameter("trace pattern must start and end in the window".into()));
            }
        }
        Ok(TraceEvent { window, pattern, predicate })
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn pattern(&self) -> &TracePattern {
        &self.pattern
    }

    pub fn predicate(&self) -> CountPredicate {
        self.predicate
    }

    /// Whether a walk of `ω ↾ W_K` is counted.
    pub fn matches(&self, w: &Walk) -> bool {
        match (&self.pattern, restrict_to_window(w, &self.window)) {
            (_, None) => false,
            (TracePattern::Any, Some(_)) => true,
            (TracePattern::Exact(p), Some(trace)) => &trace == p,
        }
    }

    /// Whether a configuration realises the event.
    pub fn holds_for(&self, config: &WalkConfiguration) -> bool {
        self.predicate.holds(config.count_where(|w| self.matches(w)))
    }
}

/// Monte Carlo probability that `ω ↾ W_K` realises `event`.
pub fn trace_probability_estimate<R: Rng + ?Sized>(
    oracle: &GraphOracle,
    params: &FriParams,
    event: &TraceEvent,
    mc_samples: u64,
    rng: &mut R,
) -> Result<Estimate> {
    if mc_samples == 0 {
        return Err(FriError::InvalidParameter("mc_samples must be at least 1".into()));
    }
    let k = event.window();
    let mut hits = 0u64;
    for _ in 0..mc_samples {
        let count = match event.pattern() {
            TracePattern::Any => sample_window_count(oracle, params, k, rng),
            TracePattern::Exact(_) => {
                let config = sample_fri_window(oracle, params, k, &Window::new(), rng)?;
                config.count_where(|w| event.matches(w))
            }
        };
        if event.predicate().holds(count) {
            hits += 1;
        }
    }
    Ok(Estimate::from_bernoulli(hits, mc_samples))
}

/// Monte Carlo approximation of the random-interlacement trace measure of a
/// pattern on `K`, from unkilled walks cut at a finite horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QkEstimate {
    /// `Q_K` of the pattern (the total mass `cap(K)` for [`TracePattern::Any`]).
    pub mass: Estimate,
    pub horizon: usize,
    /// Fraction of simulated walks that were in `K` during the second half of
    /// the horizon; escape past the horizon is then least certain.
    pub truncation_rate: f64,
    pub horizon_too_small: bool,
}

/// Truncation rates above this flag the horizon as too small.
pub const TRUNCATION_RATE_LIMIT: f64 = 0.01;

impl QkEstimate {
    /// `Pr(predicate)` for a `Poisson(u · mass)` count, with a delta-method
    /// standard error.
    pub fn count_probability(&self, u: f64, predicate: CountPredicate) -> Estimate {
        let (p, dp) = predicate.poisson_probability(u * self.mass.mean);
        Estimate::new(p, (dp * u * self.mass.stderr).abs())
    }
}

/// Horizon of `50 / (1 - ρ̂)` steps.
pub fn default_horizon(rho_hat: f64) -> Result<usize> {
    if !(rho_hat > 0.0 && rho_hat < 1.0) {
        return Err(FriError::InvalidParameter(format!("default horizon needs 0 < rho < 1, got {rho_hat}")));
    }
    Ok((50.0 / (1.0 - rho_hat)).ceil() as usize)
}

/// Tracks truncation events across the walks of one estimate.
#[derive(Default)]
struct HorizonWalks {
    walks: u64,
    late: u64,
}

impl HorizonWalks {
    /// Unkilled walk of `horizon` steps; returns the path up to its last visit
    /// to `k` (the whole path is needed only for exact patterns).
    fn forward<R: Rng + ?Sized>(
        &mut self,
        oracle: &GraphOracle,
        x: &VertexKey,
        k: &Window,
        horizon: usize,
        rng: &mut R,
    ) -> Vec<VertexKey> {
        self.walks += 1;
        let mut path = vec![x.clone()];
        let mut last = 0;
        let mut v = x.clone();
        for t in 1..=horizon {
            v = step(oracle, &v, rng);
            path.push(v.clone());
            if k.contains(&v) {
                last = t;
            }
        }
        if 2 * last > horizon {
            self.late += 1;
        }
        path.truncate(last + 1);
        path
    }

    /// Whether an unkilled walk from `x` stays out of `k` at times `1..=horizon`.
    fn escapes<R: Rng + ?Sized>(
        &mut self,
        oracle: &GraphOracle,
        x: &VertexKey,
        k: &Window,
        horizon: usize,
        rng: &mut R,
    ) -> bool {
        self.walks += 1;
        match first_visit_within(oracle, x, horizon, k, 1, rng) {
            HittingTime::Never => true,
            HittingTime::At(t) => {
                if 2 * t > horizon {
                    self.late += 1;
                }
                false
            }
        }
    }

    fn rate(&self) -> f64 {
        if self.walks == 0 {
            0.0
        } else {
            self.late as f64 / self.walks as f64
        }
    }
}

/// Product of two independent estimates, with a first-order standard error.
fn product(a: Estimate, b: Estimate) -> Estimate {
    Estimate::new(a.mean * b.mean, (a.mean * b.stderr).hypot(b.mean * a.stderr))
}

/// `Q_K` of a trace pattern: `deg x · P_x(backward escape) · P_x(forward
/// trace equals the pattern)` summed over the starting vertex `x`.
///
/// Every factor is estimated with `mc_samples` independent walks of
/// `horizon` steps. The caller is responsible for transience of the graph.
pub fn q_k_reference_estimate<R: Rng + ?Sized>(
    oracle: &GraphOracle,
    k: &Window,
    pattern: &TracePattern,
    horizon: usize,
    mc_samples: u64,
    rng: &mut R,
) -> Result<QkEstimate> {
    if k.is_empty() {
        return Err(FriError::EmptyWindow);
    }
    if mc_samples == 0 || horizon == 0 {
        return Err(FriError::InvalidParameter("mc_samples and horizon must be at least 1".into()));
    }
    let mut walks = HorizonWalks::default();
    let escape = |x: &VertexKey, walks: &mut HorizonWalks, rng: &mut R| {
        let n = (0..mc_samples).filter(|_| walks.escapes(oracle, x, k, horizon, rng)).count() as u64;
        Estimate::from_bernoulli(n, mc_samples)
    };
    let mass = match pattern {
        TracePattern::Any => {
            let mut mean = 0.0;
            let mut var = 0.0;
            for x in k.iter() {
                let e = escape(x, &mut walks, rng).scale(oracle.degree(x) as f64);
                mean += e.mean;
                var += e.stderr * e.stderr;
            }
            Estimate::new(mean, var.sqrt())
        }
        TracePattern::Exact(p) => {
            let x = p.start();
            if !k.contains(x) || !k.contains(p.end()) {
                return Err(FriError::InvalidParameter("trace pattern must start and end in the window".into()));
            }
            let backward = escape(x, &mut walks, rng);
            let matches = (0..mc_samples)
                .filter(|_| walks.forward(oracle, x, k, horizon, rng).as_slice() == p.vertices())
                .count() as u64;
            let forward = Estimate::from_bernoulli(matches, mc_samples);
            product(backward, forward).scale(oracle.degree(x) as f64)
        }
    };
    let truncation_rate = walks.rate();
    Ok(QkEstimate { mass, horizon, truncation_rate, horizon_too_small: truncation_rate > TRUNCATION_RATE_LIMIT })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{build_cayley_graph, GraphFamily};
    use crate::rng::derive_stream;
    use crate::walks::{sample_walk_of_length, split_at};

    fn tree(d: usize) -> GraphOracle {
        build_cayley_graph(&GraphFamily::RegularTree { degree: d }).unwrap()
    }

    #[test]
    fn nu_examples() {
        let g = tree(3);
        let p = FriParams::new(1.0, 1.0).unwrap();
        let o = g.origin();
        assert!((nu_t(&g, &p, &Walk::trivial(o.clone())) - 0.75).abs() < 1e-15);
        let w = Walk::new(vec![o.clone(), g.neighbor(&o, 0)]).unwrap();
        assert!((nu_t(&g, &p, &w) - 0.125).abs() < 1e-15);
        assert!((nu_t_local(&g, &p, &w) - 0.125).abs() < 1e-15);
        assert!((log_nu_t(&g, &p, &w) - 0.125f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn params_validation() {
        assert!(FriParams::new(-1.0, 1.0).is_err());
        assert!(FriParams::new(1.0, 0.0).is_err());
        assert_eq!(FriParams::new(1.0, 4.0).unwrap().integer_t(), Some(4));
        assert_eq!(FriParams::new(1.0, 4.5).unwrap().integer_t(), None);
    }

    #[test]
    fn edges_and_vertices() {
        let mut c = WalkConfiguration::new();
        assert!(edges_of(&c).is_empty() && vertices_of(&c).is_empty());
        let (x, y) = (VertexKey::Index(0), VertexKey::Index(1));
        let w = Walk::new(vec![x.clone(), y.clone(), x.clone()]).unwrap();
        c.add(w.clone(), 1);
        let (e1, v1) = (edges_of(&c), vertices_of(&c));
        assert_eq!(e1.len(), 1);
        assert!(e1.contains(&Edge::new(y.clone(), x.clone())));
        assert_eq!(v1.len(), 2);
        c.add(w.clone(), 1);
        assert_eq!(c.multiplicity(&w), 2);
        assert_eq!(edges_of(&c), e1);
        assert_eq!(vertices_of(&c), v1);
    }

    #[test]
    fn window_sampler_respects_annotation_and_splits_back() {
        let g = tree(3);
        let o = g.origin();
        let l = crate::graphs::ball(&g, &o, 2);
        let k = crate::graphs::ball(&g, &o, 1);
        let p = FriParams::new(0.5, 4.0).unwrap();
        let mut rng = derive_stream(1, "process/window", 0);
        let bad = sample_fri_window(&g, &p, &k, &l, &mut rng);
        assert_eq!(bad.unwrap_err(), FriError::WindowNotNested);
        for _ in 0..200 {
            let draw = sample_window_pairs(&g, &p, &l, &k, &mut rng).unwrap();
            for pair in &draw.pairs {
                let w = concatenate(&pair.a, &pair.b).unwrap();
                // the first entry of Con(a, b) into L is at time len(a)
                let entry = hitting_time(&w, &l, HitVariant::First).time().unwrap();
                assert_eq!(entry, pair.a.len());
                assert_eq!(split_at(&w, entry), (pair.a.clone(), pair.b.clone()));
            }
            let c = sample_fri_window(&g, &p, &l, &k, &mut rng).unwrap();
            assert!(c.respects_window());
        }
    }

    #[test]
    fn zero_intensity_is_empty() {
        let g = tree(3);
        let p = FriParams::new(0.0, 4.0).unwrap();
        let mut rng = derive_stream(2, "process/zero", 0);
        let e = expected_walks_through(&g, &p, &g.origin(), 100, &mut rng).unwrap();
        assert_eq!(e.mean, 0.0);
        let c = sample_fri_window(&g, &p, &Window::singleton(g.origin()), &Window::new(), &mut rng).unwrap();
        assert!(c.is_empty());
    }

    #[test]
    fn jsonl_is_sorted_and_stable() {
        let g = tree(3);
        let mut rng = derive_stream(3, "process/jsonl", 0);
        let mut c = WalkConfiguration::new();
        for n in [3, 0, 2, 2] {
            c.add(sample_walk_of_length(&g, &g.origin(), n, &mut rng), 1);
        }
        let mut out = Vec::new();
        c.write_jsonl(&mut out, &serde_json::json!({"u": 1})).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], r#"{"u":1}"#);
        assert!(lines[1].starts_with(r#"{"mult":1,"walk":["e"]"#), "{}", lines[1]);
        assert_eq!(lines.len(), 1 + c.support_len());
    }

    #[test]
    fn trace_event_validation_and_impossible_pattern() {
        let g = tree(3);
        let o = g.origin();
        let k = Window::singleton(o.clone());
        assert!(TraceEvent::new(Window::new(), TracePattern::Any, CountPredicate::Zero).is_err());
        let far = g.parse_key("ab").unwrap();
        let outside = Walk::new(vec![far.clone()]).unwrap();
        assert!(TraceEvent::new(k.clone(), TracePattern::Exact(outside), CountPredicate::Zero).is_err());
        // o -> ab is not an edge, so no walk can carry this trace
        let kk: Window = [o.clone(), far.clone()].into_iter().collect();
        let jump = Walk::new(vec![o.clone(), far]).unwrap();
        let ev = TraceEvent::new(kk, TracePattern::Exact(jump), CountPredicate::AtLeast(1)).unwrap();
        let p = FriParams::new(1.0, 3.0).unwrap();
        let est = trace_probability_estimate(&g, &p, &ev, 2000, &mut derive_stream(4, "trace", 0)).unwrap();
        assert_eq!(est.mean, 0.0);
    }

    #[test]
    fn count_predicate_probabilities() {
        let m = 1.3;
        let (p0, d0) = CountPredicate::Zero.poisson_probability(m);
        let (p1, _) = CountPredicate::AtLeast(1).poisson_probability(m);
        assert!((p0 + p1 - 1.0).abs() < 1e-15);
        assert!((d0 + p0).abs() < 1e-15);
        let (e2, de2) = CountPredicate::Exactly(2).poisson_probability(m);
        let h = 1e-6;
        let (e2h, _) = CountPredicate::Exactly(2).poisson_probability(m + h);
        assert!(((e2h - e2) / h - de2).abs() < 1e-5);
    }

    #[test]
    fn default_horizon_values() {
        assert_eq!(default_horizon(0.5).unwrap(), 100);
        assert!(default_horizon(1.0).is_err());
    }
}
