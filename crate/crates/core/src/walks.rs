//! Finite walks `w: [0, len] -> V` and the geometrically killed walk law.

use rand::Rng;

use crate::error::{FriError, Result};
use crate::graphs::{GraphOracle, VertexKey, Window};
use crate::sampling::geometric_length;

/// Longest walk whose probability is returned in linear space.
pub const LINEAR_PROBABILITY_MAX_LEN: usize = 64;

/// A finite walk, stored as its vertex sequence `w(0), ..., w(len)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Walk {
    vertices: Vec<VertexKey>,
}

impl Walk {
    /// A walk from a non-empty vertex sequence. Adjacency is not checked here;
    /// see [`Walk::is_valid_in`].
    pub fn new(vertices: Vec<VertexKey>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(FriError::EmptyWalk);
        }
        Ok(Walk { vertices })
    }

    /// A walk whose consecutive vertices are checked to be adjacent.
    pub fn new_in(oracle: &GraphOracle, vertices: Vec<VertexKey>) -> Result<Self> {
        let w = Walk::new(vertices)?;
        if let Some(i) = w.first_invalid_step(oracle) {
            return Err(FriError::NotAnEdge(format!("{} -- {}", w.vertices[i], w.vertices[i + 1])));
        }
        Ok(w)
    }

    /// The length-0 walk sitting at `v`.
    pub fn trivial(v: VertexKey) -> Self {
        Walk { vertices: vec![v] }
    }

    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Always false: a walk has at least one vertex.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn vertices(&self) -> &[VertexKey] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<VertexKey> {
        self.vertices
    }

    pub fn start(&self) -> &VertexKey {
        &self.vertices[0]
    }

    pub fn end(&self) -> &VertexKey {
        &self.vertices[self.vertices.len() - 1]
    }

    pub fn at(&self, t: usize) -> &VertexKey {
        &self.vertices[t]
    }

    /// The sub-walk on the times `[from, to]`.
    pub fn slice(&self, from: usize, to: usize) -> Walk {
        Walk { vertices: self.vertices[from..=to].to_vec() }
    }

    fn first_invalid_step(&self, oracle: &GraphOracle) -> Option<usize> {
        self.vertices.windows(2).position(|p| !oracle.is_adjacent(&p[0], &p[1]))
    }

    /// Every vertex belongs to the graph and every step is an edge.
    pub fn is_valid_in(&self, oracle: &GraphOracle) -> bool {
        self.vertices.iter().all(|v| oracle.contains(v)) && self.first_invalid_step(oracle).is_none()
    }

    /// JSON array of canonical vertex-key strings.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(self.vertices.iter().map(|v| v.to_string().into()).collect())
    }

    pub fn from_json(oracle: &GraphOracle, value: &serde_json::Value) -> Result<Self> {
        let items =
            value.as_array().ok_or_else(|| FriError::ParseKey(format!("expected a JSON array, got {value}")))?;
        let vertices = items
            .iter()
            .map(|item| {
                let s = item.as_str().ok_or_else(|| FriError::ParseKey(item.to_string()))?;
                oracle.parse_key(s)
            })
            .collect::<Result<Vec<_>>>()?;
        Walk::new_in(oracle, vertices)
    }
}

impl std::fmt::Debug for Walk {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(&self.vertices).finish()
    }
}

/// `P^(T)_x`: simple random walk from `start`, stopped after a
/// `Geom(T+1) - 1` number of steps.
#[derive(Debug, Clone, PartialEq)]
pub struct KilledWalkLaw {
    pub start: VertexKey,
    pub t: f64,
}

impl KilledWalkLaw {
    pub fn new(start: VertexKey, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(FriError::InvalidParameter(format!("T must be positive and finite, got {t}")));
        }
        Ok(KilledWalkLaw { start, t })
    }

    /// `Pr(len = n) = (1/(T+1)) (T/(T+1))^n`.
    pub fn length_pmf(&self, n: usize) -> f64 {
        (self.log_keep() * n as f64 - (1.0 + self.t).ln()).exp()
    }

    /// `Pr(len >= n) = (T/(T+1))^n`.
    pub fn length_tail(&self, n: usize) -> f64 {
        (self.log_keep() * n as f64).exp()
    }

    fn log_keep(&self) -> f64 {
        -(1.0 / self.t).ln_1p()
    }
}

/// A hitting time; `Never` is the infimum (or supremum) of the empty set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HittingTime {
    At(usize),
    Never,
}

impl HittingTime {
    pub fn is_never(self) -> bool {
        self == HittingTime::Never
    }

    pub fn time(self) -> Option<usize> {
        match self {
            HittingTime::At(t) => Some(t),
            HittingTime::Never => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HitVariant {
    /// `H_K`: first time `t >= 0` in `K`.
    First,
    /// `tH_K`: first time `t >= 1` in `K`.
    FirstPositive,
    /// `H^+_K`: last time in `K`.
    Last,
}

pub fn hitting_time(w: &Walk, k: &Window, variant: HitVariant) -> HittingTime {
    let vs = w.vertices();
    let found = match variant {
        HitVariant::First => vs.iter().position(|v| k.contains(v)),
        HitVariant::FirstPositive => vs.iter().skip(1).position(|v| k.contains(v)).map(|i| i + 1),
        HitVariant::Last => vs.iter().rposition(|v| k.contains(v)),
    };
    found.map_or(HittingTime::Never, HittingTime::At)
}

/// One uniform step from `v`.
pub fn step<R: Rng + ?Sized>(oracle: &GraphOracle, v: &VertexKey, rng: &mut R) -> VertexKey {
    let i = rng.random_range(0..oracle.degree(v));
    oracle.neighbor(v, i)
}

/// Simple random walk with exactly `steps` steps.
pub fn sample_walk_of_length<R: Rng + ?Sized>(
    oracle: &GraphOracle,
    start: &VertexKey,
    steps: usize,
    rng: &mut R,
) -> Walk {
    let mut vertices = Vec::with_capacity(steps + 1);
    vertices.push(start.clone());
    for _ in 0..steps {
        let next = step(oracle, vertices.last().expect("non-empty"), rng);
        vertices.push(next);
    }
    Walk { vertices }
}

/// Draws from `P^(T)_x`: the length first, then the path.
pub fn sample_killed_walk<R: Rng + ?Sized>(oracle: &GraphOracle, law: &KilledWalkLaw, rng: &mut R) -> Walk {
    let n = geometric_length(law.t, rng);
    sample_walk_of_length(oracle, &law.start, n, rng)
}

/// Draws from `P^(T)_x` but gives up, returning `None`, as soon as the walk
/// is in `avoid` at some time `t >= from`. Same law as
/// [`sample_killed_walk`] conditioned on the complement of that event.
pub fn sample_killed_walk_avoiding<R: Rng + ?Sized>(
    oracle: &GraphOracle,
    law: &KilledWalkLaw,
    avoid: &Window,
    from: usize,
    rng: &mut R,
) -> Option<Walk> {
    if from == 0 && avoid.contains(&law.start) {
        return None;
    }
    let n = geometric_length(law.t, rng);
    let mut vertices = Vec::with_capacity(n.min(1 << 16) + 1);
    vertices.push(law.start.clone());
    for t in 1..=n {
        let next = step(oracle, vertices.last().expect("non-empty"), rng);
        if t >= from && avoid.contains(&next) {
            return None;
        }
        vertices.push(next);
    }
    Some(Walk { vertices })
}

/// Windows at most this large get the closed-form distance shortcut.
const DISTANCE_SHORTCUT_MAX_WINDOW: usize = 16;

/// Lower bound on the distance from `v` to `set`, when a closed form is
/// available and `set` is small.
pub(crate) fn distance_to_window(oracle: &GraphOracle, v: &VertexKey, set: &Window) -> Option<usize> {
    if set.len() > DISTANCE_SHORTCUT_MAX_WINDOW {
        return None;
    }
    set.iter().map(|k| oracle.closed_form_distance(v, k)).try_fold(usize::MAX, |m, d| Some(m.min(d?)))
}

/// Runs `steps` steps from `start` and reports the first time `t` in
/// `[from, steps]` at which the walk is in `avoid`. The path is not kept.
/// Stretches during which the walk cannot reach `avoid` are skipped
/// membership tests, and the run stops once `avoid` is out of reach.
pub fn first_visit_within<R: Rng + ?Sized>(
    oracle: &GraphOracle,
    start: &VertexKey,
    steps: usize,
    avoid: &Window,
    from: usize,
    rng: &mut R,
) -> HittingTime {
    if from == 0 && avoid.contains(start) {
        return HittingTime::At(0);
    }
    let mut v = start.clone();
    // no membership test needed before time `safe_until`
    let mut safe_until = 0usize;
    for t in 1..=steps {
        v = step(oracle, &v, rng);
        if t < safe_until {
            continue;
        }
        if let Some(d) = distance_to_window(oracle, &v, avoid) {
            if d == 0 {
                if t >= from {
                    return HittingTime::At(t);
                }
                continue;
            }
            if d > steps - t {
                return HittingTime::Never;
            }
            safe_until = t + d;
        } else if t >= from && avoid.contains(&v) {
            return HittingTime::At(t);
        }
    }
    HittingTime::Never
}

/// Whether a walk drawn from `P^(T)_x` stays out of `avoid` at all times
/// `t >= from`. Same law as testing a [`sample_killed_walk`] draw.
pub fn killed_walk_avoids<R: Rng + ?Sized>(
    oracle: &GraphOracle,
    law: &KilledWalkLaw,
    avoid: &Window,
    from: usize,
    rng: &mut R,
) -> bool {
    if from == 0 && avoid.contains(&law.start) {
        return false;
    }
    let n = geometric_length(law.t, rng);
    first_visit_within(oracle, &law.start, n, avoid, from, rng).is_never()
}

/// `P^(T)_x(w)` in linear space, for walks of length at most
/// [`LINEAR_PROBABILITY_MAX_LEN`]. Zero when `w` does not start at `x` or
/// takes a non-edge step.
pub fn walk_probability(oracle: &GraphOracle, law: &KilledWalkLaw, w: &Walk) -> Result<f64> {
    if w.len() > LINEAR_PROBABILITY_MAX_LEN {
        return Err(FriError::WalkTooLong(w.len()));
    }
    if w.start() != &law.start || w.first_invalid_step(oracle).is_some() {
        return Ok(0.0);
    }
    let keep = law.t / (law.t + 1.0);
    let mut p = 1.0 / (law.t + 1.0);
    for v in &w.vertices()[..w.len()] {
        p *= keep / oracle.degree(v) as f64;
    }
    Ok(p)
}

/// `ln P^(T)_x(w)`, `-inf` when the probability is zero.
pub fn log_walk_probability(oracle: &GraphOracle, law: &KilledWalkLaw, w: &Walk) -> f64 {
    if w.start() != &law.start || w.first_invalid_step(oracle).is_some() {
        return f64::NEG_INFINITY;
    }
    let log_degrees: f64 = w.vertices()[..w.len()].iter().map(|v| (oracle.degree(v) as f64).ln()).sum();
    law.log_keep() * w.len() as f64 - (1.0 + law.t).ln() - log_degrees
}

/// `Con(a, b)`: `a` reversed, then `b` after its starting point.
pub fn concatenate(a: &Walk, b: &Walk) -> Result<Walk> {
    if a.start() != b.start() {
        return Err(FriError::BasepointMismatch);
    }
    let mut vertices = Vec::with_capacity(a.len() + b.len() + 1);
    vertices.extend(a.vertices().iter().rev().cloned());
    vertices.extend(b.vertices()[1..].iter().cloned());
    Ok(Walk { vertices })
}

/// Inverse of [`concatenate`] at time `at`: returns `(a, b)` with
/// `Con(a, b) = w` and `len(a) = at`.
pub fn split_at(w: &Walk, at: usize) -> (Walk, Walk) {
    let a = Walk { vertices: w.vertices()[..=at].iter().rev().cloned().collect() };
    let b = Walk { vertices: w.vertices()[at..].to_vec() };
    (a, b)
}

pub fn reverse(w: &Walk) -> Walk {
    Walk { vertices: w.vertices().iter().rev().cloned().collect() }
}

/// `w_K`: the sub-walk between the first and last visit to `K`, or `None`
/// when `w` misses `K`.
pub fn restrict_to_window(w: &Walk, k: &Window) -> Option<Walk> {
    let first = hitting_time(w, k, HitVariant::First).time()?;
    let last = hitting_time(w, k, HitVariant::Last).time()?;
    Some(w.slice(first, last))
}
