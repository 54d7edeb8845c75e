//! Clusters of `(V, E_ω)`, the cluster-at-origin growth recursion and the
//! truncated growth process.
//!
//! The growth recursion samples `ω^x_{n+1} - ω^x_n` as `ω` restricted to
//! `W_{L_n} \ W_{L_{n-1}}` with `L_0 = {x}` and `L_n = {x} ∪ V(ω^x_n)`.
//! Stage 1 is `ω ↾ W_{{x}}`.

use std::collections::BTreeMap;

use indexmap::IndexSet;
use rand::Rng;
use serde::Serialize;

use crate::defaults::{DELTA0, MIN_MOMENT_REPORTS, SIGMA_MULTIPLIER};
use crate::error::{FriError, Result};
use crate::graphs::{ball, graph_distance, GraphOracle, VertexKey, Window};
use crate::process::{edges_of, sample_fri_window, vertices_of, Edge, FriParams, WalkConfiguration};
use crate::sampling::poisson;
use crate::stats::{Estimate, RunningStats};
use crate::walks::{hitting_time, killed_walk_avoids, sample_killed_walk_avoiding, HitVariant, Walk};

/// Union-find with path compression and union by size.
#[derive(Debug, Clone, Default)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut i: usize) -> usize {
        let mut root = i;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[i] != root {
            let next = self.parent[i];
            self.parent[i] = root;
            i = next;
        }
        root
    }

    /// Returns false when `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// A ball `B(center, radius)`. Its boundary is the set of vertices at
/// distance at least `radius` from the center.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub center: VertexKey,
    pub radius: usize,
}

impl Region {
    pub fn new(center: VertexKey, radius: usize) -> Self {
        Region { center, radius }
    }

    /// Strictly inside: distance below `radius`.
    pub fn interior_contains(&self, oracle: &GraphOracle, v: &VertexKey) -> bool {
        self.radius > 0 && graph_distance(oracle, &self.center, v, self.radius - 1).is_some()
    }
}

/// Whether `v` lies outside the interiors of all regions.
fn on_boundary(oracle: &GraphOracle, regions: &[Region], v: &VertexKey) -> bool {
    !regions.iter().any(|r| r.interior_contains(oracle, v))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub vertices: Vec<VertexKey>,
    pub boundary_reaching: bool,
}

impl Cluster {
    pub fn size(&self) -> usize {
        self.vertices.len()
    }
}

/// Connected components of `(V(ω), E(ω))`, in order of first vertex.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClusterDecomposition {
    pub clusters: Vec<Cluster>,
}

impl ClusterDecomposition {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    /// Cluster sizes, largest first.
    pub fn sizes(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.clusters.iter().map(Cluster::size).collect();
        s.sort_unstable_by(|a, b| b.cmp(a));
        s
    }

    /// Size → number of clusters of that size.
    pub fn size_histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for c in &self.clusters {
            *h.entry(c.size()).or_insert(0) += 1;
        }
        h
    }

    pub fn cluster_of(&self, v: &VertexKey) -> Option<usize> {
        self.clusters.iter().position(|c| c.vertices.contains(v))
    }

    pub fn boundary_reaching(&self) -> usize {
        self.clusters.iter().filter(|c| c.boundary_reaching).count()
    }
}

fn components(config: &WalkConfiguration) -> Vec<Vec<VertexKey>> {
    let vertices: IndexSet<VertexKey> = vertices_of(config).iter().cloned().collect();
    let mut uf = UnionFind::new(vertices.len());
    for e in edges_of(config) {
        let (a, b) = e.endpoints();
        let ia = vertices.get_index_of(a).expect("edge endpoints are traversed");
        let ib = vertices.get_index_of(b).expect("edge endpoints are traversed");
        uf.union(ia, ib);
    }
    let mut order: IndexSet<usize> = IndexSet::new();
    let mut groups: Vec<Vec<VertexKey>> = Vec::new();
    for (i, v) in vertices.iter().enumerate() {
        let (slot, fresh) = order.insert_full(uf.find(i));
        if fresh {
            groups.push(Vec::new());
        }
        groups[slot].push(v.clone());
    }
    groups
}

/// Clusters without boundary information.
pub fn decompose(config: &WalkConfiguration) -> ClusterDecomposition {
    let clusters =
        components(config).into_iter().map(|vertices| Cluster { vertices, boundary_reaching: false }).collect();
    ClusterDecomposition { clusters }
}

/// Clusters, each flagged when it has a vertex outside every region's interior.
pub fn decompose_in(oracle: &GraphOracle, config: &WalkConfiguration, regions: &[Region]) -> ClusterDecomposition {
    let clusters = components(config)
        .into_iter()
        .map(|vertices| {
            let boundary_reaching = vertices.iter().any(|v| on_boundary(oracle, regions, v));
            Cluster { vertices, boundary_reaching }
        })
        .collect();
    ClusterDecomposition { clusters }
}

/// Stopping rules and spatial restrictions of a growth run.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthLimits {
    pub max_stages: usize,
    /// The run stops once the cluster has more vertices than this.
    pub vertex_budget: usize,
    pub regions: Vec<Region>,
    /// Stop as soon as a vertex outside all region interiors is reached.
    pub stop_at_boundary: bool,
    /// Only vertices inside some region interior join the next window.
    pub restrict_to_regions: bool,
}

impl Default for GrowthLimits {
    fn default() -> Self {
        GrowthLimits {
            max_stages: usize::MAX,
            vertex_budget: crate::defaults::VERTEX_BUDGET,
            regions: Vec::new(),
            stop_at_boundary: false,
            restrict_to_regions: false,
        }
    }
}

impl GrowthLimits {
    pub fn new(max_stages: usize, vertex_budget: usize) -> Result<Self> {
        if max_stages == 0 || vertex_budget == 0 {
            return Err(FriError::InvalidParameter("max_stages and vertex_budget must be at least 1".into()));
        }
        Ok(GrowthLimits { max_stages, vertex_budget, ..Default::default() })
    }

    /// Stop at the boundary of `B(center, radius)`.
    pub fn confined(mut self, center: VertexKey, radius: usize) -> Self {
        self.regions = vec![Region::new(center, radius)];
        self.stop_at_boundary = true;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthStatus {
    /// A stage added nothing: the cluster is final.
    Complete,
    BoundaryReached,
    StageLimit,
    /// More vertices than the budget.
    BudgetExceeded,
}

impl GrowthStatus {
    pub fn truncated(self) -> bool {
        matches!(self, GrowthStatus::StageLimit | GrowthStatus::BudgetExceeded)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StageRecord {
    pub stage: usize,
    pub frontier_size: usize,
    pub shell_size: usize,
    pub walks_added: u64,
}

/// State of the growth recursion after its last stage.
#[derive(Debug, Clone)]
pub struct GrowthState {
    pub stage: usize,
    /// All walks sampled so far, `ω^x_n`.
    pub config: WalkConfiguration,
    /// `L_n`, the window of the next stage.
    pub frontier: Window,
    /// `L_{n-1}`.
    pub shell: Window,
    pub seeds: Window,
    pub vertices: Window,
    pub status: GrowthStatus,
    pub history: Vec<StageRecord>,
}

impl GrowthState {
    pub fn summary(&self) -> ClusterSummary {
        ClusterSummary {
            n_vertices: self.vertices.len(),
            n_edges: edges_of(&self.config).len(),
            n_walks: self.config.total(),
            stages: self.stage,
            status: self.status,
        }
    }
}

/// Runs the recursion with an arbitrary stage sampler `stage(L, K)`.
pub(crate) fn run_growth<F>(
    oracle: &GraphOracle,
    seeds: &Window,
    limits: &GrowthLimits,
    mut stage: F,
) -> Result<GrowthState>
where
    F: FnMut(&Window, &Window) -> Result<WalkConfiguration>,
{
    if limits.max_stages == 0 || limits.vertex_budget == 0 {
        return Err(FriError::InvalidParameter("max_stages and vertex_budget must be at least 1".into()));
    }
    let mut state = GrowthState {
        stage: 0,
        config: WalkConfiguration::new(),
        frontier: seeds.clone(),
        shell: Window::new(),
        seeds: seeds.clone(),
        vertices: Window::new(),
        status: GrowthStatus::Complete,
        history: Vec::new(),
    };
    loop {
        let added = stage(&state.frontier, &state.shell)?;
        state.stage += 1;
        state.history.push(StageRecord {
            stage: state.stage,
            frontier_size: state.frontier.len(),
            shell_size: state.shell.len(),
            walks_added: added.total(),
        });
        if added.is_empty() {
            state.status = GrowthStatus::Complete;
            break;
        }
        let mut reached = false;
        for v in vertices_of(&added).iter() {
            if state.vertices.insert(v.clone()) && !limits.regions.is_empty() && on_boundary(oracle, &limits.regions, v)
            {
                reached = true;
            }
        }
        state.config.merge(&added);
        state.config.set_window(None);
        if reached && limits.stop_at_boundary {
            state.status = GrowthStatus::BoundaryReached;
            break;
        }
        if state.vertices.len() > limits.vertex_budget {
            state.status = GrowthStatus::BudgetExceeded;
            break;
        }
        if state.stage >= limits.max_stages {
            state.status = GrowthStatus::StageLimit;
            break;
        }
        let mut next = state.frontier.clone();
        for v in state.vertices.iter() {
            if !limits.restrict_to_regions || !on_boundary(oracle, &limits.regions, v) {
                next.insert(v.clone());
            }
        }
        if next.len() == state.frontier.len() {
            // nothing new to expand from: the next stage is empty
            state.status = GrowthStatus::Complete;
            break;
        }
        state.shell = std::mem::replace(&mut state.frontier, next);
    }
    Ok(state)
}

/// Grows the cluster of `x` stage by stage with the exact window sampler.
pub fn grow_cluster_at_origin<R: Rng + ?Sized>(
    oracle: &GraphOracle,
    params: &FriParams,
    x: &VertexKey,
    limits: &GrowthLimits,
    rng: &mut R,
) -> Result<GrowthState> {
    grow_cluster_from(oracle, params, &Window::singleton(x.clone()), limits, rng)
}

/// Same recursion started from the seed set instead of a single vertex.
pub fn grow_cluster_from<R: Rng + ?Sized>(
    oracle: &GraphOracle,
    params: &FriParams,
    seeds: &Window,
    limits: &GrowthLimits,
    rng: &mut R,
) -> Result<GrowthState> {
    run_growth(oracle, seeds, limits, |l, k| sample_fri_window(oracle, params, l, k, rng))
}

/// Runs the recursion inside an already sampled configuration: stage `n+1`
/// takes the walks of `source` that visit `L_n` and avoid `L_{n-1}`.
/// Exact for `ω` as long as every window stays inside the region `source`
/// was sampled on.
pub fn grow_cluster_in_configuration(
    oracle: &GraphOracle,
    source: &WalkConfiguration,
    seeds: &Window,
    limits: &GrowthLimits,
) -> Result<GrowthState> {
    let entries: Vec<(&Walk, u32)> = source.iter().collect();
    let mut through: std::collections::HashMap<&VertexKey, Vec<usize>> = std::collections::HashMap::new();
    for (i, (w, _)) in entries.iter().enumerate() {
        for v in w.vertices() {
            let list = through.entry(v).or_default();
            if list.last() != Some(&i) {
                list.push(i);
            }
        }
    }
    run_growth(oracle, seeds, limits, |l, k| {
        let mut picked: IndexSet<usize> = IndexSet::new();
        for v in l.difference(k) {
            if let Some(ids) = through.get(v) {
                picked.extend(ids.iter().copied());
            }
        }
        let mut out = WalkConfiguration::annotated(l.clone(), k.clone());
        for i in picked {
            let (w, m) = entries[i];
            if hitting_time(w, k, HitVariant::First).is_never() {
                out.add(w.clone(), m);
            }
        }
        Ok(out)
    })
}

/// Reference sampler: draws `ω ↾ W_B` for `B = B(x, radius)` in one go and
/// extracts the cluster of `x`, stopping at the boundary of `B`.
pub fn reference_cluster_at_origin<R: Rng + ?Sized>(
    oracle: &GraphOracle,
    params: &FriParams,
    x: &VertexKey,
    radius: usize,
    vertex_budget: usize,
    rng: &mut R,
) -> Result<GrowthState> {
    let b = ball(oracle, x, radius);
    let source = sample_fri_window(oracle, params, &b, &Window::new(), rng)?;
    let limits = GrowthLimits::new(usize::MAX, vertex_budget)?.confined(x.clone(), radius);
    grow_cluster_in_configuration(oracle, &source, &Window::singleton(x.clone()), &limits)
}

/// `(#V, #E, walk count)` of a cluster run, with its stopping status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClusterSummary {
    pub n_vertices: usize,
    pub n_edges: usize,
    pub n_walks: u64,
    pub stages: usize,
    pub status: GrowthStatus,
}

/// Pre-registered cells for comparing cluster-summary distributions.
///
/// Cell 0 is the empty cluster and the last cell collects every run that did
/// not complete. The other cells are products of a vertex-count bin, a
/// cycle-rank bin (`#E - #V + 1`, zero or positive) and a walk-count bin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SummaryBinning {
    /// Lower edges of the vertex-count bins, starting at 1.
    pub vertex_edges: Vec<usize>,
    /// Lower edges of the walk-count bins, starting at 1.
    pub walk_edges: Vec<u64>,
}

impl Default for SummaryBinning {
    fn default() -> Self {
        SummaryBinning { vertex_edges: vec![1, 2, 4, 7, 11, 16, 24], walk_edges: vec![1, 2, 3, 5] }
    }
}

fn bin_of<T: PartialOrd>(edges: &[T], value: &T) -> usize {
    edges.iter().rposition(|e| e <= value).unwrap_or(0)
}

impl SummaryBinning {
    pub fn n_cells(&self) -> usize {
        2 + self.vertex_edges.len() * 2 * self.walk_edges.len()
    }

    pub fn cell(&self, s: &ClusterSummary) -> usize {
        if s.status != GrowthStatus::Complete {
            return self.n_cells() - 1;
        }
        if s.n_vertices == 0 {
            return 0;
        }
        let v = bin_of(&self.vertex_edges, &s.n_vertices);
        let cyc = usize::from(s.n_edges + 1 > s.n_vertices);
        let w = bin_of(&self.walk_edges, &s.n_walks);
        1 + (v * 2 + cyc) * self.walk_edges.len() + w
    }

    pub fn histogram<'a>(&self, summaries: impl IntoIterator<Item = &'a ClusterSummary>) -> Vec<u64> {
        let mut h = vec![0u64; self.n_cells()];
        for s in summaries {
            h[self.cell(s)] += 1;
        }
        h
    }
}

/// One draw of the truncated process `ω'`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncatedProcessReport {
    /// `#R'`.
    pub retained: usize,
    /// `#V(ω')`.
    pub n_vertices: usize,
    #[serde(skip)]
    pub walks: Vec<Walk>,
    pub u: f64,
    #[serde(rename = "T")]
    pub t: usize,
    pub sigma: f64,
    pub degree_bound: usize,
    pub n_l: usize,
    pub n_k: usize,
}

/// For each `x ∈ L \ K` draws `N_x ~ Poisson(u deg x)`; `x` is retained when
/// `N_x ≥ 1` and its first pair `(a, b)` has `tH_L(a) = ∞`, `H_K(b) = ∞`,
/// `len(a) ≥ T` and `d(a(T), x) ≥ σT`. `ω'` collects `a` cut to length `T`.
pub fn run_truncated_process<R: Rng + ?Sized>(
    oracle: &GraphOracle,
    params: &FriParams,
    l: &Window,
    k: &Window,
    sigma: f64,
    rng: &mut R,
) -> Result<TruncatedProcessReport> {
    let t = params
        .integer_t()
        .ok_or_else(|| FriError::InvalidParameter(format!("T must be a positive integer, got {}", params.t)))?;
    if l.is_empty() {
        return Err(FriError::EmptyWindow);
    }
    if !k.is_subset(l) {
        return Err(FriError::WindowNotNested);
    }
    if !(sigma >= 0.0) {
        return Err(FriError::InvalidParameter(format!("sigma must be non-negative, got {sigma}")));
    }
    let min_dist = (sigma * t as f64).ceil() as usize;
    let mut walks = Vec::new();
    for x in l.difference(k) {
        if poisson(params.u * oracle.degree(x) as f64, rng) == 0 {
            continue;
        }
        let law = params.law(x.clone());
        let Some(a) = sample_killed_walk_avoiding(oracle, &law, l, 1, rng) else { continue };
        if !killed_walk_avoids(oracle, &law, k, 0, rng) {
            continue;
        }
        if a.len() < t || graph_distance(oracle, a.at(t), x, t).map_or(true, |d| d < min_dist) {
            continue;
        }
        walks.push(a.slice(0, t));
    }
    let mut omega = WalkConfiguration::new();
    for w in &walks {
        omega.add(w.clone(), 1);
    }
    Ok(TruncatedProcessReport {
        retained: walks.len(),
        n_vertices: vertices_of(&omega).len(),
        walks,
        u: params.u,
        t,
        sigma,
        degree_bound: oracle.degree_bound(),
        n_l: l.len(),
        n_k: k.len(),
    })
}

/// Empirical moments of `#R'` and `#V(ω')` against the bounds of the
/// truncated-process lemmas, evaluated with an estimated spectral radius.
#[derive(Debug, Clone, Serialize)]
pub struct MomentSummary {
    pub n_reports: usize,
    pub rho_hat: f64,
    pub retained: Estimate,
    pub vertices: Estimate,
    pub vertices_variance: f64,
    /// `(u/2) δ0 [(1-ρ)^2 #L - #K]`.
    pub retained_lower_bound: f64,
    pub retained_bound_holds: bool,
    /// `σ δ0 (1-ρ)^2 / 4`.
    pub delta2: f64,
    /// `δ2 u T #L`.
    pub vertices_lower_bound: f64,
    pub vertices_bound_holds: bool,
    /// `D^{3T} #L`.
    pub variance_upper_bound: f64,
    pub variance_bound_holds: bool,
    /// `1 - 4 D^{3T} / (u^2 T^2 #L)`, reported only.
    pub concentration_bound: f64,
    /// Fraction of reports with `#V(ω') ≥ δ2 u T #L / 2`.
    pub concentration_frequency: f64,
    /// `#K ≤ (1-ρ)^2 #L / 2`.
    pub shell_condition: bool,
    /// `u/2 ≤ 1 - e^{-u}`, the surrogate small-`u` guard.
    pub small_u_guard: bool,
}

pub fn moment_diagnostics(reports: &[TruncatedProcessReport], rho_hat: f64) -> Result<MomentSummary> {
    if reports.len() < MIN_MOMENT_REPORTS {
        return Err(FriError::TooFewReports { need: MIN_MOMENT_REPORTS, got: reports.len() });
    }
    let first = &reports[0];
    let key = |r: &TruncatedProcessReport| (r.u.to_bits(), r.t, r.sigma.to_bits(), r.degree_bound, r.n_l, r.n_k);
    if reports.iter().any(|r| key(r) != key(first)) {
        return Err(FriError::ParameterMismatch);
    }
    if first.n_l == 0 {
        return Err(FriError::EmptyWindow);
    }
    let retained: RunningStats = reports.iter().map(|r| r.retained as f64).collect();
    let vertices: RunningStats = reports.iter().map(|r| r.n_vertices as f64).collect();
    let (u, t, n_l, n_k) = (first.u, first.t as f64, first.n_l as f64, first.n_k as f64);
    let gap2 = (1.0 - rho_hat).powi(2);
    let retained_lower_bound = u / 2.0 * DELTA0 * (gap2 * n_l - n_k);
    let delta2 = first.sigma * DELTA0 * gap2 / 4.0;
    let vertices_lower_bound = delta2 * u * t * n_l;
    let d3t = (first.degree_bound as f64).powf(3.0 * t);
    let variance_upper_bound = d3t * n_l;
    let threshold = vertices_lower_bound / 2.0;
    let above = reports.iter().filter(|r| r.n_vertices as f64 >= threshold).count();
    Ok(MomentSummary {
        n_reports: reports.len(),
        rho_hat,
        retained: retained.estimate(),
        vertices: vertices.estimate(),
        vertices_variance: vertices.variance(),
        retained_lower_bound,
        retained_bound_holds: retained.estimate().at_least(retained_lower_bound, SIGMA_MULTIPLIER),
        delta2,
        vertices_lower_bound,
        vertices_bound_holds: vertices.estimate().at_least(vertices_lower_bound, SIGMA_MULTIPLIER),
        variance_upper_bound,
        variance_bound_holds: vertices.variance() <= variance_upper_bound,
        concentration_bound: 1.0 - 4.0 * d3t / (u * u * t * t * n_l),
        concentration_frequency: above as f64 / reports.len() as f64,
        shell_condition: n_k <= gap2 * n_l / 2.0,
        small_u_guard: u / 2.0 <= 1.0 - (-u).exp(),
    })
}

/// `config` plus a length-1 walk along `e`.
pub fn insertion_tolerance_check(
    oracle: &GraphOracle,
    config: &WalkConfiguration,
    e: &Edge,
) -> Result<WalkConfiguration> {
    let (a, b) = e.endpoints();
    if !oracle.is_adjacent(a, b) {
        return Err(FriError::NotAnEdge(format!("{a} -- {b}")));
    }
    let mut out = config.clone();
    out.set_window(None);
    out.add(Walk::new(vec![a.clone(), b.clone()])?, 1);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{build_cayley_graph, build_finite_graph, GraphFamily};
    use crate::rng::derive_stream;

    fn ix(i: u32) -> VertexKey {
        VertexKey::Index(i)
    }

    fn config_of(walks: &[&[u32]]) -> WalkConfiguration {
        let mut c = WalkConfiguration::new();
        for w in walks {
            c.add(Walk::new(w.iter().map(|&i| ix(i)).collect()).unwrap(), 1);
        }
        c
    }

    #[test]
    fn decomposition_examples() {
        let c = config_of(&[&[0, 1], &[1, 2], &[3, 4]]);
        let d = decompose(&c);
        assert_eq!(d.len(), 2);
        assert_eq!(d.sizes(), vec![3, 2]);
        assert!(decompose(&WalkConfiguration::new()).is_empty());
        let g = build_cayley_graph(&GraphFamily::RegularTree { degree: 3 }).unwrap();
        let mut c = WalkConfiguration::new();
        let w = Walk::new(vec![
            g.origin(),
            g.parse_key("a").unwrap(),
            g.parse_key("ab").unwrap(),
            g.parse_key("abc").unwrap(),
        ])
        .unwrap();
        c.add(w, 1);
        assert_eq!(decompose(&c).sizes(), vec![4]);
    }

    #[test]
    fn insertion_examples() {
        let g = build_finite_graph(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 2)]).unwrap();
        let c = config_of(&[&[0, 1, 2], &[3, 4]]);
        let before = decompose(&c).len();
        let inside = insertion_tolerance_check(&g, &c, &Edge::new(ix(0), ix(2))).unwrap();
        assert_eq!(decompose(&inside).len(), before);
        let joining = insertion_tolerance_check(&g, &c, &Edge::new(ix(2), ix(3))).unwrap();
        assert_eq!(decompose(&joining).len(), before - 1);
        let small = config_of(&[&[0, 1]]);
        let isolated = insertion_tolerance_check(&g, &small, &Edge::new(ix(4), ix(5))).unwrap();
        assert_eq!(decompose(&isolated).len(), 2);
        assert!(insertion_tolerance_check(&g, &c, &Edge::new(ix(0), ix(5))).is_err());
    }

    #[test]
    fn union_find_basics() {
        let mut uf = UnionFind::new(5);
        assert!(uf.union(0, 1));
        assert!(uf.union(3, 4));
        assert!(!uf.union(1, 0));
        assert_eq!(uf.find(0), uf.find(1));
        assert_ne!(uf.find(2), uf.find(3));
    }

    #[test]
    fn growth_runs_are_connected_and_stationary() {
        let g = build_cayley_graph(&GraphFamily::RegularTree { degree: 3 }).unwrap();
        let p = FriParams::new(0.15, 3.0).unwrap();
        let x = g.origin();
        let limits = GrowthLimits::new(1000, 5000).unwrap();
        let mut rng = derive_stream(1, "clusters/growth", 0);
        let mut empty = 0;
        for _ in 0..300 {
            let s = grow_cluster_at_origin(&g, &p, &x, &limits, &mut rng).unwrap();
            if s.vertices.is_empty() {
                empty += 1;
                assert_eq!(s.stage, 1);
                continue;
            }
            assert!(s.vertices.contains(&x));
            if s.status == GrowthStatus::Complete {
                assert_eq!(decompose(&s.config).len(), 1);
                // another stage on the final windows adds nothing
                let again = sample_fri_window(&g, &p, &s.frontier, &s.frontier, &mut rng).unwrap();
                assert!(again.is_empty());
            }
        }
        assert!(empty > 0);
    }

    #[test]
    fn reference_recursion_on_fixed_configuration() {
        let g = build_finite_graph(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]).unwrap();
        let source = config_of(&[&[0, 1], &[2, 1], &[3, 4], &[4, 5], &[2, 3]]);
        let limits = GrowthLimits::new(100, 100).unwrap();
        let s = grow_cluster_in_configuration(&g, &source, &Window::singleton(ix(0)), &limits).unwrap();
        assert_eq!(s.status, GrowthStatus::Complete);
        assert_eq!(s.vertices.len(), 6);
        assert_eq!(s.config.total(), 5);
        let confined = limits.clone().confined(ix(0), 3);
        let s = grow_cluster_in_configuration(&g, &source, &Window::singleton(ix(0)), &confined).unwrap();
        assert_eq!(s.status, GrowthStatus::BoundaryReached);
    }

    #[test]
    fn binning_cells_are_distinct() {
        let b = SummaryBinning::default();
        let mk = |v, e, w, status| ClusterSummary { n_vertices: v, n_edges: e, n_walks: w, stages: 1, status };
        assert_eq!(b.cell(&mk(0, 0, 0, GrowthStatus::Complete)), 0);
        assert_eq!(b.cell(&mk(5, 4, 2, GrowthStatus::BoundaryReached)), b.n_cells() - 1);
        let mut seen = std::collections::HashSet::new();
        for v in [1, 2, 4, 7, 11, 16, 24, 30] {
            for extra in [0, 1] {
                for w in [1, 2, 3, 5, 9] {
                    let c = b.cell(&mk(v, v - 1 + extra, w, GrowthStatus::Complete));
                    assert!(c > 0 && c < b.n_cells() - 1);
                    seen.insert(c);
                }
            }
        }
        assert_eq!(seen.len(), 7 * 2 * 4);
    }

    #[test]
    fn truncated_process_shape() {
        let g = build_cayley_graph(&GraphFamily::RegularTree { degree: 4 }).unwrap();
        let x = g.origin();
        let l = ball(&g, &x, 3);
        let p = FriParams::new(0.3, 4.0).unwrap();
        let sigma = 0.3;
        let mut rng = derive_stream(5, "clusters/truncated", 0);
        let mut reports = Vec::new();
        for _ in 0..150 {
            let r = run_truncated_process(&g, &p, &l, &Window::new(), sigma, &mut rng).unwrap();
            for w in &r.walks {
                assert_eq!(w.vertices().len(), 5);
                assert!(graph_distance(&g, w.start(), w.end(), 10).unwrap() as f64 >= sigma * 4.0);
            }
            if r.retained > 0 {
                assert!(r.n_vertices as f64 >= sigma * 4.0);
            }
            assert!(r.n_vertices <= 5 * r.retained);
            reports.push(r);
        }
        let m = moment_diagnostics(&reports, 0.866).unwrap();
        assert!(m.variance_bound_holds);
        assert!(moment_diagnostics(&reports[..10], 0.866).is_err());
        let fractional = FriParams::new(0.3, 4.5).unwrap();
        assert!(run_truncated_process(&g, &fractional, &l, &Window::new(), sigma, &mut rng).is_err());
        assert!(run_truncated_process(&g, &p, &Window::new(), &Window::new(), sigma, &mut rng).is_err());
        let mut mixed = reports.clone();
        mixed[3].n_l += 1;
        assert_eq!(moment_diagnostics(&mixed, 0.866).unwrap_err(), FriError::ParameterMismatch);
    }
}
