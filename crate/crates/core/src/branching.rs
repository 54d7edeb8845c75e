//! The coloured forest, its random map into the graph, the coupling that
//! dominates the cluster at the origin, and the Galton–Watson branching
//! random walk.
//!
//! Green forest vertices have one red and one blue child. A red (blue)
//! vertex has one red (blue) child and `Poisson(uD)` green children. A green
//! child sits on its parent's image; any other child steps to a uniform
//! neighbour of it.

use std::collections::HashMap;
use std::io::{self, Write};

use indexmap::IndexSet;
use rand::Rng;
use serde::Serialize;

use crate::clusters::{run_growth, GrowthLimits, GrowthState};
use crate::error::{FriError, Result};
use crate::graphs::{GraphOracle, VertexKey, Window};
use crate::process::{edges_of, Edge, FriParams, WalkConfiguration};
use crate::sampling::{geometric_length, poisson};
use crate::stats::{Estimate, RunningStats};
use crate::walks::{concatenate, step, Walk};

/// Default cap on materialised forest or tree vertices.
pub const NODE_BUDGET: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Color {
    #[serde(rename = "r")]
    Red,
    #[serde(rename = "g")]
    Green,
    #[serde(rename = "b")]
    Blue,
}

impl Color {
    pub fn code(self) -> &'static str {
        match self {
            Color::Red => "r",
            Color::Green => "g",
            Color::Blue => "b",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestNode {
    pub parent: Option<usize>,
    pub color: Color,
    /// Generation, starting at 1.
    pub generation: usize,
    pub children: Vec<usize>,
    /// Number of green children, once drawn (red and blue vertices only).
    pub green_children: Option<usize>,
    /// `(τ^r, τ^b)`, drawn when a green vertex is created.
    pub kill_times: Option<(usize, usize)>,
}

/// A partially materialised coloured forest. Nodes are stored parents first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ColoredForest {
    pub nodes: Vec<ForestNode>,
    /// First-generation vertex ids.
    pub roots: Vec<usize>,
    /// Some vertex had children that were not materialised because of the
    /// depth limit or the node budget.
    pub truncated: bool,
}

impl ColoredForest {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, parent: Option<usize>, color: Color, kill_times: Option<(usize, usize)>) -> usize {
        let generation = parent.map_or(1, |p| self.nodes[p].generation + 1);
        let id = self.nodes.len();
        self.nodes.push(ForestNode {
            parent,
            color,
            generation,
            children: Vec::new(),
            green_children: None,
            kill_times,
        });
        match parent {
            Some(p) => self.nodes[p].children.push(id),
            None => self.roots.push(id),
        }
        id
    }

    /// Number of vertices per generation, starting at generation 1.
    pub fn generation_sizes(&self) -> Vec<usize> {
        let mut sizes = Vec::new();
        for n in &self.nodes {
            if sizes.len() < n.generation {
                sizes.resize(n.generation, 0);
            }
            sizes[n.generation - 1] += 1;
        }
        sizes
    }
}

fn kill_times<R: Rng + ?Sized>(t: f64, rng: &mut R) -> (usize, usize) {
    let red = geometric_length(t, rng);
    (red, geometric_length(t, rng))
}

/// Breadth-first forest with generations `1..=depth_limit`.
pub fn sample_colored_forest<R: Rng + ?Sized>(
    params: &FriParams,
    d: usize,
    depth_limit: usize,
    rng: &mut R,
) -> Result<ColoredForest> {
    sample_colored_forest_with_budget(params, d, depth_limit, NODE_BUDGET, rng)
}

pub fn sample_colored_forest_with_budget<R: Rng + ?Sized>(
    params: &FriParams,
    d: usize,
    depth_limit: usize,
    budget: usize,
    rng: &mut R,
) -> Result<ColoredForest> {
    if depth_limit == 0 {
        return Err(FriError::InvalidParameter("depth_limit must be at least 1".into()));
    }
    let mean = params.u * d as f64;
    let mut forest = ColoredForest::default();
    for _ in 0..poisson(mean, rng) {
        let kt = kill_times(params.t, rng);
        forest.push(None, Color::Green, Some(kt));
    }
    let mut i = 0;
    while i < forest.nodes.len() {
        if forest.nodes[i].generation == depth_limit || forest.nodes.len() >= budget {
            if forest.nodes.len() >= budget {
                forest.truncated = true;
                break;
            }
            forest.truncated = true;
            i += 1;
            continue;
        }
        match forest.nodes[i].color {
            Color::Green => {
                forest.push(Some(i), Color::Red, None);
                forest.push(Some(i), Color::Blue, None);
            }
            own => {
                forest.push(Some(i), own, None);
                let greens = poisson(mean, rng) as usize;
                forest.nodes[i].green_children = Some(greens);
                for _ in 0..greens {
                    let kt = kill_times(params.t, rng);
                    forest.push(Some(i), Color::Green, Some(kt));
                }
            }
        }
        i += 1;
    }
    Ok(forest)
}

/// Images of forest or tree vertices in the graph, indexed by vertex id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BranchMap {
    pub images: Vec<VertexKey>,
}

impl BranchMap {
    pub fn image(&self, id: usize) -> &VertexKey {
        &self.images[id]
    }

    pub fn distinct_images(&self) -> usize {
        self.images.iter().collect::<IndexSet<_>>().len()
    }
}

/// `φ`: first generation at `x`, green children on the parent's image, other
/// children one uniform step away.
pub fn map_forest_into_graph<R: Rng + ?Sized>(
    oracle: &GraphOracle,
    forest: &ColoredForest,
    x: &VertexKey,
    rng: &mut R,
) -> BranchMap {
    let mut images: Vec<VertexKey> = Vec::with_capacity(forest.len());
    for node in &forest.nodes {
        let image = match node.parent {
            None => x.clone(),
            Some(p) if node.color == Color::Green => images[p].clone(),
            Some(p) => step(oracle, &images[p], rng),
        };
        images.push(image);
    }
    BranchMap { images }
}

/// Graph edges `{φ(v), φ(v')}` over forest edges with a non-green child.
pub fn image_edges(forest: &ColoredForest, map: &BranchMap) -> IndexSet<Edge> {
    forest
        .nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| n.color != Color::Green)
        .filter_map(|(i, n)| n.parent.map(|p| Edge::new(map.images[p].clone(), map.images[i].clone())))
        .collect()
}

/// Result of one coupled run.
#[derive(Debug, Clone)]
pub struct Coupling {
    /// `ω̃` and its growth history.
    pub state: GrowthState,
    pub forest: ColoredForest,
    pub map: BranchMap,
    /// Every edge of `E(ω̃)` is the image of a materialised forest edge.
    pub containment_holds: bool,
    pub forest_budget_exhausted: bool,
}

impl Coupling {
    /// `#V(ω̃) ≤ #φ(V^F)`.
    pub fn dominated(&self) -> bool {
        self.state.vertices.len() <= self.map.distinct_images()
    }
}

/// Lazily built forest with its map, as used by the coupling.
struct LazyForest<'a, R: Rng + ?Sized> {
    oracle: &'a GraphOracle,
    params: FriParams,
    d: usize,
    forest: ColoredForest,
    images: Vec<VertexKey>,
    /// Red or blue forest vertex whose green children feed the pairs at each
    /// graph vertex.
    designated: HashMap<VertexKey, usize>,
    budget: usize,
    exhausted: bool,
    rng: &'a mut R,
}

impl<R: Rng + ?Sized> LazyForest<'_, R> {
    fn push(&mut self, parent: Option<usize>, color: Color, image: VertexKey, kt: Option<(usize, usize)>) -> usize {
        self.images.push(image);
        self.forest.push(parent, color, kt)
    }

    /// Green vertices hanging at `y`: the first generation for the origin,
    /// otherwise the green children of the designated vertex. Each is kept
    /// with probability `deg(y)/D`, so kept greens are `Poisson(u deg y)`.
    fn greens_at(&mut self, y: &VertexKey, first_stage: bool) -> Vec<usize> {
        let mean = self.params.u * self.d as f64;
        let parent = if first_stage {
            None
        } else {
            Some(*self.designated.get(y).expect("every new frontier vertex lies on a retained branch"))
        };
        let count = poisson(mean, self.rng) as usize;
        if let Some(p) = parent {
            self.forest.nodes[p].green_children = Some(count);
        }
        let keep = self.oracle.degree(y) as f64 / self.d as f64;
        let mut kept = Vec::new();
        for _ in 0..count {
            let kt = kill_times(self.params.t, self.rng);
            let id = self.push(parent, Color::Green, y.clone(), Some(kt));
            if keep >= 1.0 || self.rng.random::<f64>() < keep {
                kept.push(id);
            }
        }
        kept
    }

    /// Materialises the branch of `color` below green `v` up to its kill
    /// time, stopping early when an image lands in `avoid` at index `>= from`.
    fn branch(&mut self, v: usize, color: Color, len: usize, avoid: &Window, from: usize) -> Option<Vec<usize>> {
        let mut ids = vec![v];
        if from == 0 && avoid.contains(&self.images[v]) {
            return None;
        }
        for i in 1..=len {
            if self.forest.len() >= self.budget {
                self.exhausted = true;
                self.forest.truncated = true;
                return None;
            }
            let prev = *ids.last().expect("non-empty");
            let image = step(self.oracle, &self.images[prev], self.rng);
            let hit = i >= from && avoid.contains(&image);
            ids.push(self.push(Some(prev), color, image, None));
            if hit {
                return None;
            }
        }
        Some(ids)
    }

    fn walk_of(&self, ids: &[usize]) -> Walk {
        Walk::new(ids.iter().map(|&i| self.images[i].clone()).collect()).expect("branch is non-empty")
    }

    fn stage(&mut self, x: &VertexKey, l: &Window, k: &Window) -> WalkConfiguration {
        let mut out = WalkConfiguration::annotated(l.clone(), k.clone());
        let first_stage = k.is_empty();
        for y in l.difference(k) {
            if self.exhausted {
                break;
            }
            if first_stage && y != x {
                continue;
            }
            for g in self.greens_at(y, first_stage) {
                let (tr, tb) = self.forest.nodes[g].kill_times.expect("green vertices carry kill times");
                let Some(red) = self.branch(g, Color::Red, tr, l, 1) else { continue };
                let Some(blue) = self.branch(g, Color::Blue, tb, k, 0) else { continue };
                for &i in red[1..].iter().chain(&blue[1..]) {
                    self.designated.entry(self.images[i].clone()).or_insert(i);
                }
                let walk = concatenate(&self.walk_of(&red), &self.walk_of(&blue)).expect("branches share their root");
                out.add(walk, 1);
            }
        }
        out
    }
}

/// Builds `ω̃` from a lazily grown forest and its map so that `ω̃` has the
/// law of the cluster-at-origin configuration and `φ(E^F) ⊇ E(ω̃)`.
///
/// Stage `n+1` reads, for each new frontier vertex `y`, the green children of
/// one red or blue forest vertex on a retained branch with image `y`. No
/// forest vertex is read twice, so the pairs are fresh draws from
/// `P^(T)_y × P^(T)_y`. Green vertices are kept with probability `deg(y)/D`
/// to turn `Poisson(uD)` into `Poisson(u deg y)`; the others stay as
/// unexpanded leaves.
pub fn couple_cluster_with_mbrw<R: Rng + ?Sized>(
    oracle: &GraphOracle,
    params: &FriParams,
    x: &VertexKey,
    limits: &GrowthLimits,
    forest_budget: usize,
    rng: &mut R,
) -> Result<Coupling> {
    let mut lazy = LazyForest {
        oracle,
        params: *params,
        d: oracle.degree_bound(),
        forest: ColoredForest::default(),
        images: Vec::new(),
        designated: HashMap::new(),
        budget: forest_budget,
        exhausted: false,
        rng,
    };
    let seeds = Window::singleton(x.clone());
    let mut state = run_growth(oracle, &seeds, limits, |l, k| Ok(lazy.stage(x, l, k)))?;
    if lazy.exhausted {
        state.status = crate::clusters::GrowthStatus::BudgetExceeded;
    }
    let map = BranchMap { images: lazy.images };
    let covered = image_edges(&lazy.forest, &map);
    let containment_holds = edges_of(&state.config).iter().all(|e| covered.contains(e));
    Ok(Coupling { state, forest: lazy.forest, map, containment_holds, forest_budget_exhausted: lazy.exhausted })
}

/// Galton–Watson tree; `offspring[i]` is `None` for vertices whose children
/// were not generated.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GwTree {
    pub parent: Vec<Option<usize>>,
    pub generation: Vec<usize>,
    pub offspring: Vec<Option<usize>>,
    pub truncated: bool,
}

impl GwTree {
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    fn push(&mut self, parent: Option<usize>) -> usize {
        let generation = parent.map_or(0, |p| self.generation[p] + 1);
        self.parent.push(parent);
        self.generation.push(generation);
        self.offspring.push(None);
        self.parent.len() - 1
    }

    pub fn generation_sizes(&self) -> Vec<usize> {
        let mut sizes = Vec::new();
        for &g in &self.generation {
            if sizes.len() <= g {
                sizes.resize(g + 1, 0);
            }
            sizes[g] += 1;
        }
        sizes
    }
}

/// `X = 1 + 2·Poisson(uD)`.
pub fn sample_offspring<R: Rng + ?Sized>(params: &FriParams, d: usize, rng: &mut R) -> usize {
    1 + 2 * poisson(params.u * d as f64, rng) as usize
}

/// Galton–Watson tree with offspring `1 + 2·Poisson(uD)` down to
/// generation `depth_limit`, mapped into the graph from `x`.
pub fn sample_brw<R: Rng + ?Sized>(
    oracle: &GraphOracle,
    params: &FriParams,
    d: usize,
    x: &VertexKey,
    depth_limit: usize,
    rng: &mut R,
) -> Result<(GwTree, BranchMap)> {
    if depth_limit == 0 {
        return Err(FriError::InvalidParameter("depth_limit must be at least 1".into()));
    }
    let mut tree = GwTree::default();
    let mut images = vec![x.clone()];
    tree.push(None);
    let mut i = 0;
    while i < tree.len() {
        if tree.generation[i] == depth_limit || tree.len() >= NODE_BUDGET {
            tree.truncated = true;
            i += 1;
            continue;
        }
        let n = sample_offspring(params, d, rng);
        tree.offspring[i] = Some(n);
        for _ in 0..n {
            tree.push(Some(i));
            let next = step(oracle, &images[i], rng);
            images.push(next);
        }
        i += 1;
    }
    Ok((tree, BranchMap { images }))
}

/// `T'`: a new root joined to the first generation, then every edge into a
/// green vertex contracted. The result is uncoloured; `offspring` is known
/// for a vertex only when all forest vertices it absorbs were expanded.
/// Meant for forests from [`sample_colored_forest`], where only the depth
/// limit or the node budget leaves a vertex childless.
pub fn contract_forest_to_tree(forest: &ColoredForest) -> GwTree {
    // class[i] is the tree vertex forest vertex i is merged into
    let mut tree = GwTree::default();
    let root = tree.push(None);
    let mut class = vec![root; forest.len()];
    let mut complete = vec![true];
    // every expanded vertex has at least one child, so childless ones were cut
    let expanded = |i: usize| !forest.nodes[i].children.is_empty();
    let mut counts = vec![0usize];
    for (i, n) in forest.nodes.iter().enumerate() {
        match (n.parent, n.color) {
            (None, _) => class[i] = root,
            (Some(p), Color::Green) => class[i] = class[p],
            (Some(p), _) => {
                let c = tree.push(Some(class[p]));
                class[i] = c;
                counts.push(0);
                complete.push(true);
                counts[class[p]] += 1;
            }
        }
        if !expanded(i) {
            complete[class[i]] = false;
        }
    }
    for (c, &n) in counts.iter().enumerate() {
        tree.offspring[c] = complete[c].then_some(n);
    }
    tree.truncated = forest.truncated;
    tree
}

/// Transience evidence for the branching random walk.
#[derive(Debug, Clone, Serialize)]
pub struct TransienceReport {
    /// `E[X] = 1 + 2uD`.
    pub mean_offspring: f64,
    pub rho_inverse: f64,
    /// `1 + 2uD < 1/ρ̂`.
    pub condition_holds: bool,
    /// Mean number of visits to `x` by generations `0..=k`, for each `k`.
    pub visits_by_depth: Vec<Estimate>,
    /// Runs stopped early by the population cap.
    pub capped_runs: u64,
}

/// Visits of the BRW to its start, counted generation by generation.
#[allow(clippy::too_many_arguments)]
pub fn transience_diagnostic<R: Rng + ?Sized>(
    oracle: &GraphOracle,
    params: &FriParams,
    d: usize,
    x: &VertexKey,
    depth_limit: usize,
    mc_samples: u64,
    rho_hat: f64,
    rng: &mut R,
) -> Result<TransienceReport> {
    if mc_samples == 0 {
        return Err(FriError::InvalidParameter("mc_samples must be at least 1".into()));
    }
    let mean_offspring = 1.0 + 2.0 * params.u * d as f64;
    let mut stats = vec![RunningStats::default(); depth_limit + 1];
    let mut capped_runs = 0;
    for _ in 0..mc_samples {
        let mut generation = vec![x.clone()];
        let mut visits = 1u64;
        stats[0].push(1.0);
        for depth_stats in stats.iter_mut().skip(1) {
            if generation.len() > NODE_BUDGET {
                capped_runs += 1;
                break;
            }
            let mut next = Vec::new();
            for v in &generation {
                for _ in 0..sample_offspring(params, d, rng) {
                    next.push(step(oracle, v, rng));
                }
            }
            visits += next.iter().filter(|v| *v == x).count() as u64;
            depth_stats.push(visits as f64);
            generation = next;
        }
    }
    Ok(TransienceReport {
        mean_offspring,
        rho_inverse: 1.0 / rho_hat,
        condition_holds: mean_offspring < 1.0 / rho_hat,
        visits_by_depth: stats.iter().map(RunningStats::estimate).collect(),
        capped_runs,
    })
}

/// JSONL dump, one `{"id", "parent", "color", "image"}` object per vertex.
pub fn write_forest_jsonl<W: Write>(forest: &ColoredForest, map: &BranchMap, mut out: W) -> io::Result<()> {
    for (i, n) in forest.nodes.iter().enumerate() {
        let line = serde_json::json!({
            "id": i,
            "parent": n.parent,
            "color": n.color.code(),
            "image": map.images[i].to_string(),
        });
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// JSONL dump of a Galton–Watson tree, one `{"id", "parent", "image"}` per vertex.
pub fn write_tree_jsonl<W: Write>(tree: &GwTree, map: &BranchMap, mut out: W) -> io::Result<()> {
    for i in 0..tree.len() {
        let line = serde_json::json!({ "id": i, "parent": tree.parent[i], "image": map.images[i].to_string() });
        writeln!(out, "{line}")?;
    }
    Ok(())
}
