//! Graphs behind a neighbour oracle.
//!
//! Infinite Cayley graphs are never materialised: a vertex exists as soon as
//! a walk names it. Neighbour order is the fixed generator order of the
//! family, so a `(seed, graph)` pair determines every sample.

mod word;

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{FriError, Result};

pub use word::Word;

pub type Point = SmallVec<[i64; 4]>;

/// Canonical vertex identifier. Equal keys name the same vertex.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexKey {
    /// Vertex of a finite graph.
    Index(u32),
    /// Lattice point of `Z^d`.
    Point(Point),
    /// Reduced word in a free group or a free product of copies of `Z/2`.
    Word(Word),
}

impl VertexKey {
    pub fn as_word(&self) -> Option<&Word> {
        match self {
            VertexKey::Word(w) => Some(w),
            _ => None,
        }
    }
}

impl fmt::Display for VertexKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexKey::Index(i) => write!(f, "{i}"),
            VertexKey::Point(p) => {
                f.write_str("(")?;
                for (i, c) in p.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
            VertexKey::Word(w) => write!(f, "{w}"),
        }
    }
}

impl fmt::Debug for VertexKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Graph family descriptor, as it appears in experiment configs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GraphFamily {
    /// Cayley graph of the free group on `rank` generators (a `2·rank`-regular tree).
    FreeGroup { rank: usize },
    /// The integer lattice `Z^dim` with nearest-neighbour edges.
    Lattice { dim: usize },
    /// The `degree`-regular tree, as the Cayley graph of the free product of
    /// `degree` copies of `Z/2`.
    RegularTree { degree: usize },
    /// A finite graph given by an edge list.
    Finite { vertices: usize },
}

impl GraphFamily {
    /// Families whose simple random walk is known to be transient.
    pub fn known_transient(&self) -> bool {
        match *self {
            GraphFamily::FreeGroup { rank } => rank >= 2,
            GraphFamily::RegularTree { degree } => degree >= 3,
            GraphFamily::Lattice { dim } => dim >= 3,
            GraphFamily::Finite { .. } => false,
        }
    }

    /// Short label used in CSV output, e.g. `regular_tree(3)`.
    pub fn label(&self) -> String {
        match self {
            GraphFamily::FreeGroup { rank } => format!("free_group({rank})"),
            GraphFamily::Lattice { dim } => format!("lattice({dim})"),
            GraphFamily::RegularTree { degree } => format!("regular_tree({degree})"),
            GraphFamily::Finite { vertices } => format!("finite({vertices})"),
        }
    }
}

#[derive(Debug, Clone)]
enum Topology {
    Words { gens: Vec<u8>, inverse: [u8; 128] },
    Lattice { dim: usize },
    Finite { adjacency: Vec<Vec<u32>> },
}

/// Immutable neighbour oracle; cheap to share across worker threads.
#[derive(Debug, Clone)]
pub struct GraphOracle {
    topology: Topology,
    family: GraphFamily,
    degree_bound: usize,
    origin: VertexKey,
}

const MAX_LETTERS: usize = 26;

pub fn build_cayley_graph(family: &GraphFamily) -> Result<GraphOracle> {
    match *family {
        GraphFamily::FreeGroup { rank } => {
            if rank == 0 || rank > MAX_LETTERS {
                return Err(FriError::InvalidFamily(format!(
                    "free group rank must be in 1..={MAX_LETTERS}, got {rank}"
                )));
            }
            let mut gens = Vec::with_capacity(2 * rank);
            let mut inverse = [0u8; 128];
            for i in 0..rank as u8 {
                let (lo, hi) = (b'a' + i, b'A' + i);
                gens.push(lo);
                gens.push(hi);
                inverse[lo as usize] = hi;
                inverse[hi as usize] = lo;
            }
            Ok(GraphOracle::words(family.clone(), gens, inverse))
        }
        GraphFamily::RegularTree { degree } => {
            if degree == 0 || degree > MAX_LETTERS {
                return Err(FriError::InvalidFamily(format!("tree degree must be in 1..={MAX_LETTERS}, got {degree}")));
            }
            let gens: Vec<u8> = (0..degree as u8).map(|i| b'a' + i).collect();
            let mut inverse = [0u8; 128];
            for &g in &gens {
                inverse[g as usize] = g;
            }
            Ok(GraphOracle::words(family.clone(), gens, inverse))
        }
        GraphFamily::Lattice { dim } => {
            if dim == 0 {
                return Err(FriError::InvalidFamily("lattice dimension must be at least 1".into()));
            }
            Ok(GraphOracle {
                topology: Topology::Lattice { dim },
                family: family.clone(),
                degree_bound: 2 * dim,
                origin: VertexKey::Point(SmallVec::from_elem(0, dim)),
            })
        }
        GraphFamily::Finite { .. } => Err(FriError::InvalidFamily("finite graphs are built from an edge list".into())),
    }
}

/// Simple connected graph on `0..n`. Duplicate edges are merged; self-loops
/// and isolated vertices are rejected.
pub fn build_finite_graph(n: usize, edges: &[(u32, u32)]) -> Result<GraphOracle> {
    if n == 0 {
        return Err(FriError::InvalidFamily("finite graph needs at least one vertex".into()));
    }
    let mut adjacency = vec![Vec::new(); n];
    for &(a, b) in edges {
        for v in [a, b] {
            if v as usize >= n {
                return Err(FriError::IndexOutOfRange { index: v, n });
            }
        }
        if a == b {
            return Err(FriError::SelfLoop(a));
        }
        adjacency[a as usize].push(b);
        adjacency[b as usize].push(a);
    }
    for list in &mut adjacency {
        list.sort_unstable();
        list.dedup();
    }
    // connected with every degree positive
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0u32]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(v) = queue.pop_front() {
        for &w in &adjacency[v as usize] {
            if !seen[w as usize] {
                seen[w as usize] = true;
                reached += 1;
                queue.push_back(w);
            }
        }
    }
    if reached < n || adjacency[0].is_empty() {
        return Err(FriError::Disconnected);
    }
    let degree_bound = adjacency.iter().map(Vec::len).max().unwrap_or(0);
    Ok(GraphOracle {
        topology: Topology::Finite { adjacency },
        family: GraphFamily::Finite { vertices: n },
        degree_bound,
        origin: VertexKey::Index(0),
    })
}

/// Parses a whitespace-separated edge list, one `u v` pair per line.
/// Blank lines and lines starting with `#` are skipped. Returns the vertex
/// count (largest index + 1) and the edges.
pub fn parse_edge_list(text: &str) -> Result<(usize, Vec<(u32, u32)>)> {
    let mut edges = Vec::new();
    let mut n = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let mut next = || -> Result<u32> {
            fields
                .next()
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| FriError::InvalidFamily(format!("edge list line {}: expected `u v`", lineno + 1)))
        };
        let (a, b) = (next()?, next()?);
        n = n.max(a.max(b) as usize + 1);
        edges.push((a, b));
    }
    Ok((n, edges))
}

impl GraphOracle {
    fn words(family: GraphFamily, gens: Vec<u8>, inverse: [u8; 128]) -> Self {
        GraphOracle {
            degree_bound: gens.len(),
            topology: Topology::Words { gens, inverse },
            family,
            origin: VertexKey::Word(Word::identity()),
        }
    }

    pub fn family(&self) -> &GraphFamily {
        &self.family
    }

    /// The identity element for Cayley graphs, vertex 0 for finite graphs.
    pub fn origin(&self) -> VertexKey {
        self.origin.clone()
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    /// Degree of the tree when the graph is a regular tree.
    pub fn regular_tree_degree(&self) -> Option<usize> {
        match &self.topology {
            Topology::Words { gens, .. } if gens.len() >= 2 => Some(gens.len()),
            _ => None,
        }
    }

    pub fn degree(&self, v: &VertexKey) -> usize {
        match &self.topology {
            Topology::Words { gens, .. } => gens.len(),
            Topology::Lattice { dim } => 2 * dim,
            Topology::Finite { adjacency } => match v {
                VertexKey::Index(i) => adjacency[*i as usize].len(),
                _ => panic!("vertex {v} is not a finite-graph vertex"),
            },
        }
    }

    /// The `i`-th neighbour of `v` in the family's generator order.
    pub fn neighbor(&self, v: &VertexKey, i: usize) -> VertexKey {
        match (&self.topology, v) {
            (Topology::Words { gens, inverse }, VertexKey::Word(w)) => {
                let g = gens[i];
                VertexKey::Word(w.mul_letter(g, inverse[g as usize]))
            }
            (Topology::Lattice { .. }, VertexKey::Point(p)) => {
                let mut q = p.clone();
                q[i / 2] += if i % 2 == 0 { 1 } else { -1 };
                VertexKey::Point(q)
            }
            (Topology::Finite { adjacency }, VertexKey::Index(j)) => VertexKey::Index(adjacency[*j as usize][i]),
            _ => panic!("vertex {v} does not belong to a {} graph", self.family.label()),
        }
    }

    pub fn neighbors(&self, v: &VertexKey) -> Vec<VertexKey> {
        (0..self.degree(v)).map(|i| self.neighbor(v, i)).collect()
    }

    /// Whether `v` is a valid vertex key for this graph.
    pub fn contains(&self, v: &VertexKey) -> bool {
        match (&self.topology, v) {
            (Topology::Words { gens, inverse }, VertexKey::Word(w)) => {
                let letters = w.letters();
                letters.iter().all(|l| gens.contains(l)) && letters.windows(2).all(|p| inverse[p[0] as usize] != p[1])
            }
            (Topology::Lattice { dim }, VertexKey::Point(p)) => p.len() == *dim,
            (Topology::Finite { adjacency }, VertexKey::Index(i)) => (*i as usize) < adjacency.len(),
            _ => false,
        }
    }

    pub fn is_adjacent(&self, a: &VertexKey, b: &VertexKey) -> bool {
        match (&self.topology, a, b) {
            (Topology::Words { .. }, VertexKey::Word(x), VertexKey::Word(y)) => {
                x.prefix() == Some(y) || y.prefix() == Some(x)
            }
            (Topology::Lattice { .. }, VertexKey::Point(p), VertexKey::Point(q)) => {
                p.len() == q.len() && p.iter().zip(q).map(|(s, t)| s.abs_diff(*t)).sum::<u64>() == 1
            }
            (Topology::Finite { adjacency }, VertexKey::Index(i), VertexKey::Index(j)) => {
                adjacency.get(*i as usize).is_some_and(|l| l.binary_search(j).is_ok())
            }
            _ => false,
        }
    }

    /// Parses the canonical string form produced by `Display`.
    pub fn parse_key(&self, s: &str) -> Result<VertexKey> {
        let bad = || FriError::ParseKey(s.to_string());
        let key = match &self.topology {
            Topology::Words { inverse, .. } => {
                if s == "e" {
                    VertexKey::Word(Word::identity())
                } else {
                    let mut w = Word::identity();
                    for b in s.bytes() {
                        if !b.is_ascii() {
                            return Err(bad());
                        }
                        w = w.mul_letter(b, inverse[b as usize]);
                    }
                    VertexKey::Word(w)
                }
            }
            Topology::Lattice { .. } => {
                let inner = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?;
                let coords: Point =
                    inner.split(',').map(|c| i64::from_str(c.trim()).map_err(|_| bad())).collect::<Result<_>>()?;
                VertexKey::Point(coords)
            }
            Topology::Finite { .. } => VertexKey::Index(s.parse().map_err(|_| bad())?),
        };
        // reject non-reduced words and foreign keys instead of silently fixing them
        if !self.contains(&key) || key.to_string() != s {
            return Err(bad());
        }
        Ok(key)
    }

    /// Exact distance when a closed form exists (tree words, lattices).
    pub(crate) fn closed_form_distance(&self, a: &VertexKey, b: &VertexKey) -> Option<usize> {
        match (&self.topology, a, b) {
            (Topology::Words { .. }, VertexKey::Word(x), VertexKey::Word(y)) => {
                let (mut x, mut y) = (x, y);
                let mut d = 0;
                while x.len() > y.len() {
                    x = x.prefix().expect("non-empty word");
                    d += 1;
                }
                while y.len() > x.len() {
                    y = y.prefix().expect("non-empty word");
                    d += 1;
                }
                while x != y {
                    x = x.prefix().expect("distinct words of equal length are non-empty");
                    y = y.prefix().expect("distinct words of equal length are non-empty");
                    d += 2;
                }
                Some(d)
            }
            (Topology::Lattice { .. }, VertexKey::Point(p), VertexKey::Point(q)) => {
                Some(p.iter().zip(q).map(|(s, t)| s.abs_diff(*t) as usize).sum())
            }
            _ => None,
        }
    }
}

/// A finite vertex set with O(1) membership and deterministic iteration order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Window {
    set: IndexSet<VertexKey>,
}

impl Window {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(v: VertexKey) -> Self {
        let mut w = Self::new();
        w.insert(v);
        w
    }

    pub fn insert(&mut self, v: VertexKey) -> bool {
        self.set.insert(v)
    }

    pub fn contains(&self, v: &VertexKey) -> bool {
        self.set.contains(v)
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &VertexKey> {
        self.set.iter()
    }

    pub fn is_subset(&self, other: &Window) -> bool {
        self.set.is_subset(&other.set)
    }

    /// Vertices of `self` not in `other`, in `self`'s order.
    pub fn difference<'a>(&'a self, other: &'a Window) -> impl Iterator<Item = &'a VertexKey> {
        self.set.iter().filter(move |v| !other.contains(v))
    }
}

impl FromIterator<VertexKey> for Window {
    fn from_iter<I: IntoIterator<Item = VertexKey>>(iter: I) -> Self {
        Window { set: iter.into_iter().collect() }
    }
}

impl Extend<VertexKey> for Window {
    fn extend<I: IntoIterator<Item = VertexKey>>(&mut self, iter: I) {
        self.set.extend(iter)
    }
}

impl<'a> IntoIterator for &'a Window {
    type Item = &'a VertexKey;
    type IntoIter = indexmap::set::Iter<'a, VertexKey>;

    fn into_iter(self) -> Self::IntoIter {
        self.set.iter()
    }
}

/// BFS ball of the given radius around `center`, in BFS order.
pub fn ball(oracle: &GraphOracle, center: &VertexKey, radius: usize) -> Window {
    let mut seen = Window::singleton(center.clone());
    let mut layer = vec![center.clone()];
    for _ in 0..radius {
        let mut next = Vec::new();
        for v in &layer {
            for w in oracle.neighbors(v) {
                if seen.insert(w.clone()) {
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        layer = next;
    }
    seen
}

/// Breadth-first distance, `None` when it exceeds `cap`.
pub fn bfs_distance(oracle: &GraphOracle, a: &VertexKey, b: &VertexKey, cap: usize) -> Option<usize> {
    if a == b {
        return Some(0);
    }
    let mut seen = Window::singleton(a.clone());
    let mut layer = vec![a.clone()];
    for d in 1..=cap {
        let mut next = Vec::new();
        for v in &layer {
            for w in oracle.neighbors(v) {
                if &w == b {
                    return Some(d);
                }
                if seen.insert(w.clone()) {
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            return None;
        }
        layer = next;
    }
    None
}

/// Graph distance, `None` when it exceeds `cap`. Uses the closed form on
/// trees and lattices and BFS otherwise.
pub fn graph_distance(oracle: &GraphOracle, a: &VertexKey, b: &VertexKey, cap: usize) -> Option<usize> {
    match oracle.closed_form_distance(a, b) {
        Some(d) => (d <= cap).then_some(d),
        None => bfs_distance(oracle, a, b, cap),
    }
}
