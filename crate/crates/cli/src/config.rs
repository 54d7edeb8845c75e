//! Experiment configuration files.
//!
//! A config is a small TOML document:
//!
//! ```toml
//! seed = 7
//!
//! [graph]
//! family = "regular_tree"
//! degree = 3
//!
//! [grid]
//! u = [0.1, 0.2]
//! T = [2.0, 8.0]
//!
//! [budgets]
//! replicas = 1000
//! radius = 8
//! ```
//!
//! Every omitted key takes the default shown by [`Budgets::default`], and the
//! fully resolved config is written into the run manifest.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use fri_core::{build_cayley_graph, build_finite_graph, FriParams, GraphFamily, GraphOracle};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Sample,
    Clusters,
    Growth,
    Truncated,
    Coupling,
    Brw,
    Spectral,
    Entropy,
    Convergence,
    Verify,
}

impl Kind {
    pub const ALL: [Kind; 10] = [
        Kind::Sample,
        Kind::Clusters,
        Kind::Growth,
        Kind::Truncated,
        Kind::Coupling,
        Kind::Brw,
        Kind::Spectral,
        Kind::Entropy,
        Kind::Convergence,
        Kind::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Sample => "sample",
            Kind::Clusters => "clusters",
            Kind::Growth => "growth",
            Kind::Truncated => "truncated",
            Kind::Coupling => "coupling",
            Kind::Brw => "brw",
            Kind::Spectral => "spectral",
            Kind::Entropy => "entropy",
            Kind::Convergence => "convergence",
            Kind::Verify => "verify",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Kind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| format!("unknown experiment kind `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    /// `free_group`, `lattice`, `regular_tree` or `finite`.
    pub family: String,
    pub rank: Option<usize>,
    pub dim: Option<usize>,
    pub degree: Option<usize>,
    /// Edge-list file for `finite`, relative to the config file.
    pub edges_path: Option<PathBuf>,
}

impl GraphConfig {
    pub fn regular_tree(degree: usize) -> Self {
        GraphConfig { family: "regular_tree".into(), rank: None, dim: None, degree: Some(degree), edges_path: None }
    }

    pub fn build(&self) -> anyhow::Result<GraphOracle> {
        let need =
            |v: Option<usize>, key: &str| v.with_context(|| format!("graph family `{}` needs `{key}`", self.family));
        let oracle = match self.family.as_str() {
            "free_group" => build_cayley_graph(&GraphFamily::FreeGroup { rank: need(self.rank, "rank")? })?,
            "lattice" => build_cayley_graph(&GraphFamily::Lattice { dim: need(self.dim, "dim")? })?,
            "regular_tree" => build_cayley_graph(&GraphFamily::RegularTree { degree: need(self.degree, "degree")? })?,
            "finite" => {
                let path = self.edges_path.as_ref().context("graph family `finite` needs `edges_path`")?;
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let (n, edges) = fri_core::graphs::parse_edge_list(&text)?;
                build_finite_graph(n, &edges)?
            }
            other => bail!("unknown graph family `{other}`"),
        };
        Ok(oracle)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub u: Vec<f64>,
    #[serde(rename = "T")]
    pub t: Vec<f64>,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { u: vec![0.1], t: vec![4.0] }
    }
}

impl Grid {
    /// Cells in `u`-major order.
    pub fn cells(&self) -> Vec<(usize, FriParams)> {
        let mut out = Vec::new();
        for &u in &self.u {
            for &t in &self.t {
                let p = FriParams::new(u, t).expect("grid validated");
                out.push((out.len(), p));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    /// Independent runs per grid cell.
    pub replicas: u64,
    /// Monte Carlo draws inside one estimator.
    pub mc_samples: u64,
    /// Window or confinement radius around the origin.
    pub radius: usize,
    pub vertex_budget: usize,
    pub max_stages: usize,
    pub depth_limit: usize,
    pub forest_budget: usize,
    /// Largest return time of the return-probability estimator.
    pub n_max: usize,
    /// Ball radius for power iteration.
    pub spectral_radius: usize,
    /// Horizon of unkilled walks; defaults to `ceil(50/(1-ρ̂))`.
    pub horizon: Option<usize>,
    /// `K = ball(x, k_radius)`; empty when omitted.
    pub k_radius: Option<usize>,
    /// Defaults to `ln(1/ρ̂) / (2 ln D)`.
    pub sigma: Option<f64>,
    /// Defaults to the power-iteration estimate at `spectral_radius`.
    pub rho_hat: Option<f64>,
    /// Replicas per cell dumped to JSONL.
    pub jsonl_limit: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            replicas: 1000,
            mc_samples: 10_000,
            radius: 8,
            vertex_budget: fri_core::defaults::VERTEX_BUDGET,
            max_stages: 1000,
            depth_limit: 10,
            forest_budget: fri_core::branching::NODE_BUDGET,
            n_max: 200,
            spectral_radius: 20,
            horizon: None,
            k_radius: None,
            sigma: None,
            rho_hat: None,
            jsonl_limit: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    #[default]
    Nats,
    Bits,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntropyOptions {
    /// Generator count `|S|`; defaults to the degree of the origin.
    pub s: Option<usize>,
    pub units: Units,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOptions {
    /// Criteria to run; all of them when empty.
    pub criteria: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub graph: GraphConfig,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default)]
    pub entropy: EntropyOptions,
    #[serde(default)]
    pub verify: VerifyOptions,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn new(seed: u64, graph: GraphConfig) -> Self {
        ExperimentConfig {
            seed: Some(seed),
            graph,
            grid: Grid::default(),
            budgets: Budgets::default(),
            entropy: EntropyOptions::default(),
            verify: VerifyOptions::default(),
            output: OutputConfig::default(),
        }
    }

    /// Parses a config; relative paths inside it are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> anyhow::Result<Self> {
        let mut config: ExperimentConfig = toml::from_str(text).context("invalid config")?;
        if let Some(p) = config.graph.edges_path.take() {
            config.graph.edges_path = Some(if p.is_relative() { base.join(p) } else { p });
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn seed(&self) -> u64 {
        self.seed.expect("validated config has a seed")
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.seed.is_none() {
            bail!("a seed is required: set `seed` in the config or pass --seed");
        }
        if self.grid.u.is_empty() || self.grid.t.is_empty() {
            bail!("grid.u and grid.T must be non-empty");
        }
        for &u in &self.grid.u {
            if !(u > 0.0 && u.is_finite()) {
                bail!("grid.u values must be positive, got {u}");
            }
        }
        for &t in &self.grid.t {
            if !(t > 0.0 && t.is_finite()) {
                bail!("grid.T values must be positive, got {t}");
            }
        }
        let b = &self.budgets;
        if b.replicas == 0 || b.mc_samples == 0 {
            bail!("budgets.replicas and budgets.mc_samples must be at least 1");
        }
        if b.vertex_budget == 0 || b.max_stages == 0 || b.depth_limit == 0 || b.forest_budget == 0 {
            bail!("budgets.vertex_budget, max_stages, depth_limit and forest_budget must be at least 1");
        }
        if b.radius == 0 || b.spectral_radius == 0 {
            bail!("budgets.radius and budgets.spectral_radius must be at least 1");
        }
        if b.n_max < 2 || b.n_max % 2 == 1 {
            bail!("budgets.n_max must be even and at least 2");
        }
        if let Some(k) = b.k_radius {
            if k >= b.radius {
                bail!("budgets.k_radius must be smaller than budgets.radius");
            }
        }
        if let Some(s) = b.sigma {
            if !(s >= 0.0) {
                bail!("budgets.sigma must be non-negative");
            }
        }
        if let Some(r) = b.rho_hat {
            if !(r > 0.0 && r <= 1.0) {
                bail!("budgets.rho_hat must lie in (0, 1]");
            }
        }
        if self.entropy.s == Some(0) {
            bail!("entropy.s must be at least 1");
        }
        if let Some(bad) = self.verify.criteria.iter().find(|&&c| !(1..=13).contains(&c)) {
            bail!("verify.criteria entries must be in 1..=13, got {bad}");
        }
        self.graph.build()?;
        Ok(())
    }

    /// SHA-256 of everything that determines the outputs (the output
    /// directory is excluded).
    pub fn hash(&self, kind: Kind) -> String {
        let value = serde_json::json!({
            "kind": kind,
            "seed": self.seed,
            "graph": self.graph,
            "grid": self.grid,
            "budgets": self.budgets,
            "entropy": self.entropy,
            "verify": self.verify,
        });
        hex::encode(Sha256::digest(value.to_string().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "seed = 3\n[graph]\nfamily = \"regular_tree\"\ndegree = 3\n";

    #[test]
    fn defaults_fill_missing_sections() {
        let c = ExperimentConfig::parse(MINIMAL, Path::new(".")).unwrap();
        c.validate().unwrap();
        assert_eq!(c.budgets, Budgets::default());
        assert_eq!(c.grid.cells().len(), 1);
    }

    #[test]
    fn rejects_bad_configs() {
        let no_seed = "[graph]\nfamily = \"regular_tree\"\ndegree = 3\n";
        assert!(ExperimentConfig::parse(no_seed, Path::new(".")).unwrap().validate().is_err());
        let bad_u = format!("{MINIMAL}[grid]\nu = [0.0]\nT = [1.0]\n");
        assert!(ExperimentConfig::parse(&bad_u, Path::new(".")).unwrap().validate().is_err());
        let typo = format!("{MINIMAL}[budgets]\nreplica = 3\n");
        assert!(ExperimentConfig::parse(&typo, Path::new(".")).is_err());
        let family = "seed = 1\n[graph]\nfamily = \"torus\"\n";
        assert!(ExperimentConfig::parse(family, Path::new(".")).unwrap().validate().is_err());
    }

    #[test]
    fn hash_ignores_output_dir() {
        let mut a = ExperimentConfig::parse(MINIMAL, Path::new(".")).unwrap();
        let h = a.hash(Kind::Growth);
        a.output.dir = PathBuf::from("elsewhere");
        assert_eq!(a.hash(Kind::Growth), h);
        a.seed = Some(4);
        assert_ne!(a.hash(Kind::Growth), h);
        assert_ne!(a.hash(Kind::Sample), a.hash(Kind::Growth));
    }

    #[test]
    fn kinds_round_trip() {
        for k in Kind::ALL {
            assert_eq!(k.name().parse::<Kind>().unwrap(), k);
        }
        assert!("plot".parse::<Kind>().is_err());
    }
}
