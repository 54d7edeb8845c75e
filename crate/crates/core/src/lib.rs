//! Finitary random interlacements (FRI) on bounded-degree graphs.
//!
//! The crate is organised bottom-up:
//!
//! * [`graphs`] – lazily materialised graphs behind a neighbour oracle
//!   (free groups, lattices, regular trees, finite edge lists).
//! * [`walks`] – finite walks, hitting times, concatenation and the
//!   geometrically killed walk law `P^(T)_x`.
//! * [`process`] – the FRI point process: exact intensity `ν^(T)`, exact
//!   window sampling through the escaping/avoiding pair decomposition, and
//!   trace diagnostics against the random-interlacement limit.
//! * [`clusters`] – cluster decomposition, the cluster-at-origin growth
//!   recursion and the truncated growth process.
//! * [`branching`] – the coloured forest, its map into the graph, the
//!   coupling that dominates the origin cluster, and the Galton–Watson BRW.
//! * [`spectral`] – spectral radius and escape probability estimators.
//! * [`entropy`] – the base-entropy upper bound of the Bernoulli factor.
//!
//! Randomness always comes from an explicit stream, see [`rng::derive_stream`].

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod branching;
pub mod clusters;
pub mod defaults;
pub mod entropy;
mod error;
pub mod graphs;
pub mod process;
pub mod rng;
pub mod sampling;
pub mod spectral;
pub mod stats;
pub mod walks;

pub use error::{FriError, Result};
pub use graphs::{build_cayley_graph, build_finite_graph, GraphFamily, GraphOracle, VertexKey, Window};
pub use process::{FriParams, WalkConfiguration};
pub use rng::{derive_stream, StreamRng};
pub use stats::Estimate;
pub use walks::{HittingTime, KilledWalkLaw, Walk};
