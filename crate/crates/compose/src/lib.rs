//! Global state space construction for dependability models.
//!
//! The composer turns a bound instance into a labeled continuous-time Markov
//! chain: breadth-first exploration over tangible global states, with
//! propagation cascades expanded into probabilistic branch distributions and
//! guard-driven immediate reactions folded on the fly (vanishing
//! configurations never become chain states).

pub mod ctmc;
pub mod explore;
pub mod export;
pub mod semantics;

pub use ctmc::{compose, fold_raw_graph, Ctmc, RateTransition};
pub use explore::{explore, ExploreLimits, ExploreStats, RawGraph};
pub use semantics::{
    resolve_jump, stabilize, BernoulliBranches, ComposeError, FullExpansion, ResolvedJump,
    SampledDraw,
};
