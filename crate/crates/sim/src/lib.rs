//! Monte Carlo discrete-event simulation of dependability models: an
//! independent estimator for the measures the analytical pipeline computes.
//! Jumps are resolved through the composer's semantics with sampled
//! Bernoulli draws, so the simulated process and the composed chain follow
//! exactly the same cascade and guard ordering.

pub mod estimate;
pub mod rng;
pub mod run;

pub use estimate::{simulate_measure, Estimate, SimConfig};
pub use rng::{mix64, replication_seed, SplitMix64};
pub use run::{drive, replication_run, SimError, Trajectory, DEFAULT_CASCADE_DEPTH};
