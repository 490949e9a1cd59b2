//! Numerical evaluation of dependability measures on labeled CTMCs:
//! stationary distributions (Gauss-Seidel), transient distributions
//! (uniformization), reliability, availability, safety and MTTF, plus a
//! dense matrix-exponential reference solver for cross-checking.
//!
//! All solvers are pure functions of the immutable chain; time is measured
//! in hours and rates are per hour.

pub mod error;
pub mod expm;
pub mod measure;
pub mod steady;
pub mod transient;

pub use error::AnalyzeError;
pub use expm::{dense_expm, dense_generator, vec_mat};
pub use measure::{measure, MeasureKind, MeasureResult, MeasureSpec};
pub use steady::{steady_state, SteadyState};
pub use transient::{transient, transient_from, Transient};

/// Solver tuning knobs.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    /// Residual bound for the iterative linear solvers.
    pub tolerance: f64,
    pub max_iterations: u64,
    /// Poisson tail mass discarded by uniformization.
    pub uniformization_tail: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 1_000_000,
            uniformization_tail: 1e-12,
        }
    }
}

impl SolverConfig {
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }
}
