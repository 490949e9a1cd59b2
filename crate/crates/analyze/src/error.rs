use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AnalyzeError {
    #[error("chain is not irreducible: {recurrent_classes} recurrent class(es), {transient_states} transient state(s); steady state is undefined")]
    NotIrreducible {
        recurrent_classes: usize,
        transient_states: usize,
    },
    #[error("solver did not converge within {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: u64, residual: f64 },
    #[error("label class {class} does not exist in the chain")]
    LabelMissing { class: String },
    #[error("dense reference solver is limited to {max} states, got {size}")]
    SizeLimit { size: usize, max: usize },
    #[error("time must be a finite nonnegative number, got {0}")]
    InvalidTime(f64),
    #[error("measure {0} requires a time point")]
    TimeRequired(String),
}
