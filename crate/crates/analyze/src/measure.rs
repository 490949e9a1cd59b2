//! Dependability measures over a labeled chain.
//!
//! Availability sums stationary (or transient) probability over states not
//! carrying the failure class. Reliability and safety make the failure
//! (resp. catastrophic) states absorbing — their outgoing transitions are
//! deleted, the states remain — and report the probability of not having
//! been absorbed by the horizon. MTTF solves the expected-absorption-time
//! system on the states from which the failure class stays reachable.
//!
//! Time unit: hours; rates are per hour.

use serde::Serialize;

use errml_compose::{Ctmc, RateTransition};

use crate::error::AnalyzeError;
use crate::steady::{kahan_sum, steady_state};
use crate::transient::transient;
use crate::SolverConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    SteadyStateAvailability,
    PointAvailability,
    Reliability,
    Safety,
    Mttf,
}

impl MeasureKind {
    pub fn needs_time(&self) -> bool {
        matches!(
            self,
            MeasureKind::PointAvailability | MeasureKind::Reliability | MeasureKind::Safety
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            MeasureKind::SteadyStateAvailability => "steady_state_availability",
            MeasureKind::PointAvailability => "point_availability",
            MeasureKind::Reliability => "reliability",
            MeasureKind::Safety => "safety",
            MeasureKind::Mttf => "mttf",
        }
    }
}

impl std::str::FromStr for MeasureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "steady_state_availability" => MeasureKind::SteadyStateAvailability,
            "point_availability" => MeasureKind::PointAvailability,
            "reliability" => MeasureKind::Reliability,
            "safety" => MeasureKind::Safety,
            "mttf" => MeasureKind::Mttf,
            other => return Err(format!("unknown measure kind '{other}'")),
        })
    }
}

#[derive(Debug, Clone)]
pub struct MeasureSpec {
    pub kind: MeasureKind,
    /// Horizon in hours; required for the time-indexed measures.
    pub time: Option<f64>,
    pub failure_class: String,
    pub catastrophic_class: String,
}

impl MeasureSpec {
    pub fn new(kind: MeasureKind) -> Self {
        Self {
            kind,
            time: None,
            failure_class: "Failed".to_string(),
            catastrophic_class: "Catastrophic".to_string(),
        }
    }

    pub fn at(mut self, time: f64) -> Self {
        self.time = Some(time);
        self
    }

    pub fn failed(mut self, class: &str) -> Self {
        self.failure_class = class.to_string();
        self
    }

    pub fn catastrophic(mut self, class: &str) -> Self {
        self.catastrophic_class = class.to_string();
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasureResult {
    pub measure: MeasureKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    pub value: f64,
    pub achieved_residual: f64,
    pub iterations: u64,
    pub truncation_terms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn class_mask(ctmc: &Ctmc, class: &str) -> Result<u64, AnalyzeError> {
    let id = ctmc
        .class_id(class)
        .ok_or_else(|| AnalyzeError::LabelMissing {
            class: class.to_string(),
        })?;
    Ok(1u64 << id)
}

fn sum_outside(distribution: &[f64], labels: &[u64], mask: u64) -> f64 {
    let kept: Vec<f64> = distribution
        .iter()
        .zip(labels)
        .filter(|(_, &m)| m & mask == 0)
        .map(|(p, _)| *p)
        .collect();
    kahan_sum(&kept)
}

/// Copy of the chain with the outgoing transitions of `mask`-labeled states
/// deleted (the states themselves remain).
fn make_absorbing(ctmc: &Ctmc, mask: u64) -> Ctmc {
    let transitions: Vec<RateTransition> = ctmc
        .transitions
        .iter()
        .filter(|t| ctmc.labels[t.source as usize] & mask == 0)
        .cloned()
        .collect();
    Ctmc {
        transitions,
        ..ctmc.clone()
    }
}

pub fn measure(
    ctmc: &Ctmc,
    spec: &MeasureSpec,
    cfg: &SolverConfig,
) -> Result<MeasureResult, AnalyzeError> {
    let time = match (spec.kind.needs_time(), spec.time) {
        (true, None) => return Err(AnalyzeError::TimeRequired(spec.kind.name().to_string())),
        (_, t) => t,
    };
    match spec.kind {
        MeasureKind::SteadyStateAvailability => {
            let mask = class_mask(ctmc, &spec.failure_class)?;
            let out = steady_state(ctmc, cfg)?;
            Ok(MeasureResult {
                measure: spec.kind,
                time: None,
                value: sum_outside(&out.distribution, &ctmc.labels, mask),
                achieved_residual: out.residual,
                iterations: out.iterations,
                truncation_terms: 0,
                note: None,
            })
        }
        MeasureKind::PointAvailability => {
            let mask = class_mask(ctmc, &spec.failure_class)?;
            let out = transient(ctmc, time.unwrap(), cfg)?;
            Ok(MeasureResult {
                measure: spec.kind,
                time,
                value: sum_outside(&out.distribution, &ctmc.labels, mask),
                achieved_residual: out.discarded,
                iterations: 0,
                truncation_terms: out.terms,
                note: None,
            })
        }
        MeasureKind::Reliability | MeasureKind::Safety => {
            let class = if spec.kind == MeasureKind::Reliability {
                &spec.failure_class
            } else {
                &spec.catastrophic_class
            };
            let mask = class_mask(ctmc, class)?;
            let absorbing = make_absorbing(ctmc, mask);
            let out = transient(&absorbing, time.unwrap(), cfg)?;
            Ok(MeasureResult {
                measure: spec.kind,
                time,
                value: sum_outside(&out.distribution, &ctmc.labels, mask),
                achieved_residual: out.discarded,
                iterations: 0,
                truncation_terms: out.terms,
                note: None,
            })
        }
        MeasureKind::Mttf => mttf(ctmc, &spec.failure_class, cfg),
    }
}

/// Expected time to first entry into the failure class, by Gauss-Seidel on
/// the expected-absorption-time equations restricted to the transient states
/// reachable from the initial state.
fn mttf(
    ctmc: &Ctmc,
    failure_class: &str,
    cfg: &SolverConfig,
) -> Result<MeasureResult, AnalyzeError> {
    let mask = class_mask(ctmc, failure_class)?;
    let n = ctmc.n_states;
    let failed: Vec<bool> = ctmc.labels.iter().map(|&m| m & mask != 0).collect();
    if failed[ctmc.initial as usize] {
        return Ok(MeasureResult {
            measure: MeasureKind::Mttf,
            time: None,
            value: 0.0,
            achieved_residual: 0.0,
            iterations: 0,
            truncation_terms: 0,
            note: Some("the initial state already carries the failure class".to_string()),
        });
    }

    // adjacency over non-failure states only (failure states absorb)
    let mut forward: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut backward: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut outflow = vec![0.0f64; n];
    for t in &ctmc.transitions {
        let (i, j) = (t.source as usize, t.target as usize);
        if failed[i] {
            continue;
        }
        outflow[i] += t.rate;
        forward[i].push((j, t.rate));
        backward[j].push(i);
    }

    // states reachable from the initial without passing failure states
    let mut reachable = vec![false; n];
    let mut stack = vec![ctmc.initial as usize];
    reachable[ctmc.initial as usize] = true;
    while let Some(i) = stack.pop() {
        if failed[i] {
            continue;
        }
        for &(j, _) in &forward[i] {
            if !reachable[j] {
                reachable[j] = true;
                stack.push(j);
            }
        }
    }

    // states that can still reach the failure class
    let mut can_fail = vec![false; n];
    let mut stack: Vec<usize> = (0..n).filter(|&i| failed[i]).collect();
    for &i in &stack {
        can_fail[i] = true;
    }
    while let Some(j) = stack.pop() {
        for &i in &backward[j] {
            if !can_fail[i] {
                can_fail[i] = true;
                stack.push(i);
            }
        }
    }

    if (0..n).any(|i| reachable[i] && !failed[i] && !can_fail[i])
        || !can_fail[ctmc.initial as usize]
    {
        return Ok(MeasureResult {
            measure: MeasureKind::Mttf,
            time: None,
            value: f64::INFINITY,
            achieved_residual: 0.0,
            iterations: 0,
            truncation_terms: 0,
            note: Some(
                "failure class unreachable with probability one; mean time to failure is infinite"
                    .to_string(),
            ),
        });
    }

    let solve_states: Vec<usize> = (0..n).filter(|&i| reachable[i] && !failed[i]).collect();
    let mut tau = vec![0.0f64; n];
    let mut iterations = 0u64;
    loop {
        for &i in &solve_states {
            let inflow: f64 = forward[i]
                .iter()
                .filter(|&&(j, _)| !failed[j])
                .map(|&(j, r)| r * tau[j])
                .sum();
            tau[i] = (1.0 + inflow) / outflow[i];
        }
        iterations += 1;
        let mut residual = 0.0f64;
        for &i in &solve_states {
            let inflow: f64 = forward[i]
                .iter()
                .filter(|&&(j, _)| !failed[j])
                .map(|&(j, r)| r * tau[j])
                .sum();
            residual = residual.max((outflow[i] * tau[i] - inflow - 1.0).abs());
        }
        if residual <= cfg.tolerance {
            return Ok(MeasureResult {
                measure: MeasureKind::Mttf,
                time: None,
                value: tau[ctmc.initial as usize],
                achieved_residual: residual,
                iterations,
                truncation_terms: 0,
                note: None,
            });
        }
        if iterations >= cfg.max_iterations {
            return Err(AnalyzeError::NoConvergence {
                iterations,
                residual,
            });
        }
    }
}
