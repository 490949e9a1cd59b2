//! Monte Carlo measure estimation with normal-approximation confidence
//! intervals. Replications are independent (seed-derived streams) and the
//! merge is an integer success count, so the estimate is bit-identical for a
//! given (instance, configuration) regardless of evaluation order.

use errml_analyze::{MeasureKind, MeasureSpec};
use errml_model::instance::{BoundClassAtom, BoundInstance};
use serde::Serialize;

use crate::rng::replication_seed;
use crate::run::{drive, SimError, DEFAULT_CASCADE_DEPTH};

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub replications: u64,
    /// Horizon in hours; also the evaluation point for point measures.
    pub horizon: f64,
    pub seed: u64,
    pub max_cascade_depth: u32,
}

impl SimConfig {
    pub fn new(replications: u64, horizon: f64, seed: u64) -> Self {
        Self {
            replications,
            horizon,
            seed,
            max_cascade_depth: DEFAULT_CASCADE_DEPTH,
        }
    }
}

/// Point estimate with a 95% normal-approximation half-width.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Estimate {
    pub measure: MeasureKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    pub value: f64,
    pub half_width_95: f64,
    pub replications: u64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

const Z_95: f64 = 1.959963984540054;

/// Indicator predicate: does the configuration carry the class?
struct ClassTest<'a> {
    inst: &'a BoundInstance,
    class: u32,
}

impl ClassTest<'_> {
    fn holds(&self, config: &[u16]) -> bool {
        self.inst
            .classes
            .iter()
            .filter(|c| c.name == self.class)
            .any(|c| {
                c.condition
                    .eval(&|a: &BoundClassAtom| config[a.automaton as usize] == a.state)
            })
    }
}

pub fn simulate_measure(
    inst: &BoundInstance,
    spec: &MeasureSpec,
    cfg: &SimConfig,
) -> Result<Estimate, SimError> {
    if cfg.replications == 0 {
        return Err(SimError::NoReplications);
    }
    let (kind, note) = match spec.kind {
        MeasureKind::PointAvailability | MeasureKind::Reliability | MeasureKind::Safety => {
            (spec.kind, None)
        }
        MeasureKind::SteadyStateAvailability => (
            MeasureKind::PointAvailability,
            Some(format!(
                "steady state approximated by point availability at the horizon t={}",
                cfg.horizon
            )),
        ),
        MeasureKind::Mttf => return Err(SimError::Unsupported("mttf".to_string())),
    };
    let class_name = match kind {
        MeasureKind::Safety => &spec.catastrophic_class,
        _ => &spec.failure_class,
    };
    let class = inst
        .class_names
        .iter()
        .position(|c| c == class_name)
        .ok_or_else(|| SimError::LabelMissing(class_name.clone()))? as u32;
    let test = ClassTest { inst, class };
    let horizon = spec.time.unwrap_or(cfg.horizon);

    let mut successes: u64 = 0;
    for replication in 0..cfg.replications {
        let seed = replication_seed(cfg.seed, replication);
        let ok = match kind {
            MeasureKind::PointAvailability => {
                let mut last_ok = true;
                drive(inst, horizon, seed, cfg.max_cascade_depth, |_t, config| {
                    last_ok = !test.holds(config);
                    true
                })?;
                last_ok
            }
            MeasureKind::Reliability | MeasureKind::Safety => {
                let mut never_entered = true;
                drive(inst, horizon, seed, cfg.max_cascade_depth, |_t, config| {
                    if test.holds(config) {
                        never_entered = false;
                        return false; // absorbed for this measure's purposes
                    }
                    true
                })?;
                never_entered
            }
            _ => unreachable!(),
        };
        if ok {
            successes += 1;
        }
    }

    let n = cfg.replications;
    let mean = successes as f64 / n as f64;
    let half_width_95 = if n >= 2 {
        // Bernoulli sample variance with the n-1 correction
        let variance = mean * (1.0 - mean) * n as f64 / (n - 1) as f64;
        Z_95 * (variance / n as f64).sqrt()
    } else {
        0.0
    };

    Ok(Estimate {
        measure: spec.kind,
        time: Some(horizon),
        value: mean,
        half_width_95,
        replications: n,
        seed: cfg.seed,
        note,
    })
}
