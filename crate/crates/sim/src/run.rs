//! Event-driven trajectory generation.
//!
//! Each step draws one exponential holding time from the total enabled rate,
//! picks the firing by a single uniform over the cumulative rates (automata
//! in canonical order, firings in their compiled order), and resolves the
//! jump through the composer's resolver with sampled Bernoulli draws — so a
//! trajectory follows exactly one branch of the exhaustive expansion.

use errml_compose::semantics::{resolve_jump, stabilize, ComposeError, SampledDraw};
use errml_model::instance::BoundInstance;
use thiserror::Error;

use crate::rng::SplitMix64;

pub const DEFAULT_CASCADE_DEPTH: u32 = 32;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Semantics(#[from] ComposeError),
    #[error("label class {0} does not exist in the instance")]
    LabelMissing(String),
    #[error("measure {0} is not supported by simulation")]
    Unsupported(String),
    #[error("horizon must be finite and nonnegative, got {0}")]
    InvalidHorizon(f64),
    #[error("at least one replication is required")]
    NoReplications,
}

/// A timed sequence of global configurations; the first entry is the
/// (stabilized) initial configuration at time zero, later entries are the
/// post-jump configurations at strictly increasing times below the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub points: Vec<(f64, Vec<u16>)>,
}

impl Trajectory {
    /// Configuration in effect at time `t` (the last jump at or before it).
    pub fn state_at(&self, t: f64) -> &[u16] {
        let mut current = &self.points[0].1;
        for (time, config) in &self.points {
            if *time <= t {
                current = config;
            } else {
                break;
            }
        }
        current
    }
}

/// Drive one replication, calling `visit` at time zero and after every jump.
/// Returning `false` from `visit` ends the replication early (the unused
/// random draws of this replication affect nothing else: every replication
/// has its own stream).
pub fn drive(
    inst: &BoundInstance,
    horizon: f64,
    seed: u64,
    max_cascade_depth: u32,
    mut visit: impl FnMut(f64, &[u16]) -> bool,
) -> Result<(), SimError> {
    if !horizon.is_finite() || horizon < 0.0 {
        return Err(SimError::InvalidHorizon(horizon));
    }
    let mut rng = SplitMix64::new(seed);

    let initial = stabilize(
        inst,
        &inst.initial_config(),
        &mut SampledDraw(|p| rng.bernoulli(p)),
        max_cascade_depth,
    )?;
    debug_assert_eq!(initial.branches.len(), 1);
    let mut config = initial.branches.into_iter().next().unwrap().1;
    if !visit(0.0, &config) {
        return Ok(());
    }

    let mut now = 0.0f64;
    loop {
        let total: f64 = config
            .iter()
            .zip(&inst.automata)
            .map(|(&s, a)| a.timed[s as usize].iter().map(|f| f.rate).sum::<f64>())
            .sum();
        if total == 0.0 {
            return Ok(()); // absorbed: the configuration persists forever
        }
        let holding = rng.exponential(total);
        if now + holding >= horizon {
            return Ok(());
        }
        now += holding;

        // categorical choice over the enabled firings
        let mut pick = rng.next_f64() * total;
        let mut chosen: Option<(usize, usize)> = None;
        'outer: for (ai, automaton) in inst.automata.iter().enumerate() {
            let firings = &automaton.timed[config[ai] as usize];
            for (fi, firing) in firings.iter().enumerate() {
                if pick < firing.rate {
                    chosen = Some((ai, fi));
                    break 'outer;
                }
                pick -= firing.rate;
            }
        }
        // rounding may push `pick` past the last candidate
        let (ai, fi) = chosen.unwrap_or_else(|| {
            let ai = (0..config.len())
                .rev()
                .find(|&a| !inst.automata[a].timed[config[a] as usize].is_empty())
                .expect("total rate positive");
            (ai, inst.automata[ai].timed[config[ai] as usize].len() - 1)
        });

        let firing = inst.automata[ai].timed[config[ai] as usize][fi].clone();
        let jump = resolve_jump(
            inst,
            &config,
            ai,
            &firing,
            &mut SampledDraw(|p| rng.bernoulli(p)),
            max_cascade_depth,
        )?;
        debug_assert_eq!(jump.branches.len(), 1);
        config = jump.branches.into_iter().next().unwrap().1;
        if !visit(now, &config) {
            return Ok(());
        }
    }
}

/// Full trajectory of one replication.
pub fn replication_run(
    inst: &BoundInstance,
    horizon: f64,
    seed: u64,
) -> Result<Trajectory, SimError> {
    let mut points = Vec::new();
    drive(inst, horizon, seed, DEFAULT_CASCADE_DEPTH, |t, config| {
        points.push((t, config.to_vec()));
        true
    })?;
    Ok(Trajectory { points })
}
