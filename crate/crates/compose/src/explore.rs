//! Breadth-first exploration of the tangible global state space.
//!
//! Successor resolution folds vanishing configurations on the fly: every
//! stored state is stable under the guard fixpoint, and every transition is
//! branch-distributed over the cascade outcomes of one timed firing.

use std::collections::HashMap;
use std::collections::VecDeque;

use errml_model::instance::BoundInstance;

use crate::semantics::{resolve_jump, stabilize, ComposeError, FullExpansion};

#[derive(Debug, Clone, Copy)]
pub struct ExploreLimits {
    pub max_states: usize,
    pub max_cascade_depth: u32,
}

impl Default for ExploreLimits {
    fn default() -> Self {
        Self {
            max_states: 1_000_000,
            max_cascade_depth: 32,
        }
    }
}

/// One timed firing out of a tangible state, with its branch distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct RawFiring {
    pub source: u32,
    /// Index of the firing automaton.
    pub automaton: u32,
    /// Trigger name (event or propagation), for reporting.
    pub label: String,
    pub rate: f64,
    /// `(probability, successor)` pairs; probabilities sum to 1.
    pub branches: Vec<(f64, u32)>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExploreStats {
    pub tangible_states: usize,
    pub timed_transitions: usize,
    /// Resolution paths that passed through a vanishing configuration.
    pub vanishing_folded: usize,
}

/// The tangible state graph before rate folding.
#[derive(Debug, Clone)]
pub struct RawGraph {
    pub states: Vec<Box<[u16]>>,
    pub initial: u32,
    pub firings: Vec<RawFiring>,
    pub stats: ExploreStats,
}

impl RawGraph {
    pub fn state(&self, id: u32) -> &[u16] {
        &self.states[id as usize]
    }
}

pub fn explore(inst: &BoundInstance, limits: &ExploreLimits) -> Result<RawGraph, ComposeError> {
    let mut states: Vec<Box<[u16]>> = Vec::new();
    let mut index: HashMap<Box<[u16]>, u32> = HashMap::new();
    let mut firings: Vec<RawFiring> = Vec::new();
    let mut vanishing_folded = 0usize;

    let initial_jump = stabilize(
        inst,
        &inst.initial_config(),
        &mut FullExpansion,
        limits.max_cascade_depth,
    )?;
    if initial_jump.branches.len() != 1 {
        return Err(ComposeError::InitialIndeterminate);
    }
    vanishing_folded += initial_jump.folded_vanishing as usize;
    let initial_config = initial_jump.branches.into_iter().next().unwrap().1;

    let intern = |config: Vec<u16>,
                  states: &mut Vec<Box<[u16]>>,
                  index: &mut HashMap<Box<[u16]>, u32>,
                  queue: &mut VecDeque<u32>|
     -> Result<u32, ComposeError> {
        let key: Box<[u16]> = config.into_boxed_slice();
        if let Some(&id) = index.get(&key) {
            return Ok(id);
        }
        if states.len() >= limits.max_states {
            return Err(ComposeError::StateLimitExceeded {
                limit: limits.max_states,
            });
        }
        let id = states.len() as u32;
        states.push(key.clone());
        index.insert(key, id);
        queue.push_back(id);
        Ok(id)
    };

    let mut queue: VecDeque<u32> = VecDeque::new();
    let initial = intern(initial_config, &mut states, &mut index, &mut queue)?;

    while let Some(source) = queue.pop_front() {
        let config: Vec<u16> = states[source as usize].to_vec();
        for (ai, automaton) in inst.automata.iter().enumerate() {
            let local = config[ai] as usize;
            for firing in &automaton.timed[local] {
                let jump = resolve_jump(
                    inst,
                    &config,
                    ai,
                    firing,
                    &mut FullExpansion,
                    limits.max_cascade_depth,
                )?;
                vanishing_folded += jump.folded_vanishing as usize;
                let mut branches = Vec::with_capacity(jump.branches.len());
                for (probability, successor) in jump.branches {
                    let id = intern(successor, &mut states, &mut index, &mut queue)?;
                    branches.push((probability, id));
                }
                firings.push(RawFiring {
                    source,
                    automaton: ai as u32,
                    label: firing.label.clone(),
                    rate: firing.rate,
                    branches,
                });
            }
        }
    }

    let stats = ExploreStats {
        tangible_states: states.len(),
        timed_transitions: firings.len(),
        vanishing_folded,
    };
    Ok(RawGraph {
        states,
        initial,
        firings,
        stats,
    })
}
