//! The labeled continuous-time Markov chain produced from a raw state graph:
//! branch distributions folded into plain rate transitions (rate times branch
//! probability, parallel edges summed, self-loops dropped) and states labeled
//! with the derived classes that hold in them.

use errml_model::instance::BoundInstance;

use crate::explore::{ExploreStats, RawGraph};
use crate::semantics::ComposeError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateTransition {
    pub source: u32,
    pub target: u32,
    pub rate: f64,
}

/// A labeled CTMC. States are indexed densely; `labels` is a class bitmask
/// per state over `classes`. Chains composed from an instance carry the
/// global-state tuples in `state_keys` and a rendered display name per state;
/// chains read back from the explicit-state format have empty keys.
#[derive(Debug, Clone, PartialEq)]
pub struct Ctmc {
    pub n_states: usize,
    pub initial: u32,
    pub transitions: Vec<RateTransition>,
    pub classes: Vec<String>,
    pub labels: Vec<u64>,
    pub state_keys: Vec<Box<[u16]>>,
    pub state_display: Vec<String>,
    pub fold_stats: ExploreStats,
}

impl Ctmc {
    pub fn class_id(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == name)
    }

    pub fn has_class(&self, state: usize, class: usize) -> bool {
        self.labels[state] & (1u64 << class) != 0
    }

    /// States carrying no class at all (implicitly operational).
    pub fn unlabeled_states(&self) -> impl Iterator<Item = usize> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &m)| m == 0)
            .map(|(i, _)| i)
    }

    /// Total exit rate per state.
    pub fn outflow(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_states];
        for t in &self.transitions {
            out[t.source as usize] += t.rate;
        }
        out
    }

    pub fn display_state(&self, state: usize) -> &str {
        &self.state_display[state]
    }
}

/// Fold a raw branch-distributed graph into a rate-transition chain and label
/// its states against the instance's derived classes.
pub fn fold_raw_graph(raw: &RawGraph, inst: &BoundInstance) -> Result<Ctmc, ComposeError> {
    if inst.class_names.len() > 64 {
        return Err(ComposeError::TooManyClasses(inst.class_names.len()));
    }
    let n_states = raw.states.len();

    // rate * branch probability, merged over parallel edges, self-loops dropped
    let mut transitions: Vec<RateTransition> = Vec::new();
    let mut merge: std::collections::HashMap<(u32, u32), usize> = std::collections::HashMap::new();
    for firing in &raw.firings {
        for &(probability, target) in &firing.branches {
            if target == firing.source || probability == 0.0 {
                continue;
            }
            let rate = firing.rate * probability;
            match merge.entry((firing.source, target)) {
                std::collections::hash_map::Entry::Occupied(e) => {
                    transitions[*e.get()].rate += rate;
                }
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(transitions.len());
                    transitions.push(RateTransition {
                        source: firing.source,
                        target,
                        rate,
                    });
                }
            }
        }
    }

    let mut labels = Vec::with_capacity(n_states);
    let mut state_display = Vec::with_capacity(n_states);
    for key in &raw.states {
        let mut mask = 0u64;
        for class in inst.classes_of(key) {
            mask |= 1u64 << class;
        }
        labels.push(mask);
        state_display.push(inst.display_config(key));
    }

    Ok(Ctmc {
        n_states,
        initial: raw.initial,
        transitions,
        classes: inst.class_names.clone(),
        labels,
        state_keys: raw.states.clone(),
        state_display,
        fold_stats: raw.stats,
    })
}

/// Explore and fold in one step.
pub fn compose(
    inst: &BoundInstance,
    limits: &crate::explore::ExploreLimits,
) -> Result<Ctmc, ComposeError> {
    let raw = crate::explore::explore(inst, limits)?;
    fold_raw_graph(&raw, inst)
}
