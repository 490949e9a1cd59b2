//! Operational semantics of one stochastic jump: a timed firing followed by
//! the immediate phase — fixed-occurrence emissions evaluated at state entry,
//! propagation deliveries cascading breadth-first along the routing table,
//! and guard reactions applied to a fixpoint.
//!
//! The resolver is shared between exhaustive exploration (every Bernoulli
//! evaluation forks a weighted branch) and simulation (each evaluation is a
//! single sampled draw), so both see exactly the same deterministic ordering.

use std::collections::VecDeque;

use errml_model::instance::{BoundGuardAtom, BoundInstance, TimedFiring};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ComposeError {
    #[error("state limit exceeded ({limit} states); the model may be unexpectedly large")]
    StateLimitExceeded { limit: usize },
    #[error("cascade depth exceeded ({limit}); propagations appear to cycle between components")]
    CascadeDepthExceeded { limit: u32 },
    #[error(
        "guard fixpoint did not stabilize within {limit} reactions; guards appear to livelock"
    )]
    GuardLivelock { limit: u32 },
    #[error(
        "initial configuration resolves to several states; a chain needs a unique initial state"
    )]
    InitialIndeterminate,
    #[error("a composed chain supports at most 64 state classes, got {0}")]
    TooManyClasses(usize),
}

/// Weighted outcomes of one fixed-occurrence evaluation.
#[derive(Debug, Clone, Copy)]
pub struct Outcomes {
    pub first: (f64, bool),
    pub second: Option<(f64, bool)>,
}

/// Supplies outcomes for fixed-occurrence evaluations.
pub trait BernoulliBranches {
    fn outcomes(&mut self, probability: f64) -> Outcomes;
}

/// Exhaustive expansion: both outcomes, weighted; degenerate probabilities
/// collapse to a single branch.
pub struct FullExpansion;

impl BernoulliBranches for FullExpansion {
    fn outcomes(&mut self, probability: f64) -> Outcomes {
        if probability >= 1.0 {
            Outcomes {
                first: (1.0, true),
                second: None,
            }
        } else if probability <= 0.0 {
            Outcomes {
                first: (1.0, false),
                second: None,
            }
        } else {
            // the silent branch first: cascade-free successors come first
            Outcomes {
                first: (1.0 - probability, false),
                second: Some((probability, true)),
            }
        }
    }
}

/// Sampling: a single outcome drawn by the caller-provided decision function.
pub struct SampledDraw<F: FnMut(f64) -> bool>(pub F);

impl<F: FnMut(f64) -> bool> BernoulliBranches for SampledDraw<F> {
    fn outcomes(&mut self, probability: f64) -> Outcomes {
        Outcomes {
            first: (1.0, (self.0)(probability)),
            second: None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Action {
    /// Evaluate entry emission `idx` of `state` on `comp`.
    Eval {
        comp: u32,
        state: u16,
        idx: u16,
        depth: u32,
    },
    /// Deliver `prop` to `receiver`.
    Deliver {
        receiver: u32,
        prop: u32,
        depth: u32,
    },
}

#[derive(Debug, Clone)]
struct Branch {
    weight: f64,
    config: Vec<u16>,
    queue: VecDeque<Action>,
    guard_reactions: u32,
    vanished: bool,
}

/// Successor distribution of one jump.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedJump {
    /// Distinct successor configurations with their probabilities, in
    /// deterministic first-encounter order. Probabilities sum to 1.
    pub branches: Vec<(f64, Vec<u16>)>,
    /// Number of resolution paths that passed through a guard reaction
    /// (i.e. through a vanishing configuration).
    pub folded_vanishing: u32,
}

/// Resolve the jump caused by `firing` on `automaton` from configuration
/// `from`.
pub fn resolve_jump(
    inst: &BoundInstance,
    from: &[u16],
    automaton: usize,
    firing: &TimedFiring,
    chooser: &mut impl BernoulliBranches,
    max_depth: u32,
) -> Result<ResolvedJump, ComposeError> {
    let mut start = Branch {
        weight: 1.0,
        config: from.to_vec(),
        queue: VecDeque::new(),
        guard_reactions: 0,
        vanished: false,
    };
    // a Poisson-occurrence out propagation emits as part of its own firing
    if let Some(prop) = firing.emits {
        for &r in inst.receivers(automaton, prop) {
            start.queue.push_back(Action::Deliver {
                receiver: r,
                prop,
                depth: 1,
            });
        }
    }
    enter_state(
        inst,
        &mut start,
        automaton as u32,
        firing.destination,
        0,
        max_depth,
    )?;
    run_to_fixpoint(inst, start, chooser, max_depth)
}

/// Stabilize a configuration through the guard fixpoint alone (no timed
/// firing). Used for the initial state.
pub fn stabilize(
    inst: &BoundInstance,
    config: &[u16],
    chooser: &mut impl BernoulliBranches,
    max_depth: u32,
) -> Result<ResolvedJump, ComposeError> {
    let start = Branch {
        weight: 1.0,
        config: config.to_vec(),
        queue: VecDeque::new(),
        guard_reactions: 0,
        vanished: false,
    };
    run_to_fixpoint(inst, start, chooser, max_depth)
}

fn enter_state(
    inst: &BoundInstance,
    branch: &mut Branch,
    comp: u32,
    state: u16,
    depth: u32,
    max_depth: u32,
) -> Result<(), ComposeError> {
    if depth > max_depth {
        return Err(ComposeError::CascadeDepthExceeded { limit: max_depth });
    }
    branch.config[comp as usize] = state;
    let emissions = &inst.automata[comp as usize].entry[state as usize];
    for idx in 0..emissions.len() {
        branch.queue.push_back(Action::Eval {
            comp,
            state,
            idx: idx as u16,
            depth,
        });
    }
    Ok(())
}

fn run_to_fixpoint(
    inst: &BoundInstance,
    start: Branch,
    chooser: &mut impl BernoulliBranches,
    max_depth: u32,
) -> Result<ResolvedJump, ComposeError> {
    let mut pending = vec![start];
    let mut terminal: Vec<(f64, Vec<u16>, bool)> = Vec::new();

    while let Some(mut branch) = pending.pop() {
        // immediate cascade phase
        let mut settled = true;
        while let Some(action) = branch.queue.pop_front() {
            match action {
                Action::Eval {
                    comp,
                    state,
                    idx,
                    depth,
                } => {
                    if branch.config[comp as usize] != state {
                        continue; // the component has moved on; evaluation is stale
                    }
                    let em =
                        inst.automata[comp as usize].entry[state as usize][idx as usize].clone();
                    let outcomes = chooser.outcomes(em.probability);
                    let fork = |branch: &Branch,
                                weight: f64,
                                emit: bool|
                     -> Result<Branch, ComposeError> {
                        let mut next = branch.clone();
                        next.weight *= weight;
                        if emit {
                            for &r in inst.receivers(comp as usize, em.prop) {
                                if depth + 1 > max_depth {
                                    return Err(ComposeError::CascadeDepthExceeded {
                                        limit: max_depth,
                                    });
                                }
                                next.queue.push_back(Action::Deliver {
                                    receiver: r,
                                    prop: em.prop,
                                    depth: depth + 1,
                                });
                            }
                            if em.destination != state {
                                enter_state(
                                    inst,
                                    &mut next,
                                    comp,
                                    em.destination,
                                    depth + 1,
                                    max_depth,
                                )?;
                            }
                        }
                        Ok(next)
                    };
                    match outcomes.second {
                        None => {
                            let next = fork(&branch, outcomes.first.0, outcomes.first.1)?;
                            branch = next;
                        }
                        Some((w2, e2)) => {
                            let second = fork(&branch, w2, e2)?;
                            let first = fork(&branch, outcomes.first.0, outcomes.first.1)?;
                            // process the first outcome now, queue the second
                            pending.push(second);
                            branch = first;
                        }
                    }
                }
                Action::Deliver {
                    receiver,
                    prop,
                    depth,
                } => {
                    let automaton = &inst.automata[receiver as usize];
                    let current = branch.config[receiver as usize];
                    if let Some(dest) = automaton.reception(current, prop) {
                        enter_state(inst, &mut branch, receiver, dest, depth, max_depth)?;
                    }
                    // no matching transition: the propagation is masked
                }
            }
        }

        // guard phase: deliver the first reactive guard emission, then return
        // to the cascade phase; repeat until a full scan reacts nowhere
        'guards: for guard in &inst.guards {
            for clause in &guard.clauses {
                let holds = clause.condition.eval(&|atom: &BoundGuardAtom| {
                    atom.observable[branch.config[atom.automaton as usize] as usize]
                });
                if !holds {
                    continue;
                }
                // first satisfied clause is the guard's emission
                let reactive = clause.receivers.iter().any(|&r| {
                    inst.automata[r as usize]
                        .reception(branch.config[r as usize], clause.emit)
                        .is_some()
                });
                if reactive {
                    branch.guard_reactions += 1;
                    branch.vanished = true;
                    if branch.guard_reactions > max_depth {
                        return Err(ComposeError::GuardLivelock { limit: max_depth });
                    }
                    for &r in &clause.receivers {
                        branch.queue.push_back(Action::Deliver {
                            receiver: r,
                            prop: clause.emit,
                            depth: 0,
                        });
                    }
                    settled = false;
                    break 'guards;
                }
                break; // satisfied but masked: this guard emits nothing further
            }
        }

        if settled {
            terminal.push((branch.weight, branch.config, branch.vanished));
        } else {
            pending.push(branch);
        }
    }

    // merge duplicate successors, first-encounter order; the work list is a
    // stack, so restore deterministic order by tracking insertion sequence
    let mut branches: Vec<(f64, Vec<u16>)> = Vec::new();
    let mut folded = 0u32;
    for (weight, config, vanished) in terminal {
        if vanished {
            folded += 1;
        }
        match branches.iter_mut().find(|(_, c)| *c == config) {
            Some((w, _)) => *w += weight,
            None => branches.push((weight, config)),
        }
    }
    debug_assert!(
        (branches.iter().map(|(w, _)| w).sum::<f64>() - 1.0).abs() < 1e-9,
        "branch weights must sum to 1"
    );
    Ok(ResolvedJump {
        branches,
        folded_vanishing: folded,
    })
}
