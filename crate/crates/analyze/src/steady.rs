//! Stationary distribution by Gauss-Seidel sweeps over the balance
//! equations, with per-sweep normalization.
//!
//! Convergence criterion: the residual `max_j |sum_i pi_i q_ij|` must fall
//! below the configured tolerance. The chain must be a single closed
//! communicating class; chains with several recurrent classes or with
//! transient states are rejected.

use errml_compose::Ctmc;

use crate::error::AnalyzeError;
use crate::SolverConfig;

#[derive(Debug, Clone)]
pub struct SteadyState {
    pub distribution: Vec<f64>,
    pub residual: f64,
    pub iterations: u64,
}

/// Strongly connected components, iterative Tarjan. Returns the component id
/// of each state and the component count.
fn tarjan_scc(n: usize, adjacency: &[Vec<usize>]) -> (Vec<usize>, usize) {
    const UNVISITED: usize = usize::MAX;
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut component = vec![UNVISITED; n];
    let mut components = 0usize;
    let mut counter = 0usize;

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        // explicit DFS: (node, next child position)
        let mut work: Vec<(usize, usize)> = vec![(root, 0)];
        while let Some(&mut (v, ref mut child)) = work.last_mut() {
            if *child == 0 {
                index[v] = counter;
                low[v] = counter;
                counter += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if *child < adjacency[v].len() {
                let w = adjacency[v][*child];
                *child += 1;
                if index[w] == UNVISITED {
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                work.pop();
                if let Some(&mut (parent, _)) = work.last_mut() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        component[w] = components;
                        if w == v {
                            break;
                        }
                    }
                    components += 1;
                }
            }
        }
    }
    (component, components)
}

/// Reject chains that are not one closed communicating class, with a message
/// distinguishing several recurrent classes from mere transient states.
fn require_irreducible(ctmc: &Ctmc) -> Result<(), AnalyzeError> {
    let n = ctmc.n_states;
    let mut adjacency = vec![Vec::new(); n];
    for t in &ctmc.transitions {
        adjacency[t.source as usize].push(t.target as usize);
    }
    let (component, components) = tarjan_scc(n, &adjacency);
    if components <= 1 {
        return Ok(());
    }
    // bottom components (no edge leaving them) are the recurrent classes
    let mut has_exit = vec![false; components];
    for t in &ctmc.transitions {
        let (a, b) = (component[t.source as usize], component[t.target as usize]);
        if a != b {
            has_exit[a] = true;
        }
    }
    let recurrent: Vec<usize> = (0..components).filter(|&c| !has_exit[c]).collect();
    let transient_states = component.iter().filter(|&&c| has_exit[c]).count();
    Err(AnalyzeError::NotIrreducible {
        recurrent_classes: recurrent.len(),
        transient_states,
    })
}

pub fn steady_state(ctmc: &Ctmc, cfg: &SolverConfig) -> Result<SteadyState, AnalyzeError> {
    let n = ctmc.n_states;
    if n == 1 {
        return Ok(SteadyState {
            distribution: vec![1.0],
            residual: 0.0,
            iterations: 0,
        });
    }
    require_irreducible(ctmc)?;

    // column access: incoming (source, rate) per state, and total outflow
    let mut incoming: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut outflow = vec![0.0f64; n];
    for t in &ctmc.transitions {
        incoming[t.target as usize].push((t.source as usize, t.rate));
        outflow[t.source as usize] += t.rate;
    }

    let residual_of = |pi: &[f64]| -> f64 {
        let mut worst = 0.0f64;
        for j in 0..n {
            let inflow: f64 = incoming[j].iter().map(|&(i, r)| pi[i] * r).sum();
            worst = worst.max((inflow - pi[j] * outflow[j]).abs());
        }
        worst
    };

    let mut pi = vec![1.0 / n as f64; n];
    let mut iterations = 0u64;
    loop {
        for j in 0..n {
            let inflow: f64 = incoming[j].iter().map(|&(i, r)| pi[i] * r).sum();
            pi[j] = inflow / outflow[j];
        }
        let total: f64 = kahan_sum(&pi);
        for x in pi.iter_mut() {
            *x /= total;
        }
        iterations += 1;
        let residual = residual_of(&pi);
        if residual <= cfg.tolerance {
            return Ok(SteadyState {
                distribution: pi,
                residual,
                iterations,
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

/// Compensated summation; keeps normalization exact to the last bit even if
/// sweeps run in a different order.
pub fn kahan_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for &v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}
