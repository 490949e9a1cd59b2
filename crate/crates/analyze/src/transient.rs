//! Transient distributions by uniformization.
//!
//! The distribution at time t is the Poisson-weighted sum of powers of the
//! uniformized probability matrix P = I + Q/L, with L at least the largest
//! exit rate. The series is truncated when the accumulated Poisson mass
//! reaches 1 minus the configured tail bound. To keep e^{-Lt} well inside
//! f64 range, horizons with L*t > 500 are split into equal steps of at most
//! 500, each step receiving an equal share of the tail budget (the total
//! discarded mass is still bounded by the configured value).

use errml_compose::Ctmc;

use crate::error::AnalyzeError;
use crate::steady::kahan_sum;
use crate::SolverConfig;

#[derive(Debug, Clone)]
pub struct Transient {
    pub distribution: Vec<f64>,
    /// Total number of series terms across all steps.
    pub terms: u64,
    pub steps: u32,
    /// Total Poisson mass discarded by truncation.
    pub discarded: f64,
}

const MAX_STEP_MASS: f64 = 500.0;

/// Propagate `initial` over the chain for `t` hours.
pub fn transient_from(
    ctmc: &Ctmc,
    initial: &[f64],
    t: f64,
    cfg: &SolverConfig,
) -> Result<Transient, AnalyzeError> {
    if !t.is_finite() || t < 0.0 {
        return Err(AnalyzeError::InvalidTime(t));
    }
    let n = ctmc.n_states;
    assert_eq!(initial.len(), n, "initial distribution size");

    let outflow = ctmc.outflow();
    let rate = outflow.iter().cloned().fold(0.0f64, f64::max);
    if t == 0.0 || rate == 0.0 {
        return Ok(Transient {
            distribution: initial.to_vec(),
            terms: 0,
            steps: 0,
            discarded: 0.0,
        });
    }

    let steps = ((rate * t) / MAX_STEP_MASS).ceil().max(1.0) as u32;
    let tau = t / steps as f64;
    let q = rate * tau;
    let budget = cfg.uniformization_tail / steps as f64;

    // edges grouped by source for the v -> vP product
    let edges: Vec<(usize, usize, f64)> = ctmc
        .transitions
        .iter()
        .map(|tr| (tr.source as usize, tr.target as usize, tr.rate))
        .collect();
    let multiply = |v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0f64; n];
        for j in 0..n {
            out[j] = v[j] * (1.0 - outflow[j] / rate);
        }
        for &(i, j, r) in &edges {
            out[j] += v[i] * r / rate;
        }
        out
    };

    let mut v = initial.to_vec();
    let mut terms = 0u64;
    let mut discarded_total = 0.0f64;
    for _ in 0..steps {
        let mut weight = (-q).exp();
        let mut cumulative = weight;
        let mut acc: Vec<f64> = v.iter().map(|x| x * weight).collect();
        let mut vk = v.clone();
        let mut k = 0u64;
        while 1.0 - cumulative > budget {
            k += 1;
            if k > 10_000_000 {
                return Err(AnalyzeError::NoConvergence {
                    iterations: k,
                    residual: 1.0 - cumulative,
                });
            }
            vk = multiply(&vk);
            weight *= q / k as f64;
            for (a, b) in acc.iter_mut().zip(&vk) {
                *a += weight * b;
            }
            cumulative += weight;
        }
        discarded_total += 1.0 - cumulative;
        terms += k;
        v = acc;
    }

    Ok(Transient {
        distribution: v,
        terms,
        steps,
        discarded: discarded_total,
    })
}

/// Transient distribution from the chain's initial state.
pub fn transient(ctmc: &Ctmc, t: f64, cfg: &SolverConfig) -> Result<Transient, AnalyzeError> {
    let mut initial = vec![0.0; ctmc.n_states];
    initial[ctmc.initial as usize] = 1.0;
    transient_from(ctmc, &initial, t, cfg)
}

/// Mass-conservation check value: 1 - sum of the distribution.
pub fn mass_defect(distribution: &[f64]) -> f64 {
    1.0 - kahan_sum(distribution)
}
