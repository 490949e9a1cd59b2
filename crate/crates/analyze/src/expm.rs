//! Dense matrix exponential by scaling and squaring with a Taylor series,
//! used as an independent reference for the uniformization solver. Limited
//! to 64 states; tests only.

use errml_compose::Ctmc;

use crate::error::AnalyzeError;

pub const DENSE_LIMIT: usize = 64;

/// Dense generator of a chain (row sums zero).
pub fn dense_generator(ctmc: &Ctmc) -> Result<Vec<Vec<f64>>, AnalyzeError> {
    let n = ctmc.n_states;
    if n > DENSE_LIMIT {
        return Err(AnalyzeError::SizeLimit {
            size: n,
            max: DENSE_LIMIT,
        });
    }
    let mut q = vec![vec![0.0f64; n]; n];
    for t in &ctmc.transitions {
        q[t.source as usize][t.target as usize] += t.rate;
        q[t.source as usize][t.source as usize] -= t.rate;
    }
    Ok(q)
}

fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut c = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

fn max_abs(a: &[Vec<f64>]) -> f64 {
    a.iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
}

/// `e^{Q t}` by scaling-and-squaring: Q t is halved until its infinity norm
/// is at most 1/2, the Taylor series is summed until terms vanish below
/// 1e-19 of the running result, and the result is squared back up.
pub fn dense_expm(generator: &[Vec<f64>], t: f64) -> Result<Vec<Vec<f64>>, AnalyzeError> {
    let n = generator.len();
    if n > DENSE_LIMIT {
        return Err(AnalyzeError::SizeLimit {
            size: n,
            max: DENSE_LIMIT,
        });
    }
    if !t.is_finite() || t < 0.0 {
        return Err(AnalyzeError::InvalidTime(t));
    }
    let mut a = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = generator[i][j] * t;
        }
    }
    let norm: f64 = a
        .iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scale = 2f64.powi(squarings as i32);
    for row in a.iter_mut() {
        for v in row.iter_mut() {
            *v /= scale;
        }
    }

    // Taylor with explicit term-size stopping rule
    let mut result = identity(n);
    let mut term = identity(n);
    for k in 1..=60u32 {
        term = mat_mul(&term, &a);
        let inv_k = 1.0 / k as f64;
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v *= inv_k;
            }
        }
        for i in 0..n {
            for j in 0..n {
                result[i][j] += term[i][j];
            }
        }
        if max_abs(&term) < 1e-19 * max_abs(&result).max(1.0) {
            break;
        }
    }

    for _ in 0..squarings {
        result = mat_mul(&result, &result);
    }
    Ok(result)
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0f64; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

/// Row vector times matrix.
pub fn vec_mat(v: &[f64], m: &[Vec<f64>]) -> Vec<f64> {
    let n = v.len();
    let mut out = vec![0.0f64; n];
    for i in 0..n {
        let vi = v[i];
        if vi == 0.0 {
            continue;
        }
        for j in 0..n {
            out[j] += vi * m[i][j];
        }
    }
    out
}
