//! Mono-exponential decay fitting, `A·exp(-t/τ) + b`, by Poisson-weighted
//! Levenberg–Marquardt least squares.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fits with fewer total counts than this are refused.
pub const MIN_TOTAL_COUNTS: f64 = 25.0;
pub const MAX_ITERATIONS: usize = 100;
pub const PARAM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub tau_ns: f64,
    pub amplitude: f64,
    pub offset: f64,
    pub residual_rms: f64,
    pub converged: bool,
}

/// Fits the tail of `decay` (from its peak onwards) with bin `k` at time
/// `k · time_bin_ps`.
pub fn fit_lifetime(decay: &[f64], time_bin_ps: f64) -> Result<DecayFit> {
    if decay.len() < 4 {
        return Err(Error::param("decay", format!("need at least 4 time bins, got {}", decay.len())));
    }
    if !(time_bin_ps > 0.0) {
        return Err(Error::param("time_bin_ps", "must be positive"));
    }
    let total: f64 = decay.iter().sum();
    if !(total >= MIN_TOTAL_COUNTS) {
        return Err(Error::InsufficientSignal { total, min: MIN_TOTAL_COUNTS });
    }

    let bin_ns = time_bin_ps * 1e-3;
    let peak = decay
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > decay[best] { i } else { best });
    // keep at least 4 points even when the peak sits late in the window
    let start = peak.min(decay.len() - 4);
    let t: Vec<f64> = (start..decay.len()).map(|k| k as f64 * bin_ns).collect();
    let y = &decay[start..];

    // Poisson variance ~ counts; floor at one count for empty bins
    let w: Vec<f64> = y.iter().map(|&v| 1.0 / v.max(1.0)).collect();
    let mut p = initial_guess(&t, y, bin_ns);
    let mut cost = sum_sq(&t, y, &w, &p);
    let mut lambda = 1e-3;
    let mut converged = false;

    for _ in 0..MAX_ITERATIONS {
        let (jtj, jtr) = normal_equations(&t, y, &w, &p);
        let mut stepped = false;
        while lambda < 1e12 {
            let mut a = jtj;
            for i in 0..3 {
                a[i][i] += lambda * jtj[i][i].max(1e-12);
            }
            let Some(delta) = solve3(a, jtr.map(|v| -v)) else {
                lambda *= 10.0;
                continue;
            };
            let cand = [p[0] + delta[0], p[1] + delta[1], p[2] + delta[2]];
            if !(cand[1] > 0.0) || cand.iter().any(|v| !v.is_finite()) {
                lambda *= 10.0;
                continue;
            }
            let cand_cost = sum_sq(&t, y, &w, &cand);
            if cand_cost <= cost {
                let amp_scale = cand[0].abs().max(1e-12);
                let small = (delta[0].abs() / amp_scale) < PARAM_TOLERANCE
                    && (delta[1].abs() / cand[1]) < PARAM_TOLERANCE
                    && (delta[2].abs() / (cand[2].abs() + amp_scale * 1e-3)) < PARAM_TOLERANCE;
                p = cand;
                cost = cand_cost;
                lambda = (lambda * 0.1).max(1e-12);
                stepped = true;
                converged = small;
                break;
            }
            lambda *= 10.0;
        }
        if !stepped {
            // no downhill step exists at any damping: we sit at the minimum
            converged = true;
        }
        if converged {
            break;
        }
    }

    Ok(DecayFit {
        tau_ns: p[1],
        amplitude: p[0],
        offset: p[2],
        residual_rms: (sum_sq(&t, y, &vec![1.0; y.len()], &p) / y.len() as f64).sqrt(),
        converged,
    })
}

/// Background from the late tail, then a weighted log-linear fit of what remains.
fn initial_guess(t: &[f64], y: &[f64], bin_ns: f64) -> [f64; 3] {
    let n = y.len();
    let tail = &y[n - (n / 4).max(1)..];
    let tail_min = tail.iter().copied().fold(f64::INFINITY, f64::min).max(0.0);
    let background = 0.5 * tail_min;

    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&ti, &yi) in t.iter().zip(y) {
        let v = yi - background;
        if v > 0.0 {
            let w = v; // counts-weighted: log of small values is noisy
            let l = v.ln();
            sw += w;
            sx += w * ti;
            sy += w * l;
            sxx += w * ti * ti;
            sxy += w * ti * l;
        }
    }
    let window = t[n - 1] - t[0] + bin_ns;
    let denom = sw * sxx - sx * sx;
    let (slope, intercept) = if sw > 0.0 && denom.abs() > 1e-300 {
        let slope = (sw * sxy - sx * sy) / denom;
        (slope, (sy - slope * sx) / sw)
    } else {
        (-1.0 / window, y[0].max(1.0).ln())
    };
    let tau = if slope < 0.0 { (-1.0 / slope).clamp(0.05 * bin_ns, 50.0 * window) } else { 5.0 * window };
    [intercept.exp(), tau, background]
}

#[inline]
fn model(t: f64, p: &[f64; 3]) -> f64 {
    p[0] * (-t / p[1]).exp() + p[2]
}

fn sum_sq(t: &[f64], y: &[f64], w: &[f64], p: &[f64; 3]) -> f64 {
    t.iter().zip(y).zip(w).map(|((&ti, &yi), &wi)| wi * (model(ti, p) - yi).powi(2)).sum()
}

fn normal_equations(t: &[f64], y: &[f64], w: &[f64], p: &[f64; 3]) -> ([[f64; 3]; 3], [f64; 3]) {
    let mut jtj = [[0.0; 3]; 3];
    let mut jtr = [0.0; 3];
    for ((&ti, &yi), &wi) in t.iter().zip(y).zip(w) {
        let e = (-ti / p[1]).exp();
        let j = [e, p[0] * e * ti / (p[1] * p[1]), 1.0];
        let r = p[0] * e + p[2] - yi;
        for a in 0..3 {
            jtr[a] += wi * j[a] * r;
            for b in 0..3 {
                jtj[a][b] += wi * j[a] * j[b];
            }
        }
    }
    (jtj, jtr)
}

/// Gaussian elimination with partial pivoting.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}
