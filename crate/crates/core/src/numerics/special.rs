//! Special functions: generalized Laguerre, Hermite, sinc and log-factorials.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Largest polynomial degree / associated index accepted by the polynomial routines.
pub const MAX_DEGREE: u32 = 200;

/// Largest associated parameter `a` accepted by [`assoc_laguerre`].
pub const MAX_ASSOC: u32 = 400;

const LN_FACTORIAL_TABLE: usize = 1024;

fn ln_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACTORIAL_TABLE);
        let mut acc = 0.0f64;
        t.push(0.0);
        for k in 1..LN_FACTORIAL_TABLE {
            acc += (k as f64).ln();
            t.push(acc);
        }
        t
    })
}

/// `ln(n!)`, tabulated for `n < 1024`.
pub fn ln_factorial(n: u32) -> f64 {
    let table = ln_factorial_table();
    match table.get(n as usize) {
        Some(v) => *v,
        None => {
            // Stirling series; never hit by the mode orders we allow.
            let x = n as f64 + 1.0;
            (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
                - 1.0 / (360.0 * x * x * x)
        }
    }
}

/// Generalized Laguerre polynomial `L_p^a(x)` by upward three-term recurrence in the degree.
pub fn assoc_laguerre(p: u32, a: u32, x: f64) -> Result<f64> {
    if p > MAX_DEGREE {
        return Err(Error::Domain(format!(
            "Laguerre degree p = {p} exceeds the supported limit {MAX_DEGREE}"
        )));
    }
    if a > MAX_ASSOC {
        return Err(Error::Domain(format!(
            "Laguerre parameter a = {a} exceeds the supported limit {MAX_ASSOC}"
        )));
    }
    if !x.is_finite() {
        return Err(Error::Domain(format!("Laguerre argument must be finite, got {x}")));
    }
    Ok(laguerre_unchecked(p, a, x))
}

/// Recurrence without argument validation; callers guarantee the ranges.
#[inline]
pub(crate) fn laguerre_unchecked(p: u32, a: u32, x: f64) -> f64 {
    let a = a as f64;
    let mut prev = 1.0;
    if p == 0 {
        return prev;
    }
    let mut cur = 1.0 + a - x;
    for k in 1..p {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + a - x) * cur - (k + a) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Physicists' Hermite polynomial `H_n(x)`.
pub fn hermite(n: u32, x: f64) -> Result<f64> {
    if n > MAX_DEGREE {
        return Err(Error::Domain(format!(
            "Hermite degree n = {n} exceeds the supported limit {MAX_DEGREE}"
        )));
    }
    let mut prev = 1.0;
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Orthonormal Hermite function `H_n(x) exp(-x²/2) / sqrt(2ⁿ n! √π)`.
///
/// Evaluated by the normalized recurrence so high orders neither overflow nor
/// lose the Gaussian envelope. `ψ_n(-x) = (-1)ⁿ ψ_n(x)` holds bit-exactly.
#[inline]
pub fn hermite_function(n: u32, x: f64) -> f64 {
    let mut prev = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    if n == 0 {
        return prev;
    }
    let mut cur = std::f64::consts::SQRT_2 * x * prev;
    for k in 1..n {
        let k = k as f64;
        let next = (2.0 / (k + 1.0)).sqrt() * x * cur - (k / (k + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Fills `out[k] = ψ_k(x)` for `k = 0..out.len()`.
pub fn hermite_functions_into(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    if out.len() == 1 {
        return;
    }
    out[1] = std::f64::consts::SQRT_2 * x * out[0];
    for k in 1..out.len() - 1 {
        let kf = k as f64;
        out[k + 1] = (2.0 / (kf + 1.0)).sqrt() * x * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
    }
}

const SINC_SERIES_CUTOFF: f64 = 1e-4;

/// Unnormalized `sin(x)/x`.
#[inline]
pub fn sinc(x: f64) -> f64 {
    if x.abs() < SINC_SERIES_CUTOFF {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `1 - sinc(x)` without cancellation for small arguments.
#[inline]
pub fn one_minus_sinc(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        let x2 = x * x;
        // x²/6 - x⁴/120 + x⁶/5040 - x⁸/362880
        x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
    } else {
        1.0 - x.sin() / x
    }
}
