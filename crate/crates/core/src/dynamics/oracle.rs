// Copyright 2026 The slhforge Authors
// SPDX-License-Identifier: Apache-2.0

use quadrature::double_exponential::integrate;

use crate::operator::C64;

use super::DynamicsError;

/// Absolute tolerance of the quadrature behind the oracles.
pub const ORACLE_TOL: f64 = 1e-10;

const MAX_DEPTH: u32 = 16;
/// Below this, per-piece targets stop shrinking (double rounding noise).
const TOL_FLOOR: f64 = 1e-13;

/// Coherent amplitude reached from vacuum by `ȧ = −iω0·a − g·u(t)`:
/// `α(t) = −g ∫₀ᵗ e^{−iω0(t−s)} u(s) ds`.
pub fn driven_oscillator_amplitude(
    omega0: f64,
    coupling: f64,
    u: &dyn Fn(f64) -> C64,
    t: f64,
) -> Result<C64, DynamicsError> {
    if t == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let f = |s: f64| C64::new(0.0, -omega0 * (t - s)).exp() * u(s);
    let re = adaptive(&|s| f(s).re, 0.0, t, ORACLE_TOL, 0)?;
    let im = adaptive(&|s| f(s).im, 0.0, t, ORACLE_TOL, 0)?;
    Ok(C64::new(re, im) * -coupling)
}

/// Driven cavity with damping `γ`: coupling `√γ/2`.
pub fn analytic_driven_cavity(
    omega0: f64,
    gamma: f64,
    u: &dyn Fn(f64) -> C64,
    t: f64,
) -> Result<C64, DynamicsError> {
    driven_oscillator_amplitude(omega0, gamma.sqrt() / 2.0, u, t)
}

/// Double-exponential quadrature, bisecting when the error estimate misses
/// the target (kinks in sampled signals).
fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> Result<f64, DynamicsError> {
    let out = integrate(f, a, b, tol);
    if out.error_estimate <= tol {
        return Ok(out.integral);
    }
    if depth >= MAX_DEPTH {
        return Err(DynamicsError::Quadrature(out.error_estimate));
    }
    let m = 0.5 * (a + b);
    let half = (tol / 2.0).max(TOL_FLOOR);
    Ok(adaptive(f, a, m, half, depth + 1)? + adaptive(f, m, b, half, depth + 1)?)
}
