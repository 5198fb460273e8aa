// Copyright 2026 The slhforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Reference computations written without the library's dynamics module.

use ndarray::Array2;
use num_complex::Complex64 as C;

pub type M = Array2<C>;

fn dag(m: &M) -> M {
    m.t().mapv(|z| z.conj())
}

fn comm(a: &M, b: &M) -> M {
    a.dot(b) - b.dot(a)
}

/// Heisenberg-picture generator with vacuum input:
/// `½ Σ L†[X, L] + ½ Σ [L†, X] L − i[X, H]`.
pub fn heisenberg_lindbladian(x: &M, h: &M, l: &[M]) -> M {
    let half = C::new(0.5, 0.0);
    let mut out = comm(x, h).mapv(|z| z * C::new(0.0, -1.0));
    for lk in l {
        let ld = dag(lk);
        out = out + ld.dot(&comm(x, lk)).mapv(|z| z * half) + comm(&ld, x).dot(lk).mapv(|z| z * half);
    }
    out
}

pub fn trace_product(a: &M, b: &M) -> C {
    a.dot(b).diag().sum()
}

/// Scalar amplitude `ȧ = −iω0·a − g·u(t)` from `a(0) = 0`, integrated with
/// classical RK4 on a fine uniform grid; returns every grid point.
pub fn driven_amplitude(omega0: f64, g: f64, u: &dyn Fn(f64) -> C, horizon: f64, h: f64) -> Vec<(f64, C)> {
    let n = (horizon / h).round() as usize;
    let f = |t: f64, a: C| C::new(0.0, -omega0) * a - u(t) * g;
    let mut a = C::new(0.0, 0.0);
    let mut out = vec![(0.0, a)];
    for k in 0..n {
        let t = k as f64 * h;
        let k1 = f(t, a);
        let k2 = f(t + h / 2.0, a + k1 * (h / 2.0));
        let k3 = f(t + h / 2.0, a + k2 * (h / 2.0));
        let k4 = f(t + h, a + k3 * h);
        a += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        out.push(((k + 1) as f64 * h, a));
    }
    out
}
