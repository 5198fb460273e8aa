// Copyright 2026 The slhforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Seeded random spaces, operators, signals and triples.

use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64 as C;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use slhforge::{HilbertSpace, Monomial, OpPolynomial, Signal, SignalDef, SignalSet, SlhTriple};

pub type M = Array2<C>;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn space(r: &mut StdRng, dims: std::ops::RangeInclusive<usize>) -> Arc<HilbertSpace> {
    HilbertSpace::generic("q", r.gen_range(dims))
}

pub fn complex(r: &mut StdRng) -> C {
    C::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
}

pub fn matrix(r: &mut StdRng, d: usize) -> M {
    Array2::from_shape_fn((d, d), |_| complex(r))
}

pub fn dagger(m: &M) -> M {
    m.t().mapv(|z| z.conj())
}

pub fn hermitian(r: &mut StdRng, d: usize) -> M {
    let m = matrix(r, d);
    (&m + &dagger(&m)).mapv(|z| z * 0.5)
}

/// Unitary from Gram-Schmidt on the columns of a random matrix.
pub fn unitary(r: &mut StdRng, n: usize) -> M {
    let mut q = matrix(r, n);
    for j in 0..n {
        for k in 0..j {
            let proj: C = (0..n).map(|i| q[[i, k]].conj() * q[[i, j]]).sum();
            for i in 0..n {
                let v = q[[i, k]];
                q[[i, j]] -= proj * v;
            }
        }
        let norm = (0..n).map(|i| q[[i, j]].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..n {
            q[[i, j]] /= norm;
        }
    }
    q
}

/// Random density matrix of full rank.
pub fn density(r: &mut StdRng, d: usize) -> M {
    let a = matrix(r, d);
    let rho = a.dot(&dagger(&a));
    let tr = rho.diag().sum();
    rho.mapv(|z| z / tr)
}

/// Smooth signal `name`: a Gaussian pulse or a complex exponential.
pub fn signal(r: &mut StdRng, name: &str) -> Signal {
    let def = if r.gen_bool(0.5) {
        SignalDef::GaussianPulse {
            amplitude: complex(r),
            center: r.gen_range(0.0..1.0),
            width: r.gen_range(0.2..1.0),
        }
    } else {
        SignalDef::ComplexExponential {
            amplitude: complex(r),
            frequency: r.gen_range(-1.0..1.0),
            phase: r.gen_range(0.0..6.0),
        }
    };
    Signal::new(name, def).unwrap()
}

pub fn bindings(r: &mut StdRng, names: &[&str]) -> SignalSet {
    names.iter().fold(SignalSet::new(), |s, n| s.with(signal(r, n)))
}

/// `M0 + u·M1 + ū·M2` with each signal term present at random.
pub fn poly(r: &mut StdRng, space: &Arc<HilbertSpace>, signals: &[&str]) -> OpPolynomial {
    let d = space.dim();
    let mut p = OpPolynomial::term(space.clone(), Monomial::one(), matrix(r, d));
    for name in signals {
        if r.gen_bool(0.5) {
            p = p.add(&OpPolynomial::term(space.clone(), Monomial::signal(name), matrix(r, d))).unwrap();
        }
        if r.gen_bool(0.3) {
            p = p.add(&OpPolynomial::term(space.clone(), Monomial::conj_signal(name), matrix(r, d))).unwrap();
        }
    }
    p
}

/// Formally self-adjoint `p + p†`.
pub fn self_adjoint(r: &mut StdRng, space: &Arc<HilbertSpace>, signals: &[&str]) -> OpPolynomial {
    let p = poly(r, space, signals);
    p.add(&p.dagger()).unwrap().scale(C::new(0.5, 0.0))
}

pub fn c_number(space: &Arc<HilbertSpace>, z: C) -> OpPolynomial {
    OpPolynomial::scalar(space.clone(), z)
}

/// Triple with a c-number unitary `S`, random `L` and self-adjoint `H`.
pub fn triple(r: &mut StdRng, space: &Arc<HilbertSpace>, n: usize, signals: &[&str]) -> SlhTriple {
    let t = unitary(r, n);
    let s = (0..n)
        .map(|i| (0..n).map(|j| c_number(space, t[[i, j]])).collect())
        .collect();
    let l = (0..n).map(|_| poly(r, space, signals)).collect();
    let h = self_adjoint(r, space, signals);
    SlhTriple::new(space.clone(), s, l, h).unwrap()
}
