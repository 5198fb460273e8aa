// Copyright 2026 The slhforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Composition of open quantum Markov components described by `(S, L, H)`
//! triples.
//!
//! The crate is organised bottom-up:
//!
//! * [`operator`]: Hilbert spaces, dense operators, Fock ladder operators.
//! * [`signal`] and [`poly`]: c-number control signals and operator-valued
//!   polynomials in them, so composed triples stay symbolic in `u(t)`.
//! * [`slh`]: triples, components (HAM, BS, ADD, SYS, CAVITY) and the series
//!   product.
//! * [`netlist`]: the `.slh` text format, its parser and chain reduction.
//! * [`dynamics`]: master-equation and Schrödinger integration, observables
//!   and the driven-oscillator reference solution.
//! * [`cli`]: the `slhforge` command-line front end.

// Limit checks are written `!(x <= limit)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod netlist;
pub mod numfmt;
pub mod operator;
pub mod poly;
pub mod signal;
pub mod slh;

pub use operator::{HilbertSpace, Operator, C64};
pub use poly::{Monomial, OpPolynomial};
pub use signal::{Signal, SignalDef, SignalSet};
pub use slh::SlhTriple;
