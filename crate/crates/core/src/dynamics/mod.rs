// Copyright 2026 The slhforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Time evolution of SLH networks driven by vacuum input.
//!
//! The state picture is used throughout: a density matrix evolves under
//!
//! ```text
//! dρ/dt = −i[H, ρ] + Σ_i ( L_i ρ L_i† − ½{L_i† L_i, ρ} )
//! ```
//!
//! which is the dual of the Heisenberg-picture generator
//! `𝓛(X) = ½Σ L_i†[X, L_i] + ½Σ [L_i†, X] L_i − i[X, H]` under
//! `tr(ρ̇ X) = tr(ρ 𝓛(X))`. Averaging the quantum stochastic evolution over
//! the vacuum input kills every term driven by the input noise, leaving this
//! Lindblad form. Signals enter only through the c-number parts of `L` and
//! through `H`; nothing here special-cases them.
//!
//! Integration is fixed-step classical Runge-Kutta. Trace and norm are never
//! renormalized; drift is reported and aborts a run past its threshold.

mod generator;
mod integrate;
mod oracle;
mod state;

use thiserror::Error;

use crate::operator::OperatorError;
use crate::poly::PolyError;
use crate::signal::SignalError;
use crate::slh::SlhError;

pub use generator::{
    lindblad_rhs, CascadeGenerator, Generator, HamiltonianGenerator, HeisenbergGenerator,
    TripleGenerator,
};
pub use integrate::{
    integrate_generator, integrate_generator_observed, integrate_master, integrate_schrodinger,
    integrate_schrodinger_observed, Observer, output_expectation, Diagnostics,
    Record, SimOptions, SimulationResult, TimeGrid,
};
pub use oracle::{analytic_driven_cavity, driven_oscillator_amplitude, ORACLE_TOL};
pub use state::{coherent_fidelity, coherent_state, expectation, purity, trace_distance, QuantumState};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("space mismatch: {0} vs {1}")]
    SpaceMismatch(String, String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("trace drift {drift:.3e} exceeds {limit:.1e} at t = {t}")]
    TraceDrift { t: f64, drift: f64, limit: f64 },
    #[error("norm drift {drift:.3e} exceeds {limit:.1e} at t = {t}")]
    NormDrift { t: f64, drift: f64, limit: f64 },
    #[error("truncation leak {leak:.3e} exceeds {limit:.1e} at t = {t}")]
    Leak { t: f64, leak: f64, limit: f64 },
    #[error("state lost positivity at t = {t} (min eigenvalue {min:.3e})")]
    Positivity { t: f64, min: f64 },
    #[error("time {0} is not on the simulation grid")]
    OutsideGrid(f64),
    #[error("quadrature did not converge (error estimate {0:.3e})")]
    Quadrature(f64),
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Slh(#[from] SlhError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}
