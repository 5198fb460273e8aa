// Copyright 2026 The slhforge Authors
// SPDX-License-Identifier: Apache-2.0

use std::sync::Arc;

use crate::operator::{same_space, CMatrix, HilbertSpace, Operator, C64};
use crate::poly::OpPolynomial;
use crate::signal::SignalSet;
use crate::slh::SlhTriple;

use super::generator::{Generator, HamiltonianGenerator, TripleGenerator};
use super::state::{expectation_matrix, leak_of, min_eigenvalue, Repr};
use super::{DynamicsError, QuantumState};

/// Uniform grid `0, h, 2h, …, n·h` with `n·h` equal to the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    step: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, step: f64) -> Result<Self, DynamicsError> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(DynamicsError::InvalidGrid(format!("step must be positive, got {step}")));
        }
        if !(horizon >= 0.0 && horizon.is_finite()) {
            return Err(DynamicsError::InvalidGrid(format!(
                "horizon must be non-negative, got {horizon}"
            )));
        }
        let steps = (horizon / step).round();
        if (steps * step - horizon).abs() > 1e-9 * horizon.max(1.0) {
            return Err(DynamicsError::InvalidGrid(format!(
                "horizon {horizon} is not a whole number of steps of {step}"
            )));
        }
        Ok(Self {
            step,
            steps: steps as usize,
        })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn horizon(&self) -> f64 {
        self.time(self.steps)
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.step
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(|i| self.time(i))
    }

    /// Index of the grid point at `t`, if there is one.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let i = (t / self.step).round();
        if i < 0.0 || i as usize > self.steps {
            return None;
        }
        ((self.time(i as usize) - t).abs() <= 1e-9 * t.abs().max(1.0)).then_some(i as usize)
    }
}

/// Which states to keep in the result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Record {
    /// Only the final state.
    #[default]
    Final,
    /// Every k-th grid point plus the final one.
    Every(usize),
    All,
}

#[derive(Debug, Clone)]
pub struct SimOptions {
    /// Abort when `|tr ρ − 1|` (or `|‖ψ‖² − 1|`) exceeds this.
    pub drift_limit: f64,
    /// Abort when the top-two Fock level population exceeds this; `None`
    /// disables the check.
    pub leak_limit: Option<f64>,
    /// Check positivity every this many steps (0 disables).
    pub positivity_every: usize,
    pub positivity_tol: f64,
    pub record: Record,
    /// Expectations recorded at every grid point.
    pub observables: Vec<(String, Operator)>,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            drift_limit: 1e-6,
            leak_limit: Some(1e-6),
            positivity_every: 100,
            positivity_tol: 1e-8,
            record: Record::Final,
            observables: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub t: f64,
    pub trace_drift: f64,
    pub purity: f64,
    pub leak: f64,
    /// Present at positivity checkpoints of mixed-state runs.
    pub min_eigenvalue: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub grid: TimeGrid,
    pub diagnostics: Vec<Diagnostics>,
    /// One series per requested observable, aligned with the grid.
    pub observables: Vec<(String, Vec<C64>)>,
    pub snapshots: Vec<(f64, QuantumState)>,
}

impl SimulationResult {
    pub fn final_state(&self) -> &QuantumState {
        &self.snapshots.last().expect("final state is always recorded").1
    }

    pub fn state_at(&self, t: f64) -> Result<&QuantumState, DynamicsError> {
        let i = self.grid.index_of(t).ok_or(DynamicsError::OutsideGrid(t))?;
        let ti = self.grid.time(i);
        self.snapshots
            .iter()
            .find(|(s, _)| *s == ti)
            .map(|(_, st)| st)
            .ok_or(DynamicsError::OutsideGrid(t))
    }

    pub fn observable(&self, name: &str) -> Option<&[C64]> {
        self.observables
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn max_trace_drift(&self) -> f64 {
        self.diagnostics.iter().fold(0.0, |m, d| m.max(d.trace_drift))
    }
}

fn check_space(a: &Arc<HilbertSpace>, b: &Arc<HilbertSpace>) -> Result<(), DynamicsError> {
    if !same_space(a, b) {
        return Err(DynamicsError::SpaceMismatch(a.to_string(), b.to_string()));
    }
    Ok(())
}

/// Master equation of `g` with vacuum input.
pub fn integrate_master(
    g: &SlhTriple,
    rho0: &QuantumState,
    grid: TimeGrid,
    bindings: &SignalSet,
    options: &SimOptions,
) -> Result<SimulationResult, DynamicsError> {
    let generator = TripleGenerator::new(g.clone(), bindings.clone());
    integrate_generator(&generator, rho0, grid, options)
}

/// Integrates `dρ/dt = generator(t, ρ)` from `rho0` (converted to a
/// density matrix).
pub fn integrate_generator(
    generator: &dyn Generator,
    rho0: &QuantumState,
    grid: TimeGrid,
    options: &SimOptions,
) -> Result<SimulationResult, DynamicsError> {
    integrate_generator_observed(generator, rho0, grid, options, &mut |_, _| Ok(()))
}

/// Callback invoked with every grid point's time and state.
pub type Observer<'a> = dyn FnMut(f64, &QuantumState) -> Result<(), DynamicsError> + 'a;

/// [`integrate_generator`], calling `observer` at every grid point. A pure
/// initial state is integrated as a density matrix.
pub fn integrate_generator_observed(
    generator: &dyn Generator,
    rho0: &QuantumState,
    grid: TimeGrid,
    options: &SimOptions,
    observer: &mut Observer<'_>,
) -> Result<SimulationResult, DynamicsError> {
    check_space(generator.space(), rho0.space())?;
    run(generator, rho0.density(), false, grid, options, observer)
}

/// Closed evolution `dψ/dt = −iH(t)ψ`.
pub fn integrate_schrodinger(
    h: &OpPolynomial,
    psi0: &QuantumState,
    grid: TimeGrid,
    bindings: &SignalSet,
    options: &SimOptions,
) -> Result<SimulationResult, DynamicsError> {
    integrate_schrodinger_observed(h, psi0, grid, bindings, options, &mut |_, _| Ok(()))
}

pub fn integrate_schrodinger_observed(
    h: &OpPolynomial,
    psi0: &QuantumState,
    grid: TimeGrid,
    bindings: &SignalSet,
    options: &SimOptions,
    observer: &mut Observer<'_>,
) -> Result<SimulationResult, DynamicsError> {
    check_space(h.space(), psi0.space())?;
    if !h.is_formally_self_adjoint() {
        return Err(DynamicsError::Unsupported("Hamiltonian is not self-adjoint".into()));
    }
    let psi = match psi0.repr() {
        Repr::Pure(psi) => psi.clone(),
        Repr::Mixed(_) => {
            return Err(DynamicsError::InvalidState(
                "closed evolution needs a pure initial state".into(),
            ))
        }
    };
    let column = psi.into_shape_with_order((h.space().dim(), 1)).expect("vector reshapes to a column");
    let generator = HamiltonianGenerator::new(h.clone(), bindings.clone());
    run(&generator, column, true, grid, options, observer)
}

fn to_state(space: &Arc<HilbertSpace>, y: &CMatrix, pure: bool) -> QuantumState {
    if pure {
        QuantumState::pure_unchecked(space.clone(), y.column(0).to_owned())
    } else {
        QuantumState::mixed_unchecked(space.clone(), y.clone())
    }
}

fn run(
    generator: &dyn Generator,
    mut y: CMatrix,
    pure: bool,
    grid: TimeGrid,
    options: &SimOptions,
    observer: &mut Observer<'_>,
) -> Result<SimulationResult, DynamicsError> {
    let space = generator.space().clone();
    for (name, op) in &options.observables {
        if !same_space(op.space(), &space) {
            return Err(DynamicsError::SpaceMismatch(
                format!("observable `{name}` on {}", op.space()),
                space.to_string(),
            ));
        }
    }
    let mut result = SimulationResult {
        grid,
        diagnostics: Vec::with_capacity(grid.steps() + 1),
        observables: options
            .observables
            .iter()
            .map(|(n, _)| (n.clone(), Vec::with_capacity(grid.steps() + 1)))
            .collect(),
        snapshots: Vec::new(),
    };
    let h = grid.step();
    for i in 0..=grid.steps() {
        let t = grid.time(i);
        let state = to_state(&space, &y, pure);
        let populations = state.populations();
        let norm: f64 = populations.iter().sum();
        let drift = (norm - 1.0).abs();
        let min_eigenvalue = (!pure
            && options.positivity_every > 0
            && (i % options.positivity_every == 0 || i == grid.steps()))
        .then(|| min_eigenvalue(&y));
        let diag = Diagnostics {
            t,
            trace_drift: drift,
            purity: super::purity(&state),
            leak: leak_of(&space, &populations),
            min_eigenvalue,
        };
        result.diagnostics.push(diag);
        if !(drift <= options.drift_limit) {
            let limit = options.drift_limit;
            return Err(if pure {
                DynamicsError::NormDrift { t, drift, limit }
            } else {
                DynamicsError::TraceDrift { t, drift, limit }
            });
        }
        if let Some(limit) = options.leak_limit {
            if !(diag.leak <= limit) {
                return Err(DynamicsError::Leak { t, leak: diag.leak, limit });
            }
        }
        if let Some(min) = min_eigenvalue {
            if !(min >= -options.positivity_tol) {
                return Err(DynamicsError::Positivity { t, min });
            }
        }
        for ((_, op), (_, series)) in options.observables.iter().zip(result.observables.iter_mut()) {
            series.push(expectation_matrix(op.matrix(), &state));
        }
        observer(t, &state)?;
        let keep = match options.record {
            Record::All => true,
            Record::Every(k) => k > 0 && i % k == 0,
            Record::Final => false,
        } || i == grid.steps();
        if keep {
            result.snapshots.push((t, state));
        }
        if i < grid.steps() {
            y = rk4_step(generator, t, h, &y)?;
        }
    }
    Ok(result)
}

fn rk4_step(g: &dyn Generator, t: f64, h: f64, y: &CMatrix) -> Result<CMatrix, DynamicsError> {
    let k1 = g.rhs(t, y)?;
    let mut probe = y.clone();
    probe.scaled_add(C64::new(h / 2.0, 0.0), &k1);
    let k2 = g.rhs(t + h / 2.0, &probe)?;
    probe.assign(y);
    probe.scaled_add(C64::new(h / 2.0, 0.0), &k2);
    let k3 = g.rhs(t + h / 2.0, &probe)?;
    probe.assign(y);
    probe.scaled_add(C64::new(h, 0.0), &k3);
    let k4 = g.rhs(t + h, &probe)?;
    let mut out = y.clone();
    out.scaled_add(C64::new(h / 6.0, 0.0), &k1);
    out.scaled_add(C64::new(h / 3.0, 0.0), &k2);
    out.scaled_add(C64::new(h / 3.0, 0.0), &k3);
    out.scaled_add(C64::new(h / 6.0, 0.0), &k4);
    Ok(out)
}

/// `⟨L_i(t)⟩` per channel: the mean output field under vacuum input.
pub fn output_expectation(
    g: &SlhTriple,
    result: &SimulationResult,
    t: f64,
    bindings: &SignalSet,
) -> Result<Vec<C64>, DynamicsError> {
    let state = result.state_at(t)?;
    check_space(g.space(), state.space())?;
    g.l()
        .iter()
        .map(|p| Ok(expectation_matrix(&p.evaluate_matrix(t, bindings)?, state)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{annihilator, number, HilbertSpace};
    use crate::slh::SlhTriple;
    use crate::Signal;

    #[test]
    fn grid_rejects_partial_steps() {
        assert!(TimeGrid::new(1.0, 0.3).is_err());
        assert_eq!(TimeGrid::new(1.0, 1e-3).unwrap().steps(), 1000);
        assert_eq!(TimeGrid::new(0.0, 1e-3).unwrap().steps(), 0);
        assert!(TimeGrid::new(1.0, 0.0).is_err());
    }

    #[test]
    fn zero_hamiltonian_is_static() {
        let space = HilbertSpace::fock("c", 3);
        let g = SlhTriple::identity(space.clone(), 1).unwrap();
        let rho0 = crate::dynamics::coherent_state(&space, "c", C64::new(0.1, 0.0)).unwrap();
        let r = integrate_master(&g, &rho0, TimeGrid::new(1.0, 0.1).unwrap(), &SignalSet::new(), &SimOptions {
            leak_limit: None,
            ..SimOptions::default()
        })
        .unwrap();
        assert_eq!(r.final_state().density(), rho0.density());
    }

    #[test]
    fn number_state_phase() {
        let space = HilbertSpace::fock("c", 3);
        let omega = 1.3;
        let h = OpPolynomial::constant(&number(&space, "c").unwrap()).scale(C64::new(omega, 0.0));
        let psi0 = QuantumState::fock(space, 1).unwrap();
        let r = integrate_schrodinger(&h, &psi0, TimeGrid::new(2.0, 1e-3).unwrap(), &SignalSet::new(), &SimOptions::default())
            .unwrap();
        let Repr::Pure(psi) = r.final_state().repr() else { panic!() };
        let expect = C64::new(0.0, -omega * 2.0).exp();
        assert!((psi[1] - expect).norm() < 1e-8);
    }

    #[test]
    fn cavity_decay() {
        let gamma = 0.5;
        let space = HilbertSpace::fock("c", 4);
        let g = SlhTriple::cavity(&space, "c", gamma, 0.0).unwrap();
        let n = number(&space, "c").unwrap();
        let opts = SimOptions {
            observables: vec![("n".into(), n)],
            ..SimOptions::default()
        };
        let grid = TimeGrid::new(5.0 / gamma, 1e-3).unwrap();
        let rho0 = QuantumState::fock(space, 1).unwrap();
        let r = integrate_master(&g, &rho0, grid, &SignalSet::new(), &opts).unwrap();
        let worst = grid
            .times()
            .zip(r.observable("n").unwrap())
            .map(|(t, v)| (v.re - (-gamma * t).exp()).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "{worst}");
        assert!(r.max_trace_drift() < 1e-8);
    }

    #[test]
    fn output_of_add_is_the_signal() {
        let space = HilbertSpace::generic("q", 2);
        let u = C64::new(0.4, -1.1);
        let bindings = SignalSet::new().with(Signal::constant("u", u));
        let g = SlhTriple::add(space.clone(), crate::slh::signal_vector(&space, &["u"])).unwrap();
        let r = integrate_master(&g, &QuantumState::vacuum(space), TimeGrid::new(0.5, 0.1).unwrap(), &bindings, &SimOptions {
            record: Record::All,
            ..SimOptions::default()
        })
        .unwrap();
        let out = output_expectation(&g, &r, 0.3, &bindings).unwrap();
        assert!((out[0] - u).norm() < 1e-12);
        assert!(output_expectation(&g, &r, 0.35, &bindings).is_err());
    }

    #[test]
    fn cavity_output_is_scaled_field() {
        let gamma: f64 = 0.4;
        let space = HilbertSpace::fock("c", 12);
        let g = SlhTriple::cavity(&space, "c", gamma, 1.0).unwrap();
        let rho0 = crate::dynamics::coherent_state(&space, "c", C64::new(0.5, 0.0)).unwrap();
        let r = integrate_master(&g, &rho0, TimeGrid::new(1.0, 1e-2).unwrap(), &SignalSet::new(), &SimOptions::default())
            .unwrap();
        let a = annihilator(&space, "c").unwrap();
        let field = crate::dynamics::expectation(&a, r.final_state()).unwrap();
        let out = output_expectation(&g, &r, 1.0, &SignalSet::new()).unwrap();
        assert!((out[0] - field * gamma.sqrt()).norm() < 1e-14);
    }
}
