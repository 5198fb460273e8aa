// Copyright 2026 The slhforge Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use serde::Serialize;

use crate::dynamics::{
    coherent_fidelity, driven_oscillator_amplitude, expectation, integrate_generator, integrate_schrodinger,
    trace_distance, CascadeGenerator, DynamicsError, QuantumState, Record, SimOptions, SimulationResult,
    TimeGrid,
};
use crate::operator::{annihilator, linalg, number, FactorKind, C64};
use crate::poly::OpPolynomial;
use crate::slh::{coupling_signal_term, triples_approx_equal, Component, SlhTriple};

use super::report::{fmt_float, to_json, Num};
use super::{default_probes, load, load_text, reduce, write_output, CliError, Loaded, VerifyArgs, EXIT_SIMULATION, EXIT_VERIFICATION};

/// Built-in instance: a damped cavity `L = √γ·a`, `H0 = ω0·a†a`, driven by a
/// Gaussian pulse through the feedback chain.
pub const DEMO_NETLIST: &str = "\
# Driven cavity through the noise-cancelling feedback chain.
space fock(cutoff=40) as c
signal u = gaussian(amplitude=1.5, center=5, width=1)
component H0 = HAM(H=n(c))
component A1 = ADD(u=[u])
component B1 = BS(T=-1)
component G = SYS(L=[sqrt(0.4) * a(c)])
component B2 = BS(T=-1)
component A2 = ADD(u=[-u])
component G2 = SYS(L=[sqrt(0.4) * a(c)])
network main = H0 <| A1 <| B1 <| G <| B2 <| A2 <| G2
";

const REDUCTION_TOL: f64 = 1e-10;
const TRACE_DISTANCE_TOL: f64 = 1e-6;
const PURITY_TOL: f64 = 1e-8;
const OUTPUT_TOL: f64 = 1e-8;
const ORACLE_AMPLITUDE_TOL: f64 = 1e-4;
const ORACLE_FIDELITY_TOL: f64 = 1e-6;
const CHECKPOINTS: usize = 100;

#[derive(Debug, Serialize)]
struct Check {
    name: &'static str,
    passed: bool,
    value: Option<Num>,
    tolerance: Option<Num>,
    detail: String,
}

impl Check {
    fn measured(name: &'static str, value: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name,
            passed: value <= tolerance,
            value: Some(Num(value)),
            tolerance: Some(Num(tolerance)),
            detail,
        }
    }
}

#[derive(Debug, Serialize)]
struct Bundle {
    source: String,
    signal_gain: Num,
    horizon: Num,
    step: Num,
    checks: Vec<Check>,
    passed: bool,
}

/// The instance `(L, H0, u)` read off a chain: `L` from the leftmost SYS,
/// `H0` as the sum of the HAM members, `u` from the leftmost ADD.
struct Instance {
    l: Vec<OpPolynomial>,
    h0: OpPolynomial,
    u: Vec<OpPolynomial>,
}

fn instance(loaded: &Loaded) -> Result<Instance, CliError> {
    let space = loaded.network.space.clone();
    let mut l = None;
    let mut u = None;
    let mut h0 = OpPolynomial::zero(space);
    for c in loaded.network.chain_components() {
        match &c.component {
            Component::Sys(x) if l.is_none() => l = Some(x.clone()),
            Component::Add(x) if u.is_none() => u = Some(x.clone()),
            Component::Ham(h) => {
                h0 = h0
                    .add(h)
                    .map_err(|e| CliError::new(EXIT_VERIFICATION, e.to_string()))?
            }
            _ => {}
        }
    }
    let missing = |what: &str| CliError::new(EXIT_VERIFICATION, format!("network has no {what} component"));
    Ok(Instance {
        l: l.ok_or_else(|| missing("SYS"))?,
        h0,
        u: u.ok_or_else(|| missing("ADD"))?,
    })
}

/// `(ω0, γ)` when the instance is a single damped cavity with
/// `L = √γ·a` and `H0 = ω0·a†a`.
fn cavity_parameters(inst: &Instance) -> Option<(f64, f64)> {
    let space = inst.h0.space();
    if space.factors().len() != 1 || inst.l.len() != 1 {
        return None;
    }
    let label = space.factors()[0].label();
    if !matches!(space.factors()[0].kind(), FactorKind::Fock { .. }) || inst.l[0].has_signals() || inst.h0.has_signals() {
        return None;
    }
    let a = annihilator(space, label).ok()?.into_matrix();
    let n = number(space, label).ok()?.into_matrix();
    let l = inst.l[0].evaluate_matrix(0.0, &Default::default()).ok()?;
    let h = inst.h0.evaluate_matrix(0.0, &Default::default()).ok()?;
    let k = l[[0, 1]];
    let omega = if n.nrows() > 1 { h[[1, 1]].re } else { 0.0 };
    let exact = |x: &ndarray::Array2<C64>, y: &ndarray::Array2<C64>| linalg::max_abs_diff(x, y) <= 1e-12;
    if k.im != 0.0 || k.re <= 0.0 || !exact(&l, &a.mapv(|z| z * k)) || !exact(&h, &n.mapv(|z| z * omega)) {
        return None;
    }
    Some((omega, k.re * k.re))
}

fn sim_error(e: DynamicsError) -> CliError {
    CliError::new(EXIT_SIMULATION, format!("simulation failed: {e}"))
}

pub(super) fn cmd_verify(args: &VerifyArgs) -> Result<(), CliError> {
    let (source, loaded) = match &args.file {
        Some(path) => (path.display().to_string(), load(path)?),
        None => ("demo".to_string(), load_text(Path::new("demo.slh"), DEMO_NETLIST)?),
    };
    let path = args.file.clone().unwrap_or_else(|| "demo.slh".into());
    let horizon = args.horizon.unwrap_or(if args.demo { 10.0 } else { 1.0 });
    let grid = TimeGrid::new(horizon, args.step).map_err(|e| CliError::usage(e.to_string()))?;
    if args.jobs == 0 {
        return Err(CliError::usage("--jobs must be at least 1"));
    }

    let (reduced, _) = reduce(&path, &loaded)?;
    let inst = instance(&loaded)?;
    let space = reduced.space().clone();
    let channels = reduced.channels();
    let bindings = &loaded.bindings;
    let verification = |e: crate::slh::SlhError| CliError::new(EXIT_VERIFICATION, e.to_string());

    let term = coupling_signal_term(&inst.l, &inst.u).map_err(verification)?;
    let predicted_h = inst
        .h0
        .add(&term.scale(C64::new(args.signal_gain, 0.0)))
        .map_err(|e| CliError::new(EXIT_VERIFICATION, e.to_string()))?;
    let predicted = SlhTriple::ham(space.clone(), channels, predicted_h.clone()).map_err(verification)?;

    let mut checks = Vec::new();
    let probes = default_probes(bindings);
    let cmp = triples_approx_equal(&reduced, &predicted, REDUCTION_TOL, &probes, bindings);
    let mut worst: f64 = 0.0;
    for ((_, a), (_, b)) in reduced.entries().into_iter().zip(predicted.entries()) {
        if let Ok((d, _)) = a.max_coefficient_diff(b) {
            worst = worst.max(d);
        }
    }
    checks.push(Check {
        name: "reduction",
        passed: cmp.equal(),
        value: Some(Num(worst)),
        tolerance: Some(Num(REDUCTION_TOL)),
        detail: format!("{:?}: {}", cmp.level, cmp.report),
    });
    let l_summary: Vec<String> = reduced.l().iter().map(OpPolynomial::summary).collect();
    checks.push(Check {
        name: "coupling_cancelled",
        passed: reduced.l_is_zero(),
        value: None,
        tolerance: None,
        detail: format!("reduced L = [{}]", l_summary.join(", ")),
    });

    let every = (grid.steps() / CHECKPOINTS).max(1);
    let cavity = cavity_parameters(&inst);
    let mut master_opts = SimOptions {
        record: Record::Every(every),
        ..SimOptions::default()
    };
    if cavity.is_some() {
        let label = space.factors()[0].label();
        master_opts.observables = vec![("a".into(), annihilator(&space, label).map_err(|e| sim_error(e.into()))?)];
    }
    let closed_opts = SimOptions {
        record: Record::Every(every),
        ..SimOptions::default()
    };
    let vacuum = QuantumState::vacuum(space.clone());
    let cascade = CascadeGenerator::new(loaded.network.chain_triples(), bindings.clone()).map_err(sim_error)?;
    let run_master = || integrate_generator(&cascade, &vacuum, grid, &master_opts);
    let run_closed = || integrate_schrodinger(&predicted_h, &vacuum, grid, bindings, &closed_opts);
    let (master, closed): (Result<SimulationResult, _>, Result<SimulationResult, _>) = if args.jobs > 1 {
        std::thread::scope(|s| {
            let m = s.spawn(run_master);
            let c = run_closed();
            (m.join().expect("master worker panicked"), c)
        })
    } else {
        (run_master(), run_closed())
    };
    let (master, closed) = (master.map_err(sim_error)?, closed.map_err(sim_error)?);

    let mut distance: f64 = 0.0;
    let mut output: f64 = 0.0;
    for ((t, rho), (_, psi)) in master.snapshots.iter().zip(&closed.snapshots) {
        distance = distance.max(trace_distance(rho, psi).map_err(sim_error)?);
        let composite = cascade.heisenberg(*t).map_err(sim_error)?;
        for l in composite.l() {
            let op = crate::Operator::new(space.clone(), l.clone()).map_err(|e| sim_error(e.into()))?;
            output = output.max(expectation(&op, rho).map_err(sim_error)?.norm());
        }
    }
    checks.push(Check::measured(
        "master_vs_schrodinger",
        distance,
        TRACE_DISTANCE_TOL,
        format!("max trace distance over {} checkpoints", master.snapshots.len()),
    ));
    let purity_drift = master.diagnostics.iter().fold(0.0_f64, |m, d| m.max((d.purity - 1.0).abs()));
    checks.push(Check::measured("purity", purity_drift, PURITY_TOL, "max |tr ρ² − 1|".into()));
    checks.push(Check::measured("output_zero", output, OUTPUT_TOL, "max |⟨L⟩| of the composite chain".into()));

    if let Some((omega0, gamma)) = cavity {
        let u_poly = &inst.u[0];
        let u = |t: f64| {
            u_poly
                .evaluate_matrix(t, bindings)
                .map(|m| m[[0, 0]])
                .unwrap_or(C64::new(f64::NAN, 0.0))
        };
        // The predicted Hamiltonian drives `ȧ = −iω0·a − gain·(√γ/2)·u`.
        let coupling = args.signal_gain * gamma.sqrt() / 2.0;
        let series = master.observable("a").expect("observable requested");
        let mut err: f64 = 0.0;
        for (i, t) in grid.times().enumerate().step_by(every) {
            let alpha = driven_oscillator_amplitude(omega0, coupling, &u, t).map_err(sim_error)?;
            err = err.max((series[i] - alpha).norm());
        }
        checks.push(Check::measured(
            "oracle_amplitude",
            err,
            ORACLE_AMPLITUDE_TOL,
            format!("max |⟨a⟩ − α| for ω0 = {}, γ = {}", fmt_float(omega0), fmt_float(gamma)),
        ));
        let alpha_end = driven_oscillator_amplitude(omega0, coupling, &u, grid.horizon()).map_err(sim_error)?;
        let label = space.factors()[0].label();
        let fidelity = coherent_fidelity(master.final_state(), label, alpha_end).map_err(sim_error)?;
        checks.push(Check::measured(
            "oracle_fidelity",
            1.0 - fidelity,
            ORACLE_FIDELITY_TOL,
            "1 − ⟨α(T)|ρ(T)|α(T)⟩".into(),
        ));
    }

    let passed = checks.iter().all(|c| c.passed);
    for c in &checks {
        let value = c.value.map(|v| fmt_float(v.0)).unwrap_or_default();
        let tol = c.tolerance.map(|v| format!(" (tol {})", fmt_float(v.0))).unwrap_or_default();
        eprintln!("{} {:<22} {value}{tol} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let bundle = Bundle {
        source,
        signal_gain: Num(args.signal_gain),
        horizon: Num(horizon),
        step: Num(args.step),
        checks,
        passed,
    };
    write_output(args.output.as_deref(), &to_json(&bundle))?;
    if !passed {
        let failed: Vec<&str> = bundle.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        return Err(CliError::new(EXIT_VERIFICATION, format!("verification failed: {}", failed.join(", "))));
    }
    Ok(())
}
