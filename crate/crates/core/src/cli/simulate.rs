// Copyright 2026 The slhforge Authors
// SPDX-License-Identifier: Apache-2.0

use std::sync::Arc;

use crate::dynamics::{
    coherent_state, integrate_generator_observed, integrate_schrodinger_observed, CascadeGenerator,
    DynamicsError, QuantumState, SimOptions, SimulationResult, TimeGrid, TripleGenerator,
};
use crate::netlist::{compile_operator, parse_expression};
use crate::operator::{CMatrix, FactorKind, HilbertSpace, Operator, C64};

use super::report::fmt_float;
use super::{load, reduce, write_output, CliError, Method, SimulateArgs, EXIT_SIMULATION};

pub(super) fn parse_initial(spec: &str, space: &Arc<HilbertSpace>) -> Result<QuantumState, CliError> {
    let bad = |why: &str| CliError::usage(format!("invalid --initial `{spec}`: {why}"));
    if spec == "vacuum" {
        return Ok(QuantumState::vacuum(space.clone()));
    }
    if let Some(n) = spec.strip_prefix("fock:") {
        let n: usize = n.parse().map_err(|_| bad("expected fock:N"))?;
        return QuantumState::fock(space.clone(), n).map_err(|e| bad(&e.to_string()));
    }
    if let Some(rest) = spec.strip_prefix("coherent:") {
        let (re, im) = rest.split_once(',').ok_or_else(|| bad("expected coherent:RE,IM"))?;
        let re: f64 = re.trim().parse().map_err(|_| bad("bad real part"))?;
        let im: f64 = im.trim().parse().map_err(|_| bad("bad imaginary part"))?;
        let label = first_fock_label(space).ok_or_else(|| bad("space has no Fock factor"))?;
        return coherent_state(space, &label, C64::new(re, im)).map_err(|e| bad(&e.to_string()));
    }
    Err(bad("expected vacuum, fock:N or coherent:RE,IM"))
}

fn first_fock_label(space: &HilbertSpace) -> Option<String> {
    space
        .factors()
        .iter()
        .find(|f| matches!(f.kind(), FactorKind::Fock { .. }))
        .map(|f| f.label().to_string())
}

/// `a`, `adag` and `n` name the first Fock mode; anything else is an
/// operator expression over the netlist's factor labels.
pub(super) fn parse_observable(name: &str, space: &Arc<HilbertSpace>) -> Result<Operator, CliError> {
    let text = match (name, first_fock_label(space)) {
        ("a" | "adag" | "n", Some(label)) => format!("{name}({label})"),
        _ => name.to_string(),
    };
    let labels: Vec<&str> = space.factors().iter().map(|f| f.label()).collect();
    let expr = parse_expression(&text, &labels)
        .map_err(|e| CliError::usage(format!("invalid --observable `{name}`: {e}")))?;
    compile_operator(&expr, space).map_err(|e| CliError::usage(format!("invalid --observable `{name}`: {e}")))
}

fn sim_error(e: DynamicsError) -> CliError {
    CliError::new(EXIT_SIMULATION, format!("simulation failed: {e}"))
}

pub(super) fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let grid = TimeGrid::new(args.horizon, args.step).map_err(|e| CliError::usage(e.to_string()))?;
    if !(args.drift_limit > 0.0 && args.leak_limit > 0.0) {
        return Err(CliError::usage("tolerances must be positive"));
    }
    let loaded = load(&args.file)?;
    let (g, _) = reduce(&args.file, &loaded)?;
    let space = g.space().clone();
    let initial = parse_initial(&args.initial, &space)?;

    let mut observables = Vec::new();
    for name in &args.observables {
        observables.push((name.clone(), parse_observable(name, &space)?));
    }
    let options = SimOptions {
        drift_limit: args.drift_limit,
        leak_limit: (!args.allow_leak).then_some(args.leak_limit),
        observables,
        ..SimOptions::default()
    };

    let method = match args.method {
        Method::Auto if g.l_is_zero() && initial.is_pure_repr() => Method::Schrodinger,
        Method::Auto => Method::Master,
        m => m,
    };
    log::info!("simulating with {method:?} over {} steps", grid.steps());

    let channels = g.channels();
    let mut outputs: Vec<Vec<C64>> = Vec::new();
    let bindings = loaded.bindings.clone();
    let mut observer = |t: f64, state: &QuantumState| -> Result<(), DynamicsError> {
        if args.outputs {
            let row = g
                .l()
                .iter()
                .map(|p| crate::dynamics::expectation(&p.evaluate(t, &bindings)?, state))
                .collect::<Result<Vec<_>, DynamicsError>>()?;
            outputs.push(row);
        }
        Ok(())
    };
    let result = match method {
        Method::Schrodinger => {
            if !g.l_is_zero() {
                return Err(CliError::usage("--method schrodinger needs a reduced triple with L = 0"));
            }
            if !initial.is_pure_repr() {
                return Err(CliError::usage("--method schrodinger needs a pure initial state"));
            }
            integrate_schrodinger_observed(g.h(), &initial, grid, &loaded.bindings, &options, &mut observer)
        }
        Method::Master => {
            let generator = TripleGenerator::new(g.clone(), loaded.bindings.clone());
            integrate_generator_observed(&generator, &initial, grid, &options, &mut observer)
        }
        Method::Cascade => {
            let generator = CascadeGenerator::new(loaded.network.chain_triples(), loaded.bindings.clone())
                .map_err(sim_error)?;
            integrate_generator_observed(&generator, &initial, grid, &options, &mut observer)
        }
        Method::Auto => unreachable!(),
    }
    .map_err(sim_error)?;

    let csv = render_csv(&result, &options, channels, &outputs, args.outputs)?;
    write_output(args.output.as_deref(), &csv)
}

fn is_hermitian(m: &CMatrix) -> bool {
    crate::operator::linalg::max_abs_diff(m, &crate::operator::linalg::dagger(m)) <= 1e-12
}

fn render_csv(
    result: &SimulationResult,
    options: &SimOptions,
    channels: usize,
    outputs: &[Vec<C64>],
    with_outputs: bool,
) -> Result<String, CliError> {
    let hermitian: Vec<bool> = options.observables.iter().map(|(_, op)| is_hermitian(op.matrix())).collect();
    let mut header = vec!["t".to_string()];
    for ((name, _), &h) in options.observables.iter().zip(&hermitian) {
        if h {
            header.push(name.clone());
        } else {
            header.push(format!("{name}.re"));
            header.push(format!("{name}.im"));
        }
    }
    if with_outputs {
        for i in 0..channels {
            header.push(format!("out{i}.re"));
            header.push(format!("out{i}.im"));
        }
    }
    header.extend(["trace_drift", "purity", "leak"].map(String::from));

    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::usage(format!("cannot render CSV: {e}"));
    w.write_record(&header).map_err(io)?;
    for (i, d) in result.diagnostics.iter().enumerate() {
        let mut row = vec![fmt_float(d.t)];
        for ((_, series), &h) in result.observables.iter().zip(&hermitian) {
            row.push(fmt_float(series[i].re));
            if !h {
                row.push(fmt_float(series[i].im));
            }
        }
        if with_outputs {
            for z in &outputs[i] {
                row.push(fmt_float(z.re));
                row.push(fmt_float(z.im));
            }
        }
        row.push(fmt_float(d.trace_drift));
        row.push(fmt_float(d.purity));
        row.push(fmt_float(d.leak));
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::usage(format!("cannot render CSV: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV is UTF-8"))
}
