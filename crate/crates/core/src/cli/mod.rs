// Copyright 2026 The slhforge Authors
// SPDX-License-Identifier: Apache-2.0

//! The `slhforge` command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0    | success |
//! | 1    | netlist parse error |
//! | 2    | reduction error (typing, composition, signal loading) |
//! | 3    | validation failure of the reduced triple |
//! | 4    | verification check failed |
//! | 5    | simulation error |
//! | 64   | usage or I/O error |

pub mod report;
mod simulate;
mod verify;

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::netlist::{
    compile_netlist, load_bindings, parse_netlist, CompiledNetwork, ErrorKind, Netlist,
    NetlistError, ReductionTrace,
};
use crate::signal::SignalSet;
use crate::slh::{SlhTriple, Validation, UNITARY_TOL};

use report::{poly_json, space_json, to_json, FactorJson, Num, TermJson};

pub const EXIT_PARSE: i32 = 1;
pub const EXIT_REDUCTION: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;
pub const EXIT_SIMULATION: i32 = 5;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "slhforge", version, about = "Compose, reduce and simulate SLH quantum networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reduce a netlist's series chain to one triple and write a JSON report.
    Reduce(ReduceArgs),
    /// Integrate a netlist from an initial state and write a CSV trajectory.
    Simulate(SimulateArgs),
    /// Check the noise-cancellation construction on a netlist or the demo.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct ReduceArgs {
    file: PathBuf,
    /// Times at which S is checked for unitarity.
    #[arg(long, value_delimiter = ',')]
    probe_times: Option<Vec<f64>>,
    #[arg(long, default_value_t = UNITARY_TOL)]
    tol: f64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Schrödinger when the reduced L vanishes and the state is pure,
    /// master equation otherwise.
    Auto,
    /// Master equation of the reduced triple.
    Master,
    /// Closed evolution under the reduced H (requires L = 0).
    Schrodinger,
    /// Master equation of the unreduced chain.
    Cascade,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    file: PathBuf,
    #[arg(long)]
    horizon: f64,
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    /// `vacuum`, `fock:N` or `coherent:RE,IM` (on the first Fock factor).
    #[arg(long, default_value = "vacuum")]
    initial: String,
    /// Operator expression (`a`, `n`, `adag` or e.g. `a(c) + adag(c)`).
    #[arg(long = "observable")]
    observables: Vec<String>,
    /// Add columns with the mean output field of each channel.
    #[arg(long)]
    outputs: bool,
    #[arg(long, value_enum, default_value_t = Method::Auto)]
    method: Method,
    #[arg(long, default_value_t = 1e-6)]
    drift_limit: f64,
    #[arg(long, default_value_t = 1e-6)]
    leak_limit: f64,
    /// Report truncation leak without aborting.
    #[arg(long)]
    allow_leak: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(required_unless_present = "demo", conflicts_with = "demo")]
    file: Option<PathBuf>,
    /// Use the built-in driven-cavity instance.
    #[arg(long)]
    demo: bool,
    /// Coefficient of Im(L†u) in the predicted Hamiltonian.
    #[arg(long, default_value_t = 1.0)]
    signal_gain: f64,
    /// Defaults to 10 for the demo and 1 otherwise.
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    /// Worker threads for independent simulations.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Error carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Self::new(EXIT_USAGE, message)
    }

    fn netlist(path: &Path, err: NetlistError) -> Self {
        let code = match err.kind {
            ErrorKind::Syntax | ErrorKind::Name | ErrorKind::Arity => EXIT_PARSE,
            _ => EXIT_REDUCTION,
        };
        Self::new(code, format!("{}:{err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Entry point of the binary; returns the process exit code.
pub fn main() -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter("SLHFORGE_LOG"))
        .format_timestamp(None)
        .try_init();
    run(std::env::args_os())
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Reduce(a) => cmd_reduce(&a),
        Command::Simulate(a) => simulate::cmd_simulate(&a),
        Command::Verify(a) => verify::cmd_verify(&a),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("slhforge: {e}");
            e.code
        }
    }
}

/// A parsed and typed netlist with its signal bindings.
struct Loaded {
    ast: Netlist,
    network: CompiledNetwork,
    bindings: SignalSet,
}

fn load_text(path: &Path, text: &str) -> Result<Loaded, CliError> {
    let ast = parse_netlist(text).map_err(|e| CliError::netlist(path, e))?;
    let network = compile_netlist(&ast).map_err(|e| CliError::netlist(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let bindings = load_bindings(&ast, base).map_err(|e| CliError::netlist(path, e))?;
    log::info!(
        "loaded {}: {} components, chain of {}",
        path.display(),
        network.components.len(),
        network.chain.len()
    );
    Ok(Loaded {
        ast,
        network,
        bindings,
    })
}

fn load(path: &Path) -> Result<Loaded, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    load_text(path, &text)
}

fn reduce(path: &Path, loaded: &Loaded) -> Result<(SlhTriple, ReductionTrace), CliError> {
    loaded.network.reduce().map_err(|e| CliError::netlist(path, e))
}

fn write_output(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, content)
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(content.as_bytes())
            .map_err(|e| CliError::usage(format!("cannot write to stdout: {e}"))),
    }
}

/// Probe times spanning the signal horizon, or a fixed set when signals are
/// defined everywhere.
fn default_probes(bindings: &SignalSet) -> Vec<f64> {
    let (lo, hi) = bindings.horizon();
    if lo.is_finite() && hi.is_finite() {
        (0..5).map(|k| lo + (hi - lo) * k as f64 / 4.0).collect()
    } else {
        vec![0.0, 0.5, 1.0, 2.5, 5.0]
    }
}

#[derive(Debug, Serialize)]
struct StepJson {
    component: String,
    summary: String,
}

#[derive(Debug, Serialize)]
struct ValidationJson {
    probe_times: Vec<Num>,
    s_unitary: bool,
    s_defect: Num,
    h_self_adjoint: bool,
    l_zero: bool,
    s_signal_dependent: bool,
    passed: bool,
}

#[derive(Debug, Serialize)]
struct ReduceReport {
    network: String,
    space: Vec<FactorJson>,
    channels: usize,
    summary: String,
    #[serde(rename = "S")]
    s: Vec<Vec<Vec<TermJson>>>,
    #[serde(rename = "L")]
    l: Vec<Vec<TermJson>>,
    #[serde(rename = "H")]
    h: Vec<TermJson>,
    trace: Vec<StepJson>,
    validation: ValidationJson,
}

/// JSON report of a reduced network.
pub fn reduce_report(network: &str, g: &SlhTriple, trace: &ReductionTrace, v: &Validation) -> String {
    let report = ReduceReport {
        network: network.to_string(),
        space: space_json(g.space()),
        channels: g.channels(),
        summary: g.summary(),
        s: g.s().iter().map(|row| row.iter().map(poly_json).collect()).collect(),
        l: g.l().iter().map(poly_json).collect(),
        h: poly_json(g.h()),
        trace: trace
            .steps
            .iter()
            .map(|s| StepJson {
                component: s.component.clone(),
                summary: s.summary.clone(),
            })
            .collect(),
        validation: ValidationJson {
            probe_times: v.probe_times.iter().map(|&t| Num(t)).collect(),
            s_unitary: v.s_unitary,
            s_defect: Num(v.s_defect),
            h_self_adjoint: v.h_self_adjoint,
            l_zero: v.l_zero,
            s_signal_dependent: v.s_signal_dependent,
            passed: v.passed(),
        },
    };
    to_json(&report)
}

fn cmd_reduce(args: &ReduceArgs) -> Result<(), CliError> {
    if !(args.tol > 0.0) {
        return Err(CliError::usage("--tol must be positive"));
    }
    let loaded = load(&args.file)?;
    let (g, trace) = reduce(&args.file, &loaded)?;
    let probes = args
        .probe_times
        .clone()
        .unwrap_or_else(|| default_probes(&loaded.bindings));
    let validation = g
        .validate(&probes, &loaded.bindings, args.tol)
        .map_err(|e| CliError::new(EXIT_REDUCTION, format!("{}: {e}", args.file.display())))?;
    let report = reduce_report(&loaded.ast.network.name.name, &g, &trace, &validation);
    write_output(args.output.as_deref(), &report)?;
    if !validation.passed() {
        return Err(CliError::new(
            EXIT_VALIDATION,
            format!(
                "validation failed: S unitary = {} (defect {}), H self-adjoint = {}",
                validation.s_unitary,
                report::fmt_float(validation.s_defect),
                validation.h_self_adjoint
            ),
        ));
    }
    Ok(())
}
