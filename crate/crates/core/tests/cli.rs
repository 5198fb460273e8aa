// Copyright 2026 The slhforge Authors
// SPDX-License-Identifier: Apache-2.0

mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use num_complex::Complex64 as C;
use serde_json::Value;
use tempfile::TempDir;

fn slhforge(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slhforge"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("run slhforge")
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

fn write(dir: &TempDir, name: &str, text: &str) {
    fs::write(dir.path().join(name), text).unwrap();
}

/// Parses the CSV on stdout into a header and rows of floats.
fn table(out: &Output) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

const CAVITY: &str = "\
space fock(cutoff=4) as c
component C = CAVITY(mode=c, gamma=0.5, omega=1)
network main = C
";

fn feedback(cutoff: usize, drive: &str, omit_second_splitter: bool) -> String {
    let b2 = if omit_second_splitter { "" } else { " <| B2" };
    format!(
        "space fock(cutoff={cutoff}) as c
signal u = {drive}
component H0 = HAM(H=n(c))
component A1 = ADD(u=[u])
component B1 = BS(T=-1)
component G1 = SYS(L=[sqrt(0.4) * a(c)])
component B2 = BS(T=-1)
component A2 = ADD(u=[-u])
component G2 = SYS(L=[sqrt(0.4) * a(c)])
network main = H0 <| A1 <| B1 <| G1{b2} <| A2 <| G2
"
    )
}

#[test]
fn reduce_is_deterministic_and_writes_files() {
    let dir = TempDir::new().unwrap();
    write(&dir, "f.slh", &feedback(4, "constant(0.5 + 0.25i)", false));
    let a = slhforge(dir.path(), &["reduce", "f.slh"]);
    let b = slhforge(dir.path(), &["reduce", "f.slh", "-o", "r.json"]);
    assert_eq!(code(&a), 0);
    assert_eq!(code(&b), 0);
    assert_eq!(a.stdout, fs::read(dir.path().join("r.json")).unwrap());

    let report: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report["L"], serde_json::json!([[]]));
    assert_eq!(report["trace"].as_array().unwrap().len(), 7);
    assert_eq!(report["validation"]["l_zero"], Value::Bool(true));
    let monomials: Vec<&str> = report["H"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["monomial"].as_str().unwrap())
        .collect();
    assert_eq!(monomials.len(), 3, "{monomials:?}");
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    write(&dir, "syntax.slh", "space fock(cutoff=2) as c\nnetwork main =\n");
    write(
        &dir,
        "mismatch.slh",
        "space fock(cutoff=2) as c\ncomponent G = SYS(L=[a(c)])\ncomponent B = BS(T=[[0, 1], [1, 0]])\nnetwork m = G <| B\n",
    );
    let parse = slhforge(dir.path(), &["reduce", "syntax.slh"]);
    assert_eq!(code(&parse), 1);
    assert!(String::from_utf8_lossy(&parse.stderr).contains("syntax.slh:3:1: syntax error"));
    assert_eq!(code(&slhforge(dir.path(), &["reduce", "mismatch.slh"])), 2);
    assert_eq!(code(&slhforge(dir.path(), &["reduce"])), 64);
    assert_eq!(code(&slhforge(dir.path(), &["reduce", "absent.slh"])), 64);
    write(&dir, "cavity.slh", CAVITY);
    let bad_grid = slhforge(dir.path(), &["simulate", "cavity.slh", "--horizon", "1", "--step", "0.3"]);
    assert_eq!(code(&bad_grid), 64);
}

#[test]
fn zero_horizon_gives_initial_row() {
    let dir = TempDir::new().unwrap();
    write(&dir, "cavity.slh", CAVITY);
    let out = slhforge(
        dir.path(),
        &["simulate", "cavity.slh", "--horizon", "0", "--initial", "fock:2", "--observable", "n"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = table(&out);
    assert_eq!(header, ["t", "n", "trace_drift", "purity", "leak"]);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][..2], [0.0, 2.0]);
}

#[test]
fn cavity_population_decays_exponentially() {
    let dir = TempDir::new().unwrap();
    write(&dir, "cavity.slh", CAVITY);
    let out = slhforge(
        dir.path(),
        &["simulate", "cavity.slh", "--horizon", "2", "--initial", "fock:1", "--observable", "n", "-o", "out.csv"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = Output {
        stdout: fs::read(dir.path().join("out.csv")).unwrap(),
        ..out
    };
    let (header, rows) = table(&out);
    let n = column(&header, "n");
    assert_eq!(rows.len(), 2001);
    for row in rows.iter().step_by(100) {
        let expected = (-0.5 * row[0]).exp();
        assert!((row[n] - expected).abs() < 1e-6, "t={} n={} expected {expected}", row[0], row[n]);
    }
}

#[test]
fn cancelled_chain_drives_the_mode_like_a_classical_force() {
    let dir = TempDir::new().unwrap();
    write(&dir, "f.slh", &feedback(15, "constant(0.5 + 0.25i)", false));
    let out = slhforge(
        dir.path(),
        &["simulate", "f.slh", "--horizon", "1", "--observable", "a", "--outputs"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = table(&out);
    let (re, im) = (column(&header, "a.re"), column(&header, "a.im"));
    let (out_re, out_im) = (column(&header, "out0.re"), column(&header, "out0.im"));

    // The reduced Hamiltonian carries 2·Im(L†u), so the effective force is √γ·u.
    let u = C::new(0.5, 0.25);
    let reference = common::oracle::driven_amplitude(1.0, 0.4f64.sqrt(), &|_| u, 1.0, 1e-4);
    for row in rows.iter().step_by(50) {
        let k = (row[0] / 1e-4).round() as usize;
        let alpha = reference[k].1;
        assert!((C::new(row[re], row[im]) - alpha).norm() < 1e-6, "t={}", row[0]);
        assert!(row[out_re].abs() < 1e-12 && row[out_im].abs() < 1e-12);
    }
}

fn verify_bundle(dir: &TempDir, file: &str, gain: &str) -> (i32, Value) {
    let out = slhforge(
        dir.path(),
        &["verify", file, "--horizon", "1", "--signal-gain", gain, "-o", "bundle.json"],
    );
    let bundle = serde_json::from_slice(&fs::read(dir.path().join("bundle.json")).unwrap()).unwrap();
    (code(&out), bundle)
}

fn check<'a>(bundle: &'a Value, name: &str) -> &'a Value {
    bundle["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check {name}"))
}

#[test]
fn verify_passes_with_doubled_signal_term() {
    let dir = TempDir::new().unwrap();
    write(&dir, "f.slh", &feedback(12, "gaussian(amplitude=1, center=0.5, width=0.2)", false));
    let (status, bundle) = verify_bundle(&dir, "f.slh", "2");
    assert_eq!(status, 0, "{bundle:#}");
    assert_eq!(bundle["passed"], Value::Bool(true));
}

#[test]
fn verify_reports_failing_checks() {
    let dir = TempDir::new().unwrap();
    write(&dir, "f.slh", &feedback(12, "gaussian(amplitude=1, center=0.5, width=0.2)", false));
    let (status, bundle) = verify_bundle(&dir, "f.slh", "1");
    assert_eq!(status, 4);
    assert_eq!(check(&bundle, "reduction")["passed"], Value::Bool(false));
    assert_eq!(check(&bundle, "coupling_cancelled")["passed"], Value::Bool(true));
}

#[test]
fn verify_detects_missing_splitter() {
    let dir = TempDir::new().unwrap();
    write(&dir, "f.slh", &feedback(8, "constant(0.1)", true));
    let (status, bundle) = verify_bundle(&dir, "f.slh", "2");
    assert_eq!(status, 4);
    assert_eq!(check(&bundle, "coupling_cancelled")["passed"], Value::Bool(false));
}

#[test]
fn verify_without_drive_is_trivial() {
    let dir = TempDir::new().unwrap();
    write(&dir, "f.slh", &feedback(4, "constant(0)", false));
    let (status, bundle) = verify_bundle(&dir, "f.slh", "1");
    assert_eq!(status, 0, "{bundle:#}");
}

#[test]
fn demo_verification_runs() {
    let dir = TempDir::new().unwrap();
    let out = slhforge(
        dir.path(),
        &["verify", "--demo", "--horizon", "0.2", "--jobs", "2", "-o", "bundle.json"],
    );
    assert_eq!(code(&out), 4);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("FAIL reduction"), "{stderr}");
}
