// Copyright 2026 The slhforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Golden netlist corpus. Each `NAME.slh` under `tests/golden` pairs with
//! `NAME.json` (the `reduce` report on stdout) or `NAME.err` (exit code line
//! followed by stderr). Set `UPDATE_GOLDEN=1` to rewrite the expectations.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use slhforge::netlist::{parse_netlist, print_netlist};

pub fn dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

pub fn cases() -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir())
        .expect("golden directory")
        .filter_map(|e| {
            let p = e.ok()?.path();
            (p.extension()? == "slh").then(|| p.file_stem()?.to_str().map(String::from))?
        })
        .collect();
    names.sort();
    names
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub valid: usize,
    pub invalid: usize,
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn actual(name: &str) -> (bool, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_slhforge"))
        .current_dir(dir())
        .args(["reduce", &format!("{name}.slh")])
        .output()
        .expect("run slhforge");
    let code = out.status.code().unwrap_or(-1);
    if code == 0 {
        (true, String::from_utf8(out.stdout).expect("utf-8 report"))
    } else {
        let stderr = String::from_utf8(out.stderr).expect("utf-8 stderr");
        (false, format!("exit {code}\n{stderr}"))
    }
}

/// Byte-exact comparison against the stored expectations, plus the
/// parse-print-parse fixpoint for every valid file.
pub fn check(update: bool) -> Outcome {
    let mut outcome = Outcome::default();
    for name in cases() {
        let (ok, text) = actual(&name);
        let (ext, stale) = if ok { ("json", "err") } else { ("err", "json") };
        let expected_path = dir().join(format!("{name}.{ext}"));
        if update {
            fs::write(&expected_path, &text).expect("write golden");
            let _ = fs::remove_file(dir().join(format!("{name}.{stale}")));
        }
        match fs::read_to_string(&expected_path) {
            Ok(expected) if expected == text => {}
            Ok(_) => outcome.failures.push(format!("{name}: output differs from {name}.{ext}")),
            Err(_) => outcome.failures.push(format!("{name}: missing {name}.{ext}")),
        }
        if ok {
            outcome.valid += 1;
            if let Err(msg) = fixpoint(&name) {
                outcome.failures.push(format!("{name}: {msg}"));
            }
        } else {
            outcome.invalid += 1;
        }
    }
    outcome
}

fn fixpoint(name: &str) -> Result<(), String> {
    let src = fs::read_to_string(dir().join(format!("{name}.slh"))).map_err(|e| e.to_string())?;
    let first = parse_netlist(&src).map_err(|e| e.to_string())?;
    let printed = print_netlist(&first);
    let second = parse_netlist(&printed).map_err(|e| format!("reparse: {e}"))?;
    if first != second {
        return Err("reparsed AST differs".into());
    }
    if print_netlist(&second) != printed {
        return Err("printing is not idempotent".into());
    }
    Ok(())
}
