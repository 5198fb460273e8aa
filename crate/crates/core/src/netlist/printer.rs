// Copyright 2026 The slhforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Canonical netlist printer.
//!
//! Output order is space, signals, components, network. Parentheses are
//! emitted only where reparsing would otherwise change the tree.

use std::fmt::Write;

use super::ast::*;

pub fn print_netlist(n: &Netlist) -> String {
    let mut out = String::new();
    let factors: Vec<String> = n
        .space
        .factors
        .iter()
        .map(|f| match f.spec {
            FactorSpec::Fock { cutoff } => format!("fock(cutoff={cutoff}) as {}", f.label.name),
            FactorSpec::Generic { dim } => format!("generic(dim={dim}) as {}", f.label.name),
        })
        .collect();
    writeln!(out, "space {}", factors.join(", ")).unwrap();
    for s in &n.signals {
        let def = match &s.def {
            SignalDefExpr::Constant(e) => format!("constant({})", print_expression(e)),
            SignalDefExpr::Gaussian { args } => format!("gaussian({})", kwargs(args)),
            SignalDefExpr::Exponential { args } => format!("exp({})", kwargs(args)),
            SignalDefExpr::Table { path, .. } => format!("table(\"{path}\")"),
        };
        writeln!(out, "signal {} = {def}", s.name.name).unwrap();
    }
    for c in &n.components {
        writeln!(
            out,
            "component {} = {}({})",
            c.name.name,
            c.kind.keyword(),
            kwargs(&c.args)
        )
        .unwrap();
    }
    let chain: Vec<&str> = n.network.chain.iter().map(|c| c.name.as_str()).collect();
    writeln!(out, "network {} = {}", n.network.name.name, chain.join(" <| ")).unwrap();
    out
}

fn kwargs(args: &[KwArg]) -> String {
    args.iter()
        .map(|a| format!("{}={}", a.key.name, print_expression(&a.value)))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Prints `e` as a full expression.
pub fn print_expression(e: &Expr) -> String {
    at(e, 0)
}

fn precedence(e: &Expr) -> u8 {
    match e.kind {
        ExprKind::Add(..) | ExprKind::Sub(..) => 1,
        ExprKind::Mul(..) => 2,
        ExprKind::Neg(..) => 3,
        _ => 4,
    }
}

fn at(e: &Expr, min: u8) -> String {
    let body = match &e.kind {
        ExprKind::Number { value, imaginary } => {
            format!("{value}{}", if *imaginary { "i" } else { "" })
        }
        ExprKind::Name(n) => n.clone(),
        ExprKind::Call { func, args } => {
            let args: Vec<String> = args.iter().map(print_expression).collect();
            format!("{}({})", func.keyword(), args.join(", "))
        }
        ExprKind::List(items) => {
            let items: Vec<String> = items.iter().map(print_expression).collect();
            format!("[{}]", items.join(", "))
        }
        ExprKind::Neg(x) => format!("-{}", at(x, 3)),
        ExprKind::Add(a, b) => format!("{} + {}", at(a, 1), at(b, 2)),
        ExprKind::Sub(a, b) => format!("{} - {}", at(a, 1), at(b, 2)),
        ExprKind::Mul(a, b) => format!("{} * {}", at(a, 2), at(b, 3)),
    };
    if precedence(e) < min {
        format!("({body})")
    } else {
        body
    }
}
