// Copyright 2026 The slhforge Authors
// SPDX-License-Identifier: Apache-2.0

//! The `.slh` network description language.
//!
//! A netlist declares one Hilbert space, a set of named signals and
//! components, and a single series chain:
//!
//! ```text
//! space fock(cutoff=2) as c
//! component G = SYS(L=[sqrt(0.4)*a(c)])
//! network main = G
//! ```
//!
//! [`parse_netlist`] builds an [`ast::Netlist`]; [`reduce_network`] folds the
//! chain into one [`SlhTriple`](crate::SlhTriple).

pub mod ast;
mod compile;
mod lexer;
mod parser;
mod printer;

use std::fmt;

pub use ast::{Netlist, Span};
pub use compile::{
    build_space, compile_netlist, compile_operator, load_bindings, reduce_network, CompiledComponent, CompiledNetwork, ReductionStep,
    ReductionTrace,
};
pub use parser::{parse_expression, parse_netlist};
pub use printer::{print_expression, print_netlist};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Syntax,
    Name,
    Arity,
    Type,
    Reduction,
    Signal,
}

impl ErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::Syntax => "syntax",
            ErrorKind::Name => "name",
            ErrorKind::Arity => "arity",
            ErrorKind::Type => "type",
            ErrorKind::Reduction => "reduction",
            ErrorKind::Signal => "signal",
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A located netlist error. Only the first error in a file is reported.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{}:{}: {kind} error: {message}", span.line, span.col)]
pub struct NetlistError {
    pub kind: ErrorKind,
    pub span: Span,
    pub message: String,
}
