// Copyright 2026 The slhforge Authors
// SPDX-License-Identifier: Apache-2.0

use std::fmt;

/// Source position (1-based line and column).
///
/// Spans never take part in AST equality, so a pretty-printed and reparsed
/// netlist compares equal to the original.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Netlist {
    pub space: SpaceDecl,
    pub signals: Vec<SignalDecl>,
    pub components: Vec<ComponentDecl>,
    pub network: NetworkDecl,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceDecl {
    pub factors: Vec<FactorDecl>,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorSpec {
    Fock { cutoff: usize },
    Generic { dim: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorDecl {
    pub spec: FactorSpec,
    pub label: Ident,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalDecl {
    pub name: Ident,
    pub def: SignalDefExpr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SignalDefExpr {
    Constant(Expr),
    Gaussian { args: Vec<KwArg> },
    Exponential { args: Vec<KwArg> },
    Table { path: String, span: Span },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentKind {
    Ham,
    Bs,
    Add,
    Sys,
    Cavity,
}

impl ComponentKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ComponentKind::Ham => "HAM",
            ComponentKind::Bs => "BS",
            ComponentKind::Add => "ADD",
            ComponentKind::Sys => "SYS",
            ComponentKind::Cavity => "CAVITY",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        Some(match s {
            "HAM" => ComponentKind::Ham,
            "BS" => ComponentKind::Bs,
            "ADD" => ComponentKind::Add,
            "SYS" => ComponentKind::Sys,
            "CAVITY" => ComponentKind::Cavity,
            _ => return None,
        })
    }

    /// Keyword parameters, all required.
    pub fn params(self) -> &'static [&'static str] {
        match self {
            ComponentKind::Ham => &["H"],
            ComponentKind::Bs => &["T"],
            ComponentKind::Add => &["u"],
            ComponentKind::Sys => &["L"],
            ComponentKind::Cavity => &["mode", "gamma", "omega"],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentDecl {
    pub name: Ident,
    pub kind: ComponentKind,
    pub args: Vec<KwArg>,
    pub span: Span,
}

impl ComponentDecl {
    pub fn arg(&self, key: &str) -> Option<&Expr> {
        self.args.iter().find(|a| a.key.name == key).map(|a| &a.value)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KwArg {
    pub key: Ident,
    pub value: Expr,
}

/// `network NAME = C0 <| C1 <| …`; written in `◁` order, so the last name
/// is the first component the input field meets.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkDecl {
    pub name: Ident,
    pub chain: Vec<Ident>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    /// `a(label)`
    Annihilate,
    /// `adag(label)`
    Create,
    /// `n(label)`
    Number,
    Dagger,
    Sqrt,
    /// `matrix(label, [[..], ..])`
    Matrix,
}

impl Func {
    pub fn keyword(self) -> &'static str {
        match self {
            Func::Annihilate => "a",
            Func::Create => "adag",
            Func::Number => "n",
            Func::Dagger => "dagger",
            Func::Sqrt => "sqrt",
            Func::Matrix => "matrix",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        Some(match s {
            "a" => Func::Annihilate,
            "adag" => Func::Create,
            "n" => Func::Number,
            "dagger" => Func::Dagger,
            "sqrt" => Func::Sqrt,
            "matrix" => Func::Matrix,
            _ => return None,
        })
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Matrix => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    /// Real literal, or imaginary literal when written with an `i` suffix.
    Number { value: f64, imaginary: bool },
    /// `I`, a signal name, or a factor label (as a function argument).
    Name(String),
    Call { func: Func, args: Vec<Expr> },
    List(Vec<Expr>),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
}
