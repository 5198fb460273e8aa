// Copyright 2026 The slhforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Recursive-descent parser for `.slh` netlists.
//!
//! ```text
//! file      := stmt*
//! stmt      := space | signal | component | network
//! space     := "space" factor ("," factor)*
//! factor    := ("fock" "(" "cutoff" "=" INT ")" | "generic" "(" "dim" "=" INT ")") "as" IDENT
//! signal    := "signal" IDENT "=" ( "constant" "(" expr ")"
//!                                 | "gaussian" "(" kwargs ")"
//!                                 | "exp" "(" kwargs ")"
//!                                 | "table" "(" STRING ")" )
//! component := "component" IDENT "=" KIND "(" kwargs ")"
//! network   := "network" IDENT "=" IDENT ("<|" IDENT)*
//! kwargs    := IDENT "=" arg ("," IDENT "=" arg)*
//! arg       := expr | "[" arg ("," arg)* "]"
//! expr      := term (("+" | "-") term)*
//! term      := unary ("*" unary)*
//! unary     := "-" unary | atom
//! atom      := NUMBER | IDENT | IDENT "(" arg ("," arg)* ")" | "(" expr ")"
//! ```
//!
//! Names are checked as they are declared: every reference must point to an
//! earlier declaration, and each name may be declared once.

use std::collections::HashMap;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::{ErrorKind, NetlistError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NameClass {
    Label,
    Signal,
    Component,
    Network,
}

impl NameClass {
    fn describe(self) -> &'static str {
        match self {
            NameClass::Label => "space factor",
            NameClass::Signal => "signal",
            NameClass::Component => "component",
            NameClass::Network => "network",
        }
    }
}

const STATEMENT_KEYWORDS: &str = "`space`, `signal`, `component`, `network`";
const RESERVED: &[&str] = &[
    "space", "signal", "component", "network", "as", "fock", "generic", "I", "a", "adag", "n",
    "dagger", "sqrt", "matrix", "HAM", "BS", "ADD", "SYS", "CAVITY", "constant", "gaussian", "exp",
    "table",
];

pub fn parse_netlist(text: &str) -> Result<Netlist, NetlistError> {
    let tokens = tokenize(text)?;
    Parser {
        tokens,
        pos: 0,
        names: HashMap::new(),
    }
    .file()
}

/// Parses a standalone operator expression whose names may refer to the
/// given space factor labels (and `I`).
pub fn parse_expression(text: &str, labels: &[&str]) -> Result<Expr, NetlistError> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        names: labels.iter().map(|l| (l.to_string(), NameClass::Label)).collect(),
    };
    let e = p.expr()?;
    if p.peek_tok() != &Tok::Eof {
        return Err(p.expected("end of expression"));
    }
    p.check_names(&e)?;
    Ok(e)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    names: HashMap<String, NameClass>,
}

fn syntax(span: Span, message: impl Into<String>) -> NetlistError {
    NetlistError {
        kind: ErrorKind::Syntax,
        span,
        message: message.into(),
    }
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_tok(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expected(&self, what: &str) -> NetlistError {
        let t = self.peek();
        syntax(t.span, format!("expected {what}, found {}", t.tok.describe()))
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek_tok() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<Span, NetlistError> {
        if self.peek_tok() == &tok {
            Ok(self.bump().span)
        } else {
            Err(self.expected(&format!("`{}`", tok.symbol())))
        }
    }

    fn ident(&mut self) -> Result<Ident, NetlistError> {
        match self.peek_tok().clone() {
            Tok::Ident(name) => {
                let span = self.bump().span;
                Ok(Ident { name, span })
            }
            _ => Err(self.expected("identifier")),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<Span, NetlistError> {
        match self.peek_tok() {
            Tok::Ident(s) if s == kw => Ok(self.bump().span),
            _ => Err(self.expected(&format!("`{kw}`"))),
        }
    }

    fn integer(&mut self) -> Result<usize, NetlistError> {
        match *self.peek_tok() {
            Tok::Number {
                value,
                imaginary: false,
            } if value.fract() == 0.0 && (0.0..1e9).contains(&value) => {
                self.bump();
                Ok(value as usize)
            }
            _ => Err(self.expected("non-negative integer")),
        }
    }

    fn declare(&mut self, ident: &Ident, class: NameClass) -> Result<(), NetlistError> {
        if RESERVED.contains(&ident.name.as_str()) {
            return Err(NetlistError {
                kind: ErrorKind::Name,
                span: ident.span,
                message: format!("`{}` is a reserved word", ident.name),
            });
        }
        if let Some(prev) = self.names.get(&ident.name) {
            return Err(NetlistError {
                kind: ErrorKind::Name,
                span: ident.span,
                message: format!(
                    "duplicate name `{}` (already declared as a {})",
                    ident.name,
                    prev.describe()
                ),
            });
        }
        self.names.insert(ident.name.clone(), class);
        Ok(())
    }

    fn require(&self, name: &str, span: Span, class: NameClass) -> Result<(), NetlistError> {
        match self.names.get(name) {
            Some(c) if *c == class => Ok(()),
            Some(c) => Err(NetlistError {
                kind: ErrorKind::Name,
                span,
                message: format!(
                    "`{name}` is a {}, expected a {}",
                    c.describe(),
                    class.describe()
                ),
            }),
            None => Err(NetlistError {
                kind: ErrorKind::Name,
                span,
                message: format!("undeclared {} `{name}`", class.describe()),
            }),
        }
    }

    fn file(mut self) -> Result<Netlist, NetlistError> {
        let mut space = None;
        let mut signals = Vec::new();
        let mut components = Vec::new();
        let mut network = None;
        loop {
            let tok = self.peek().clone();
            match &tok.tok {
                Tok::Eof => break,
                Tok::Ident(kw) if kw == "space" => {
                    if space.is_some() {
                        return Err(NetlistError {
                            kind: ErrorKind::Name,
                            span: tok.span,
                            message: "only one `space` declaration is allowed".into(),
                        });
                    }
                    space = Some(self.space_decl()?);
                }
                Tok::Ident(kw) if kw == "signal" => signals.push(self.signal_decl()?),
                Tok::Ident(kw) if kw == "component" => components.push(self.component_decl()?),
                Tok::Ident(kw) if kw == "network" => {
                    if network.is_some() {
                        return Err(NetlistError {
                            kind: ErrorKind::Name,
                            span: tok.span,
                            message: "only one `network` declaration is allowed".into(),
                        });
                    }
                    network = Some(self.network_decl()?);
                }
                _ => return Err(self.expected(&format!("one of {STATEMENT_KEYWORDS}"))),
            }
        }
        let eof = self.peek().span;
        let space = space.ok_or_else(|| syntax(eof, "missing `space` declaration"))?;
        let network = network.ok_or_else(|| syntax(eof, "missing `network` declaration"))?;
        Ok(Netlist {
            space,
            signals,
            components,
            network,
        })
    }

    fn space_decl(&mut self) -> Result<SpaceDecl, NetlistError> {
        let span = self.keyword("space")?;
        let mut factors = Vec::new();
        loop {
            let spec = match self.peek_tok() {
                Tok::Ident(k) if k == "fock" => {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    self.keyword("cutoff")?;
                    self.expect(Tok::Eq)?;
                    let cutoff = self.integer()?;
                    self.expect(Tok::RParen)?;
                    FactorSpec::Fock { cutoff }
                }
                Tok::Ident(k) if k == "generic" => {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    self.keyword("dim")?;
                    self.expect(Tok::Eq)?;
                    let at = self.peek().span;
                    let dim = self.integer()?;
                    if dim == 0 {
                        return Err(syntax(at, "dimension must be positive"));
                    }
                    self.expect(Tok::RParen)?;
                    FactorSpec::Generic { dim }
                }
                _ => return Err(self.expected("`fock` or `generic`")),
            };
            self.keyword("as")?;
            let label = self.ident()?;
            self.declare(&label, NameClass::Label)?;
            factors.push(FactorDecl { spec, label });
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(SpaceDecl { factors, span })
    }

    fn signal_decl(&mut self) -> Result<SignalDecl, NetlistError> {
        self.keyword("signal")?;
        let name = self.ident()?;
        self.expect(Tok::Eq)?;
        let form = self.ident()?;
        self.expect(Tok::LParen)?;
        let def = match form.name.as_str() {
            "constant" => {
                let e = self.expr()?;
                self.check_constant(&e)?;
                SignalDefExpr::Constant(e)
            }
            "gaussian" | "exp" => {
                let args = self.kwargs()?;
                let params: &[&str] = if form.name == "gaussian" {
                    &["amplitude", "center", "width"]
                } else {
                    &["amplitude", "frequency", "phase"]
                };
                check_kwargs(&form, &args, params)?;
                for a in &args {
                    self.check_constant(&a.value)?;
                }
                if form.name == "gaussian" {
                    SignalDefExpr::Gaussian { args }
                } else {
                    SignalDefExpr::Exponential { args }
                }
            }
            "table" => match self.peek_tok().clone() {
                Tok::Str(path) => {
                    let span = self.bump().span;
                    SignalDefExpr::Table { path, span }
                }
                _ => return Err(self.expected("string")),
            },
            _ => {
                return Err(syntax(
                    form.span,
                    format!(
                        "expected one of `constant`, `gaussian`, `exp`, `table`, found `{}`",
                        form.name
                    ),
                ))
            }
        };
        self.expect(Tok::RParen)?;
        self.declare(&name, NameClass::Signal)?;
        Ok(SignalDecl { name, def })
    }

    fn component_decl(&mut self) -> Result<ComponentDecl, NetlistError> {
        let span = self.keyword("component")?;
        let name = self.ident()?;
        self.expect(Tok::Eq)?;
        let kind_ident = self.ident()?;
        let kind = ComponentKind::from_keyword(&kind_ident.name).ok_or_else(|| {
            syntax(
                kind_ident.span,
                format!(
                    "expected one of `HAM`, `BS`, `ADD`, `SYS`, `CAVITY`, found `{}`",
                    kind_ident.name
                ),
            )
        })?;
        self.expect(Tok::LParen)?;
        let args = self.kwargs()?;
        self.expect(Tok::RParen)?;
        check_kwargs(&kind_ident, &args, kind.params())?;
        for arg in &args {
            if kind == ComponentKind::Cavity && arg.key.name == "mode" {
                match &arg.value.kind {
                    ExprKind::Name(label) => self.require(label, arg.value.span, NameClass::Label)?,
                    _ => return Err(syntax(arg.value.span, "expected a space factor label")),
                }
            } else {
                self.check_names(&arg.value)?;
            }
        }
        self.declare(&name, NameClass::Component)?;
        Ok(ComponentDecl {
            name,
            kind,
            args,
            span,
        })
    }

    fn network_decl(&mut self) -> Result<NetworkDecl, NetlistError> {
        self.keyword("network")?;
        let name = self.ident()?;
        self.expect(Tok::Eq)?;
        let mut chain = Vec::new();
        loop {
            let c = self.ident()?;
            self.require(&c.name, c.span, NameClass::Component)?;
            chain.push(c);
            if !self.eat(&Tok::Series) {
                break;
            }
        }
        self.declare(&name, NameClass::Network)?;
        Ok(NetworkDecl { name, chain })
    }

    fn kwargs(&mut self) -> Result<Vec<KwArg>, NetlistError> {
        let mut args = Vec::new();
        loop {
            let key = self.ident()?;
            self.expect(Tok::Eq)?;
            let value = self.arg()?;
            args.push(KwArg { key, value });
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(args)
    }

    fn arg(&mut self) -> Result<Expr, NetlistError> {
        if self.peek_tok() == &Tok::LBracket {
            let span = self.bump().span;
            let mut items = vec![self.arg()?];
            while self.eat(&Tok::Comma) {
                items.push(self.arg()?);
            }
            self.expect(Tok::RBracket)?;
            Ok(Expr {
                kind: ExprKind::List(items),
                span,
            })
        } else {
            self.expr()
        }
    }

    fn expr(&mut self) -> Result<Expr, NetlistError> {
        let mut lhs = self.term()?;
        loop {
            let op = self.peek_tok().clone();
            if op != Tok::Plus && op != Tok::Minus {
                break;
            }
            let span = self.bump().span;
            let rhs = self.term()?;
            let kind = if op == Tok::Plus {
                ExprKind::Add(Box::new(lhs), Box::new(rhs))
            } else {
                ExprKind::Sub(Box::new(lhs), Box::new(rhs))
            };
            lhs = Expr { kind, span };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, NetlistError> {
        let mut lhs = self.unary()?;
        while self.peek_tok() == &Tok::Star {
            let span = self.bump().span;
            let rhs = self.unary()?;
            lhs = Expr {
                kind: ExprKind::Mul(Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, NetlistError> {
        if self.peek_tok() == &Tok::Minus {
            let span = self.bump().span;
            let inner = self.unary()?;
            return Ok(Expr {
                kind: ExprKind::Neg(Box::new(inner)),
                span,
            });
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, NetlistError> {
        let tok = self.peek().clone();
        match tok.tok {
            Tok::Number { value, imaginary } => {
                self.bump();
                Ok(Expr {
                    kind: ExprKind::Number { value, imaginary },
                    span: tok.span,
                })
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if self.peek_tok() != &Tok::LParen {
                    return Ok(Expr {
                        kind: ExprKind::Name(name),
                        span: tok.span,
                    });
                }
                let func = Func::from_keyword(&name).ok_or_else(|| {
                    syntax(tok.span, format!("unknown function `{name}`"))
                })?;
                self.bump();
                let mut args = vec![self.arg()?];
                while self.eat(&Tok::Comma) {
                    args.push(self.arg()?);
                }
                self.expect(Tok::RParen)?;
                if args.len() != func.arity() {
                    return Err(NetlistError {
                        kind: ErrorKind::Arity,
                        span: tok.span,
                        message: format!(
                            "`{name}` takes {} argument{}, got {}",
                            func.arity(),
                            if func.arity() == 1 { "" } else { "s" },
                            args.len()
                        ),
                    });
                }
                if func == Func::Sqrt
                    && !matches!(args[0].kind, ExprKind::Number { imaginary: false, .. })
                {
                    return Err(syntax(args[0].span, "`sqrt` expects a real literal"));
                }
                Ok(Expr {
                    kind: ExprKind::Call { func, args },
                    span: tok.span,
                })
            }
            _ => Err(self.expected("expression")),
        }
    }

    /// Checks that every name in an operator expression was declared with
    /// the right class.
    fn check_names(&self, e: &Expr) -> Result<(), NetlistError> {
        match &e.kind {
            ExprKind::Number { .. } => Ok(()),
            ExprKind::Name(n) if n == "I" => Ok(()),
            ExprKind::Name(n) => self.require(n, e.span, NameClass::Signal),
            ExprKind::Call { func, args } => match func {
                Func::Annihilate | Func::Create | Func::Number | Func::Matrix => {
                    match &args[0].kind {
                        ExprKind::Name(label) => self.require(label, args[0].span, NameClass::Label)?,
                        _ => return Err(syntax(args[0].span, "expected a space factor label")),
                    }
                    if *func == Func::Matrix {
                        self.check_constant(&args[1])?;
                    }
                    Ok(())
                }
                Func::Dagger | Func::Sqrt => args.iter().try_for_each(|a| self.check_names(a)),
            },
            ExprKind::List(items) => items.iter().try_for_each(|a| self.check_names(a)),
            ExprKind::Neg(x) => self.check_names(x),
            ExprKind::Add(a, b) | ExprKind::Sub(a, b) | ExprKind::Mul(a, b) => {
                self.check_names(a)?;
                self.check_names(b)
            }
        }
    }

    /// Signal parameters and matrix entries may only use literals.
    fn check_constant(&self, e: &Expr) -> Result<(), NetlistError> {
        match &e.kind {
            ExprKind::Number { .. } => Ok(()),
            ExprKind::Name(n) => Err(NetlistError {
                kind: ErrorKind::Type,
                span: e.span,
                message: format!("`{n}` is not allowed here; expected a constant"),
            }),
            ExprKind::Call { func: Func::Sqrt, .. } => Ok(()),
            ExprKind::Call { func, .. } => Err(NetlistError {
                kind: ErrorKind::Type,
                span: e.span,
                message: format!("`{}` is not allowed here; expected a constant", func.keyword()),
            }),
            ExprKind::List(items) => items.iter().try_for_each(|a| self.check_constant(a)),
            ExprKind::Neg(x) => self.check_constant(x),
            ExprKind::Add(a, b) | ExprKind::Sub(a, b) | ExprKind::Mul(a, b) => {
                self.check_constant(a)?;
                self.check_constant(b)
            }
        }
    }
}

fn check_kwargs(owner: &Ident, args: &[KwArg], params: &[&str]) -> Result<(), NetlistError> {
    for (i, a) in args.iter().enumerate() {
        if !params.contains(&a.key.name.as_str()) {
            return Err(NetlistError {
                kind: ErrorKind::Arity,
                span: a.key.span,
                message: format!(
                    "`{}` has no parameter `{}` (expected {})",
                    owner.name,
                    a.key.name,
                    params.join(", ")
                ),
            });
        }
        if args[..i].iter().any(|b| b.key.name == a.key.name) {
            return Err(NetlistError {
                kind: ErrorKind::Arity,
                span: a.key.span,
                message: format!("parameter `{}` given twice", a.key.name),
            });
        }
    }
    if let Some(missing) = params.iter().find(|p| !args.iter().any(|a| a.key.name == **p)) {
        return Err(NetlistError {
            kind: ErrorKind::Arity,
            span: owner.span,
            message: format!("`{}` is missing parameter `{missing}`", owner.name),
        });
    }
    Ok(())
}
