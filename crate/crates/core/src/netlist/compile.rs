// Copyright 2026 The slhforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Typing and reduction of parsed netlists.

use std::path::Path;
use std::sync::Arc;

use crate::operator::{annihilator, creator, local_operator, number, CMatrix, Factor, HilbertSpace, Operator, C64};
use crate::poly::{OpPolynomial, DEFAULT_DEGREE_CAP};
use crate::signal::{SampledTable, Signal, SignalDef, SignalSet};
use crate::slh::{make_component, Component, SlhTriple};

use super::ast::*;
use super::{ErrorKind, NetlistError};

/// One step of a reduction: the running composite after folding in
/// `component`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionStep {
    pub component: String,
    pub summary: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReductionTrace {
    pub steps: Vec<ReductionStep>,
}

/// A typed netlist: the space, each declared component, and the chain as
/// indices into `components`.
#[derive(Debug, Clone)]
pub struct CompiledNetwork {
    pub space: Arc<HilbertSpace>,
    pub channels: usize,
    pub components: Vec<CompiledComponent>,
    pub chain: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct CompiledComponent {
    pub name: String,
    pub component: Component,
    pub triple: SlhTriple,
}

impl CompiledNetwork {
    /// Chain members in `◁` order.
    pub fn chain_components(&self) -> impl Iterator<Item = &CompiledComponent> {
        self.chain.iter().map(|&i| &self.components[i])
    }

    pub fn chain_triples(&self) -> Vec<SlhTriple> {
        self.chain_components().map(|c| c.triple.clone()).collect()
    }

    pub fn reduce(&self) -> Result<(SlhTriple, ReductionTrace), NetlistError> {
        let mut trace = ReductionTrace::default();
        let mut acc: Option<SlhTriple> = None;
        for c in self.chain_components() {
            let next = match acc {
                None => c.triple.clone(),
                Some(prev) => prev
                    .series_capped(&c.triple, DEFAULT_DEGREE_CAP)
                    .map_err(|e| reduction(Span::default(), format!("at `{}`: {e}", c.name)))?,
            };
            trace.steps.push(ReductionStep {
                component: c.name.clone(),
                summary: next.summary(),
            });
            acc = Some(next);
        }
        Ok((acc.expect("chain is non-empty"), trace))
    }
}

pub fn reduce_network(ast: &Netlist) -> Result<(SlhTriple, ReductionTrace), NetlistError> {
    compile_netlist(ast)?.reduce()
}

fn reduction(span: Span, message: impl Into<String>) -> NetlistError {
    NetlistError {
        kind: ErrorKind::Reduction,
        span,
        message: message.into(),
    }
}

fn type_error(span: Span, message: impl Into<String>) -> NetlistError {
    NetlistError {
        kind: ErrorKind::Type,
        span,
        message: message.into(),
    }
}

pub fn build_space(decl: &SpaceDecl) -> Result<Arc<HilbertSpace>, NetlistError> {
    let factors = decl
        .factors
        .iter()
        .map(|f| match f.spec {
            FactorSpec::Fock { cutoff } => Factor::fock(&f.label.name, cutoff),
            FactorSpec::Generic { dim } => Factor::generic(&f.label.name, dim),
        })
        .collect();
    HilbertSpace::new(factors).map_err(|e| reduction(decl.span, e.to_string()))
}

pub fn compile_netlist(ast: &Netlist) -> Result<CompiledNetwork, NetlistError> {
    let space = build_space(&ast.space)?;
    let signals: Vec<&str> = ast.signals.iter().map(|s| s.name.name.as_str()).collect();
    let typer = Typer {
        space: &space,
        signals: &signals,
    };

    let mut parsed = Vec::with_capacity(ast.components.len());
    for decl in &ast.components {
        parsed.push(typer.component(decl)?);
    }

    let mut chain = Vec::with_capacity(ast.network.chain.len());
    let mut channels: Option<(usize, &Ident)> = None;
    for member in &ast.network.chain {
        let idx = ast
            .components
            .iter()
            .position(|c| c.name.name == member.name)
            .expect("parser checked chain names");
        if let Some(n) = parsed[idx].channels() {
            match channels {
                Some((m, first)) if m != n => {
                    return Err(reduction(
                        member.span,
                        format!(
                            "channel-count mismatch: `{}` has {n} channel(s), `{}` has {m}",
                            member.name, first.name
                        ),
                    ))
                }
                None => channels = Some((n, member)),
                _ => {}
            }
        }
        chain.push(idx);
    }
    let channels = channels.map_or(1, |(n, _)| n);

    let mut components = Vec::with_capacity(parsed.len());
    for (decl, component) in ast.components.iter().zip(parsed) {
        let n = component.channels().unwrap_or(channels);
        let triple = make_component(&space, n, &component)
            .map_err(|e| reduction(decl.span, format!("component `{}`: {e}", decl.name.name)))?;
        components.push(CompiledComponent {
            name: decl.name.name.clone(),
            component,
            triple,
        });
    }
    Ok(CompiledNetwork {
        space,
        channels,
        components,
        chain,
    })
}

/// Types a signal-free operator expression on `space`.
pub fn compile_operator(e: &Expr, space: &Arc<HilbertSpace>) -> Result<Operator, NetlistError> {
    let typer = Typer { space, signals: &[] };
    let p = typer.poly(e)?;
    p.evaluate(0.0, &SignalSet::new())
        .map_err(|err| type_error(e.span, err.to_string()))
}

/// Loads signal definitions; table paths are resolved against `base_dir`.
pub fn load_bindings(ast: &Netlist, base_dir: &Path) -> Result<SignalSet, NetlistError> {
    let mut set = SignalSet::new();
    for decl in &ast.signals {
        let span = decl.name.span;
        let def = match &decl.def {
            SignalDefExpr::Constant(e) => SignalDef::Constant(scalar(e)?),
            SignalDefExpr::Gaussian { args } => SignalDef::GaussianPulse {
                amplitude: scalar(kwarg(args, "amplitude"))?,
                center: real(kwarg(args, "center"))?,
                width: real(kwarg(args, "width"))?,
            },
            SignalDefExpr::Exponential { args } => SignalDef::ComplexExponential {
                amplitude: scalar(kwarg(args, "amplitude"))?,
                frequency: real(kwarg(args, "frequency"))?,
                phase: real(kwarg(args, "phase"))?,
            },
            SignalDefExpr::Table { path, span } => {
                let table = SampledTable::from_csv_file(&base_dir.join(path)).map_err(|e| NetlistError {
                    kind: ErrorKind::Signal,
                    span: *span,
                    message: format!("table \"{path}\": {e}"),
                })?;
                SignalDef::Sampled(Arc::new(table))
            }
        };
        let signal = Signal::new(&decl.name.name, def).map_err(|e| NetlistError {
            kind: ErrorKind::Signal,
            span,
            message: e.to_string(),
        })?;
        set.insert(signal);
    }
    Ok(set)
}

fn kwarg<'a>(args: &'a [KwArg], key: &str) -> &'a Expr {
    &args
        .iter()
        .find(|a| a.key.name == key)
        .expect("parser checked keyword arguments")
        .value
}

/// Evaluates a constant expression.
fn scalar(e: &Expr) -> Result<C64, NetlistError> {
    Ok(match &e.kind {
        ExprKind::Number { value, imaginary: false } => C64::new(*value, 0.0),
        ExprKind::Number { value, imaginary: true } => C64::new(0.0, *value),
        ExprKind::Call { func: Func::Sqrt, args } => C64::new(scalar(&args[0])?.re.sqrt(), 0.0),
        ExprKind::Call { func: Func::Dagger, args } => scalar(&args[0])?.conj(),
        ExprKind::Neg(x) => -scalar(x)?,
        ExprKind::Add(a, b) => scalar(a)? + scalar(b)?,
        ExprKind::Sub(a, b) => scalar(a)? - scalar(b)?,
        ExprKind::Mul(a, b) => scalar(a)? * scalar(b)?,
        _ => return Err(type_error(e.span, "expected a constant")),
    })
}

fn real(e: &Expr) -> Result<f64, NetlistError> {
    let z = scalar(e)?;
    if z.im != 0.0 {
        return Err(type_error(e.span, format!("expected a real number, got {z}")));
    }
    Ok(z.re)
}

enum Value {
    Scalar(C64),
    Poly(OpPolynomial),
}

struct Typer<'a> {
    space: &'a Arc<HilbertSpace>,
    signals: &'a [&'a str],
}

impl Typer<'_> {
    fn component(&self, decl: &ComponentDecl) -> Result<Component, NetlistError> {
        let arg = |k: &str| decl.arg(k).expect("parser checked keyword arguments");
        Ok(match decl.kind {
            ComponentKind::Ham => Component::Ham(self.poly(arg("H"))?),
            ComponentKind::Bs => Component::BeamSplitter(self.matrix(arg("T"))?),
            ComponentKind::Add => Component::Add(self.vector(arg("u"))?),
            ComponentKind::Sys => Component::Sys(self.vector(arg("L"))?),
            ComponentKind::Cavity => {
                let mode = match &arg("mode").kind {
                    ExprKind::Name(m) => m.clone(),
                    _ => return Err(type_error(arg("mode").span, "expected a space factor label")),
                };
                Component::Cavity {
                    mode,
                    gamma: real(arg("gamma"))?,
                    omega: real(arg("omega"))?,
                }
            }
        })
    }

    fn poly(&self, e: &Expr) -> Result<OpPolynomial, NetlistError> {
        Ok(match self.value(e)? {
            Value::Scalar(c) => OpPolynomial::scalar(self.space.clone(), c),
            Value::Poly(p) => p,
        })
    }

    /// A list of operator expressions, or a bare expression for one channel.
    fn vector(&self, e: &Expr) -> Result<Vec<OpPolynomial>, NetlistError> {
        match &e.kind {
            ExprKind::List(items) => items.iter().map(|x| self.poly(x)).collect(),
            _ => Ok(vec![self.poly(e)?]),
        }
    }

    /// A c-number matrix `[[..], ..]`, or a bare scalar for one channel.
    fn matrix(&self, e: &Expr) -> Result<CMatrix, NetlistError> {
        match &e.kind {
            ExprKind::List(_) => constant_matrix(e),
            _ => Ok(CMatrix::from_elem((1, 1), scalar(e)?)),
        }
    }

    fn value(&self, e: &Expr) -> Result<Value, NetlistError> {
        let space = self.space;
        let op = |r: Result<crate::Operator, crate::operator::OperatorError>| {
            r.map(|o| Value::Poly(OpPolynomial::constant(&o)))
                .map_err(|err| type_error(e.span, err.to_string()))
        };
        match &e.kind {
            ExprKind::Number { .. } => Ok(Value::Scalar(scalar(e)?)),
            ExprKind::Name(n) if n == "I" => Ok(Value::Poly(OpPolynomial::identity(space.clone()))),
            ExprKind::Name(n) if self.signals.contains(&n.as_str()) => {
                Ok(Value::Poly(OpPolynomial::signal(space.clone(), n)))
            }
            ExprKind::Name(n) => Err(type_error(e.span, format!("`{n}` is not a value"))),
            ExprKind::List(_) => Err(type_error(e.span, "unexpected list")),
            ExprKind::Call { func, args } => match func {
                Func::Annihilate => op(annihilator(space, label(&args[0])?)),
                Func::Create => op(creator(space, label(&args[0])?)),
                Func::Number => op(number(space, label(&args[0])?)),
                Func::Matrix => {
                    let m = constant_matrix(&args[1])?;
                    op(local_operator(space, label(&args[0])?, &m))
                }
                Func::Sqrt => Ok(Value::Scalar(scalar(e)?)),
                Func::Dagger => Ok(match self.value(&args[0])? {
                    Value::Scalar(c) => Value::Scalar(c.conj()),
                    Value::Poly(p) => Value::Poly(p.dagger()),
                }),
            },
            ExprKind::Neg(x) => Ok(match self.value(x)? {
                Value::Scalar(c) => Value::Scalar(-c),
                Value::Poly(p) => Value::Poly(p.neg()),
            }),
            ExprKind::Add(a, b) | ExprKind::Sub(a, b) => {
                let sub = matches!(e.kind, ExprKind::Sub(..));
                match (self.value(a)?, self.value(b)?) {
                    (Value::Scalar(x), Value::Scalar(y)) => {
                        Ok(Value::Scalar(if sub { x - y } else { x + y }))
                    }
                    (x, y) => {
                        let (x, y) = (self.lift(x), self.lift(y));
                        let r = if sub { x.sub(&y) } else { x.add(&y) };
                        r.map(Value::Poly).map_err(|err| reduction(e.span, err.to_string()))
                    }
                }
            }
            ExprKind::Mul(a, b) => match (self.value(a)?, self.value(b)?) {
                (Value::Scalar(x), Value::Scalar(y)) => Ok(Value::Scalar(x * y)),
                (Value::Scalar(c), Value::Poly(p)) | (Value::Poly(p), Value::Scalar(c)) => {
                    Ok(Value::Poly(p.scale(c)))
                }
                (Value::Poly(x), Value::Poly(y)) => x
                    .mul_capped(&y, DEFAULT_DEGREE_CAP)
                    .map(Value::Poly)
                    .map_err(|err| reduction(e.span, err.to_string())),
            },
        }
    }

    fn lift(&self, v: Value) -> OpPolynomial {
        match v {
            Value::Scalar(c) => OpPolynomial::scalar(self.space.clone(), c),
            Value::Poly(p) => p,
        }
    }
}

fn label(e: &Expr) -> Result<&str, NetlistError> {
    match &e.kind {
        ExprKind::Name(n) => Ok(n),
        _ => Err(type_error(e.span, "expected a space factor label")),
    }
}

fn constant_matrix(e: &Expr) -> Result<CMatrix, NetlistError> {
    let rows = match &e.kind {
        ExprKind::List(rows) => rows,
        _ => return Err(type_error(e.span, "expected a matrix `[[..], ..]`")),
    };
    let mut data = Vec::new();
    let mut width = None;
    for row in rows {
        let cells = match &row.kind {
            ExprKind::List(cells) => cells,
            _ => return Err(type_error(row.span, "expected a matrix row `[..]`")),
        };
        if *width.get_or_insert(cells.len()) != cells.len() {
            return Err(type_error(row.span, "ragged matrix rows"));
        }
        for c in cells {
            data.push(scalar(c)?);
        }
    }
    CMatrix::from_shape_vec((rows.len(), width.unwrap_or(0)), data)
        .map_err(|err| type_error(e.span, err.to_string()))
}

#[cfg(test)]
mod tests {
    use super::super::parse_netlist;
    use super::*;

    fn reduce(src: &str) -> Result<SlhTriple, NetlistError> {
        reduce_network(&parse_netlist(src)?).map(|(g, _)| g)
    }

    #[test]
    fn single_ham_is_unchanged() {
        let g = reduce("space fock(cutoff=3) as c\ncomponent H = HAM(H=2*n(c))\nnetwork m = H\n").unwrap();
        let space = HilbertSpace::fock("c", 3);
        let h = OpPolynomial::constant(&number(&space, "c").unwrap()).scale(C64::new(2.0, 0.0));
        let expect = SlhTriple::ham(space, 1, h).unwrap();
        assert_eq!(g, expect);
    }

    #[test]
    fn opposite_signals_cancel() {
        let g = reduce(
            "space generic(dim=2) as q\nsignal u = constant(1)\n\
             component A = ADD(u=[u*I])\ncomponent B = ADD(u=[-u*I])\nnetwork m = A <| B\n",
        )
        .unwrap();
        let id = SlhTriple::identity(HilbertSpace::generic("q", 2), 1).unwrap();
        assert_eq!(g, id);
    }

    #[test]
    fn trace_has_one_step_per_member() {
        let ast = parse_netlist(
            "space fock(cutoff=2) as c\ncomponent G = CAVITY(mode=c, gamma=0.5, omega=1)\n\
             component B = BS(T=-1)\nnetwork m = B <| G <| B\n",
        )
        .unwrap();
        let (g, trace) = reduce_network(&ast).unwrap();
        assert_eq!(trace.steps.len(), 3);
        assert_eq!(trace.steps[2].summary, g.summary());
        assert_eq!(g.l()[0].degree(), 0);
    }

    #[test]
    fn channel_mismatch_is_a_reduction_error() {
        let err = reduce(
            "space generic(dim=2) as q\ncomponent A = SYS(L=[I, I])\ncomponent B = SYS(L=[I])\n\
             network m = A <| B\n",
        )
        .unwrap_err();
        assert_eq!(err.kind, ErrorKind::Reduction);
        assert_eq!((err.span.line, err.span.col), (4, 18));
    }

    #[test]
    fn number_operator_on_generic_factor_is_a_type_error() {
        let err = reduce("space generic(dim=2) as q\ncomponent H = HAM(H=n(q))\nnetwork m = H\n").unwrap_err();
        assert_eq!(err.kind, ErrorKind::Type);
    }

    #[test]
    fn non_unitary_splitter_is_rejected() {
        let err = reduce("space generic(dim=2) as q\ncomponent B = BS(T=[[1, 1], [0, 1]])\nnetwork m = B\n")
            .unwrap_err();
        assert_eq!(err.kind, ErrorKind::Reduction);
        assert!(err.message.contains("not unitary"), "{}", err.message);
    }
}
