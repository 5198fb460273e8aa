// Copyright 2026 The slhforge Authors
// SPDX-License-Identifier: Apache-2.0

//! SLH triples, component constructors and the series product.
//!
//! `g2.series(&g1)` is `g2 ◁ g1`: the output of `g1` feeds the input of `g2`
//! with zero delay, giving
//!
//! ```text
//! (S2 S1,  L2 + S2 L1,  H1 + H2 + Im(L2† S2 L1))
//! ```
//!
//! with `Im X = (X − X†)/(2i)`. Both operands must live on the same space;
//! feedback into the same physical system is expressed by reusing a space.

use std::sync::Arc;

use thiserror::Error;

use crate::operator::{annihilator, linalg, number, same_space, CMatrix, HilbertSpace, OperatorError, C64};
use crate::poly::{OpPolynomial, PolyError, DEFAULT_DEGREE_CAP};
use crate::signal::SignalSet;

/// Tolerance for the unitarity check of c-number beam-splitter matrices.
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SlhError {
    #[error("channel-count mismatch: {left} vs {right}")]
    ChannelMismatch { left: usize, right: usize },
    #[error("space mismatch: {0} vs {1}")]
    SpaceMismatch(String, String),
    #[error("matrix is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },
    #[error("Hamiltonian is not self-adjoint")]
    NotSelfAdjoint,
    #[error("damping rate must be non-negative, got {0}")]
    NegativeDamping(f64),
    #[error("signal entry {0} is not a c-number (multiple of the identity)")]
    NotCNumber(usize),
    #[error("shape error: {0}")]
    Shape(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// Markov component `(S, L, H)` with `n` field channels.
#[derive(Debug, Clone, PartialEq)]
pub struct SlhTriple {
    space: Arc<HilbertSpace>,
    s: Vec<Vec<OpPolynomial>>,
    l: Vec<OpPolynomial>,
    h: OpPolynomial,
}

/// Triple evaluated at one time: plain matrices.
#[derive(Debug, Clone)]
pub struct EvaluatedTriple {
    pub s: Vec<Vec<CMatrix>>,
    pub l: Vec<CMatrix>,
    pub h: CMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Component {
    Ham(OpPolynomial),
    BeamSplitter(CMatrix),
    Add(Vec<OpPolynomial>),
    Sys(Vec<OpPolynomial>),
    Cavity { mode: String, gamma: f64, omega: f64 },
}

impl Component {
    /// Channel count fixed by the component's arguments, if any.
    pub fn channels(&self) -> Option<usize> {
        match self {
            Component::Ham(_) => None,
            Component::BeamSplitter(t) => Some(t.nrows()),
            Component::Add(u) => Some(u.len()),
            Component::Sys(l) => Some(l.len()),
            Component::Cavity { .. } => Some(1),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Component::Ham(_) => "HAM",
            Component::BeamSplitter(_) => "BS",
            Component::Add(_) => "ADD",
            Component::Sys(_) => "SYS",
            Component::Cavity { .. } => "CAVITY",
        }
    }
}

/// Builds the triple of `component` on `space`. `channels` is used for
/// channel-agnostic components (HAM) and checked against the others.
pub fn make_component(
    space: &Arc<HilbertSpace>,
    channels: usize,
    component: &Component,
) -> Result<SlhTriple, SlhError> {
    if let Some(n) = component.channels() {
        if n != channels {
            return Err(SlhError::ChannelMismatch {
                left: n,
                right: channels,
            });
        }
    }
    match component {
        Component::Ham(h) => SlhTriple::ham(space.clone(), channels, h.clone()),
        Component::BeamSplitter(t) => SlhTriple::beam_splitter(space.clone(), t),
        Component::Add(u) => SlhTriple::add(space.clone(), u.clone()),
        Component::Sys(l) => SlhTriple::sys(space.clone(), l.clone()),
        Component::Cavity { mode, gamma, omega } => SlhTriple::cavity(space, mode, *gamma, *omega),
    }
}

fn poly_matmul(a: &[Vec<OpPolynomial>], b: &[Vec<OpPolynomial>], cap: u32) -> Result<Vec<Vec<OpPolynomial>>, PolyError> {
    let n = a.len();
    let space = a[0][0].space().clone();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut acc = OpPolynomial::zero(space.clone());
                    for k in 0..n {
                        acc = acc.add(&a[i][k].mul_capped(&b[k][j], cap)?)?;
                    }
                    Ok(acc)
                })
                .collect()
        })
        .collect()
}

fn poly_matvec(a: &[Vec<OpPolynomial>], v: &[OpPolynomial], cap: u32) -> Result<Vec<OpPolynomial>, PolyError> {
    let space = v[0].space().clone();
    a.iter()
        .map(|row| {
            let mut acc = OpPolynomial::zero(space.clone());
            for (s, x) in row.iter().zip(v) {
                acc = acc.add(&s.mul_capped(x, cap)?)?;
            }
            Ok(acc)
        })
        .collect()
}

fn c_number_matrix(space: &Arc<HilbertSpace>, t: &CMatrix) -> Vec<Vec<OpPolynomial>> {
    t.outer_iter()
        .map(|row| {
            row.iter()
                .map(|&z| OpPolynomial::scalar(space.clone(), z))
                .collect()
        })
        .collect()
}

fn unitary_defect(t: &CMatrix) -> f64 {
    let n = t.nrows();
    let eye = linalg::identity(n);
    let d = linalg::dagger(t);
    linalg::max_abs_diff(&t.dot(&d), &eye).max(linalg::max_abs_diff(&d.dot(t), &eye))
}

fn check_unitary(t: &CMatrix) -> Result<(), SlhError> {
    if t.nrows() != t.ncols() || t.nrows() == 0 {
        return Err(SlhError::Shape(format!(
            "beam-splitter matrix must be square and non-empty, got {}x{}",
            t.nrows(),
            t.ncols()
        )));
    }
    let defect = unitary_defect(t);
    if defect > UNITARY_TOL {
        return Err(SlhError::NotUnitary { defect });
    }
    Ok(())
}

impl SlhTriple {
    pub fn new(
        space: Arc<HilbertSpace>,
        s: Vec<Vec<OpPolynomial>>,
        l: Vec<OpPolynomial>,
        h: OpPolynomial,
    ) -> Result<Self, SlhError> {
        let n = l.len();
        if n == 0 {
            return Err(SlhError::Shape("at least one channel is required".into()));
        }
        if s.len() != n || s.iter().any(|row| row.len() != n) {
            return Err(SlhError::Shape(format!("S must be {n}x{n} to match L")));
        }
        for p in s.iter().flatten().chain(&l).chain(std::iter::once(&h)) {
            if !same_space(&space, p.space()) {
                return Err(SlhError::SpaceMismatch(space.to_string(), p.space().to_string()));
            }
        }
        if !h.is_formally_self_adjoint() {
            return Err(SlhError::NotSelfAdjoint);
        }
        Ok(Self { space, s, l, h })
    }

    /// `(I, 0, 0)` on `n` channels: the identity of the series product.
    pub fn identity(space: Arc<HilbertSpace>, n: usize) -> Result<Self, SlhError> {
        Self::ham(space.clone(), n, OpPolynomial::zero(space))
    }

    /// `HAM(H) = (I, 0, H)`.
    pub fn ham(space: Arc<HilbertSpace>, n: usize, h: OpPolynomial) -> Result<Self, SlhError> {
        let s = c_number_matrix(&space, &linalg::identity(n));
        let l = vec![OpPolynomial::zero(space.clone()); n];
        Self::new(space, s, l, h)
    }

    /// `BS(T) = (T, 0, 0)` for a unitary c-number matrix `T`.
    pub fn beam_splitter(space: Arc<HilbertSpace>, t: &CMatrix) -> Result<Self, SlhError> {
        check_unitary(t)?;
        let n = t.nrows();
        let s = c_number_matrix(&space, t);
        let l = vec![OpPolynomial::zero(space.clone()); n];
        let h = OpPolynomial::zero(space.clone());
        Self::new(space, s, l, h)
    }

    /// `ADD(u) = (I, u, 0)`; every entry of `u` must be a c-number polynomial.
    pub fn add(space: Arc<HilbertSpace>, u: Vec<OpPolynomial>) -> Result<Self, SlhError> {
        if let Some(i) = u.iter().position(|p| !p.is_c_number()) {
            return Err(SlhError::NotCNumber(i));
        }
        Self::sys(space, u)
    }

    /// `SYS(L) = (I, L, 0)`.
    pub fn sys(space: Arc<HilbertSpace>, l: Vec<OpPolynomial>) -> Result<Self, SlhError> {
        let n = l.len();
        let s = c_number_matrix(&space, &linalg::identity(n.max(1)));
        let h = OpPolynomial::zero(space.clone());
        Self::new(space, s, l, h)
    }

    /// Damped cavity mode `(I, √γ a, ω a†a)` on the Fock factor `mode`.
    pub fn cavity(space: &Arc<HilbertSpace>, mode: &str, gamma: f64, omega: f64) -> Result<Self, SlhError> {
        if !(gamma >= 0.0) {
            return Err(SlhError::NegativeDamping(gamma));
        }
        let a = annihilator(space, mode)?;
        let n = number(space, mode)?;
        let l = OpPolynomial::constant(&a.scale(C64::new(gamma.sqrt(), 0.0)));
        let h = OpPolynomial::constant(&n.scale(C64::new(omega, 0.0)));
        let s = c_number_matrix(space, &linalg::identity(1));
        Self::new(space.clone(), s, vec![l], h)
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn channels(&self) -> usize {
        self.l.len()
    }

    pub fn s(&self) -> &[Vec<OpPolynomial>] {
        &self.s
    }

    pub fn l(&self) -> &[OpPolynomial] {
        &self.l
    }

    pub fn h(&self) -> &OpPolynomial {
        &self.h
    }

    /// All coupling entries are exactly the zero polynomial.
    pub fn l_is_zero(&self) -> bool {
        self.l.iter().all(OpPolynomial::is_zero)
    }

    pub fn max_degree(&self) -> u32 {
        self.s
            .iter()
            .flatten()
            .chain(&self.l)
            .chain(std::iter::once(&self.h))
            .map(OpPolynomial::degree)
            .max()
            .unwrap_or(0)
    }

    fn check_compatible(&self, other: &Self) -> Result<(), SlhError> {
        if self.channels() != other.channels() {
            return Err(SlhError::ChannelMismatch {
                left: self.channels(),
                right: other.channels(),
            });
        }
        if !same_space(&self.space, &other.space) {
            return Err(SlhError::SpaceMismatch(
                self.space.to_string(),
                other.space.to_string(),
            ));
        }
        Ok(())
    }

    /// `self ◁ first`: `first`'s output is fed into `self`.
    pub fn series(&self, first: &Self) -> Result<Self, SlhError> {
        self.series_capped(first, DEFAULT_DEGREE_CAP)
    }

    pub fn series_capped(&self, first: &Self, cap: u32) -> Result<Self, SlhError> {
        self.check_compatible(first)?;
        let s = poly_matmul(&self.s, &first.s, cap)?;
        let s2_l1 = poly_matvec(&self.s, &first.l, cap)?;
        let l = self
            .l
            .iter()
            .zip(&s2_l1)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>, _>>()?;
        let mut cross = OpPolynomial::zero(self.space.clone());
        for (l2, x) in self.l.iter().zip(&s2_l1) {
            cross = cross.add(&l2.dagger().mul_capped(x, cap)?)?;
        }
        let h = first.h.add(&self.h)?.add(&cross.imag())?;
        Ok(Self {
            space: self.space.clone(),
            s,
            l,
            h,
        })
    }

    /// `(T⁻¹, 0, 0) ◁ self ◁ (T, 0, 0) = (T⁻¹ S T, T⁻¹ L, H)`, computed
    /// directly. `T⁻¹` is taken as `T†`.
    pub fn splitter_conjugate(&self, t: &CMatrix) -> Result<Self, SlhError> {
        check_unitary(t)?;
        if t.nrows() != self.channels() {
            return Err(SlhError::ChannelMismatch {
                left: t.nrows(),
                right: self.channels(),
            });
        }
        let t_inv = c_number_matrix(&self.space, &linalg::dagger(t));
        let t_poly = c_number_matrix(&self.space, t);
        let cap = u32::MAX;
        let s = poly_matmul(&poly_matmul(&t_inv, &self.s, cap)?, &t_poly, cap)?;
        let l = poly_matvec(&t_inv, &self.l, cap)?;
        Ok(Self {
            space: self.space.clone(),
            s,
            l,
            h: self.h.clone(),
        })
    }

    pub fn evaluate(&self, t: f64, bindings: &SignalSet) -> Result<EvaluatedTriple, SlhError> {
        let s = self
            .s
            .iter()
            .map(|row| row.iter().map(|p| p.evaluate_matrix(t, bindings)).collect())
            .collect::<Result<Vec<Vec<_>>, _>>()?;
        let l = self
            .l
            .iter()
            .map(|p| p.evaluate_matrix(t, bindings))
            .collect::<Result<Vec<_>, _>>()?;
        let h = self.h.evaluate_matrix(t, bindings)?;
        Ok(EvaluatedTriple { s, l, h })
    }

    /// Spot checks at `probe_times`: S unitary, H formally self-adjoint, and
    /// whether L vanished.
    pub fn validate(&self, probe_times: &[f64], bindings: &SignalSet, tol: f64) -> Result<Validation, SlhError> {
        let s_signal_dependent = self.s.iter().flatten().any(OpPolynomial::has_signals);
        if s_signal_dependent {
            log::warn!("scattering matrix depends on signals; no standard component produces this");
        }
        let mut s_defect: f64 = 0.0;
        for &t in probe_times {
            let ev = self.evaluate(t, bindings)?;
            s_defect = s_defect.max(linalg::channel_unitarity_defect(&ev.s));
        }
        Ok(Validation {
            s_unitary: s_defect <= tol,
            s_defect,
            h_self_adjoint: self.h.is_formally_self_adjoint(),
            l_zero: self.l_is_zero(),
            s_signal_dependent,
            probe_times: probe_times.to_vec(),
        })
    }

    /// Entries in a fixed order with their names, for comparisons and reports.
    pub fn entries(&self) -> Vec<(String, &OpPolynomial)> {
        let mut out = Vec::new();
        for (i, row) in self.s.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                out.push((format!("S[{i}][{j}]"), p));
            }
        }
        for (i, p) in self.l.iter().enumerate() {
            out.push((format!("L[{i}]"), p));
        }
        out.push(("H".into(), &self.h));
        out
    }

    /// One-line symbolic summary used in reduction traces.
    pub fn summary(&self) -> String {
        let s = self
            .s
            .iter()
            .map(|row| row.iter().map(OpPolynomial::summary).collect::<Vec<_>>().join(", "))
            .collect::<Vec<_>>()
            .join("; ");
        let l = self.l.iter().map(OpPolynomial::summary).collect::<Vec<_>>().join(", ");
        format!("S=[{s}] L=[{l}] H={}", self.h.summary())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Validation {
    pub s_unitary: bool,
    pub s_defect: f64,
    pub h_self_adjoint: bool,
    pub l_zero: bool,
    pub s_signal_dependent: bool,
    pub probe_times: Vec<f64>,
}

impl Validation {
    pub fn passed(&self) -> bool {
        self.s_unitary && self.h_self_adjoint
    }
}

/// Left fold `((c0 ◁ c1) ◁ c2) ◁ …` over a chain written in `◁` order.
pub fn series_chain(components: &[SlhTriple]) -> Result<SlhTriple, SlhError> {
    series_chain_capped(components, DEFAULT_DEGREE_CAP)
}

pub fn series_chain_capped(components: &[SlhTriple], cap: u32) -> Result<SlhTriple, SlhError> {
    let (first, rest) = components
        .split_first()
        .ok_or_else(|| SlhError::Shape("empty chain".into()))?;
    rest.iter()
        .try_fold(first.clone(), |acc, g| acc.series_capped(g, cap))
}

/// Right fold `c0 ◁ (c1 ◁ (… ◁ cN))`.
pub fn series_chain_right(components: &[SlhTriple]) -> Result<SlhTriple, SlhError> {
    let (last, rest) = components
        .split_last()
        .ok_or_else(|| SlhError::Shape("empty chain".into()))?;
    rest.iter()
        .rev()
        .try_fold(last.clone(), |acc, g| g.series(&acc))
}

/// `c·I` entries for each named signal.
pub fn signal_vector(space: &Arc<HilbertSpace>, names: &[&str]) -> Vec<OpPolynomial> {
    names
        .iter()
        .map(|n| OpPolynomial::signal(space.clone(), n))
        .collect()
}

/// `Im(L†u) = (L†u − u†L)/(2i)` summed over channels.
pub fn coupling_signal_term(l: &[OpPolynomial], u: &[OpPolynomial]) -> Result<OpPolynomial, SlhError> {
    let space = l
        .first()
        .ok_or_else(|| SlhError::Shape("empty coupling vector".into()))?
        .space()
        .clone();
    if l.len() != u.len() {
        return Err(SlhError::ChannelMismatch {
            left: l.len(),
            right: u.len(),
        });
    }
    let mut acc = OpPolynomial::zero(space);
    for (lj, uj) in l.iter().zip(u) {
        acc = acc.add(&lj.dagger().mul(uj)?)?;
    }
    Ok(acc.imag())
}

/// The feedback chain, in `◁` order:
/// `HAM(H0) ◁ ADD(u) ◁ BS(−I) ◁ SYS(L) ◁ BS(−I) ◁ ADD(−u) ◁ SYS(L)`.
pub fn cancellation_chain(
    l: &[OpPolynomial],
    h0: &OpPolynomial,
    u: &[OpPolynomial],
) -> Result<Vec<SlhTriple>, SlhError> {
    let n = l.len();
    if u.len() != n {
        return Err(SlhError::ChannelMismatch { left: n, right: u.len() });
    }
    let space = h0.space().clone();
    let minus = linalg::identity(n).mapv(|z| -z);
    let neg_u: Vec<_> = u.iter().map(OpPolynomial::neg).collect();
    Ok(vec![
        SlhTriple::ham(space.clone(), n, h0.clone())?,
        SlhTriple::add(space.clone(), u.to_vec())?,
        SlhTriple::beam_splitter(space.clone(), &minus)?,
        SlhTriple::sys(space.clone(), l.to_vec())?,
        SlhTriple::beam_splitter(space.clone(), &minus)?,
        SlhTriple::add(space.clone(), neg_u)?,
        SlhTriple::sys(space, l.to_vec())?,
    ])
}

pub fn build_cancellation_chain(
    l: &[OpPolynomial],
    h0: &OpPolynomial,
    u: &[OpPolynomial],
) -> Result<SlhTriple, SlhError> {
    series_chain(&cancellation_chain(l, h0, u)?)
}

/// `(I, −u, 0) ◁ (T, L, H0) ◁ (I, T⁻¹u, 0)`, in `◁` order.
pub fn noisy_construction(
    t: &CMatrix,
    l: &[OpPolynomial],
    h0: &OpPolynomial,
    u: &[OpPolynomial],
) -> Result<Vec<SlhTriple>, SlhError> {
    check_unitary(t)?;
    let n = l.len();
    if u.len() != n || t.nrows() != n {
        return Err(SlhError::ChannelMismatch { left: n, right: u.len() });
    }
    let space = h0.space().clone();
    let t_poly = c_number_matrix(&space, t);
    let t_inv = c_number_matrix(&space, &linalg::dagger(t));
    let middle = SlhTriple::new(space.clone(), t_poly, l.to_vec(), h0.clone())?;
    let rotated = poly_matvec(&t_inv, u, DEFAULT_DEGREE_CAP)?;
    Ok(vec![
        SlhTriple::add(space.clone(), u.iter().map(OpPolynomial::neg).collect())?,
        middle,
        SlhTriple::add(space, rotated)?,
    ])
}

pub fn build_noisy_construction(
    t: &CMatrix,
    l: &[OpPolynomial],
    h0: &OpPolynomial,
    u: &[OpPolynomial],
) -> Result<SlhTriple, SlhError> {
    series_chain(&noisy_construction(t, l, h0, u)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchLevel {
    /// Canonical forms are identical.
    Exact,
    /// Same monomials, coefficients within tolerance.
    Coefficients,
    /// Only agree numerically at the probe points.
    Probes,
    Different,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub level: MatchLevel,
    pub report: String,
}

impl Comparison {
    pub fn equal(&self) -> bool {
        self.level != MatchLevel::Different
    }
}

/// Symbolic comparison first, falling back to numeric evaluation at the probe
/// times. The report names the first differing entry.
pub fn triples_approx_equal(
    g1: &SlhTriple,
    g2: &SlhTriple,
    tol: f64,
    probe_times: &[f64],
    bindings: &SignalSet,
) -> Comparison {
    if let Err(e) = g1.check_compatible(g2) {
        return Comparison {
            level: MatchLevel::Different,
            report: e.to_string(),
        };
    }
    if g1 == g2 {
        return Comparison {
            level: MatchLevel::Exact,
            report: "identical canonical forms".into(),
        };
    }
    let mut first_symbolic = None;
    for ((name, p), (_, q)) in g1.entries().into_iter().zip(g2.entries()) {
        let (diff, mono) = p.max_coefficient_diff(q).expect("spaces checked");
        if diff > tol {
            let mono = mono.map(|m| m.to_string()).unwrap_or_default();
            first_symbolic = Some(format!("{name} coefficient of `{mono}` differs by {diff:.3e}"));
            break;
        }
    }
    let Some(symbolic_report) = first_symbolic else {
        return Comparison {
            level: MatchLevel::Coefficients,
            report: format!("coefficients agree within {tol:.1e}"),
        };
    };
    if probe_times.is_empty() {
        return Comparison {
            level: MatchLevel::Different,
            report: symbolic_report,
        };
    }
    for &t in probe_times {
        for ((name, p), (_, q)) in g1.entries().into_iter().zip(g2.entries()) {
            let diff = match (p.evaluate_matrix(t, bindings), q.evaluate_matrix(t, bindings)) {
                (Ok(a), Ok(b)) => linalg::max_abs_diff(&a, &b),
                (Err(e), _) | (_, Err(e)) => {
                    return Comparison {
                        level: MatchLevel::Different,
                        report: format!("{name} at t={t}: {e}"),
                    }
                }
            };
            if diff > tol {
                return Comparison {
                    level: MatchLevel::Different,
                    report: format!("{name} at t={t} differs by {diff:.3e} ({symbolic_report})"),
                };
            }
        }
    }
    Comparison {
        level: MatchLevel::Probes,
        report: format!("agree at probe times within {tol:.1e} ({symbolic_report})"),
    }
}
