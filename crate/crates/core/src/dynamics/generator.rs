// Copyright 2026 The slhforge Authors
// SPDX-License-Identifier: Apache-2.0

// Block-matrix formulas read closer to the math with explicit indices.
#![allow(clippy::needless_range_loop)]

use std::sync::Arc;

use crate::operator::{linalg, CMatrix, HilbertSpace, C64};
use crate::poly::OpPolynomial;
use crate::signal::SignalSet;
use crate::slh::{EvaluatedTriple, SlhTriple};

use super::DynamicsError;

/// Right-hand side of a linear ODE on density matrices.
pub trait Generator {
    fn space(&self) -> &Arc<HilbertSpace>;
    fn rhs(&self, t: f64, rho: &CMatrix) -> Result<CMatrix, DynamicsError>;
}

/// `−i[H, ρ] + Σ_i (L_i ρ L_i† − ½{L_i† L_i, ρ})`.
pub fn lindblad_rhs(rho: &CMatrix, h: &CMatrix, l: &[CMatrix]) -> CMatrix {
    let mut k = h.mapv(|z| z * C64::new(0.0, -1.0));
    for li in l {
        if !linalg::is_zero(li) {
            k = k - linalg::dagger(li).dot(li).mapv(|z| z * 0.5);
        }
    }
    let mut out = k.dot(rho) + rho.dot(&linalg::dagger(&k));
    for li in l {
        if !linalg::is_zero(li) {
            out = out + linalg::mul(&linalg::mul(li, rho), &linalg::dagger(li));
        }
    }
    out
}

/// Vacuum-driven master equation of a (reduced) triple.
#[derive(Debug, Clone)]
pub struct TripleGenerator {
    triple: SlhTriple,
    bindings: SignalSet,
}

impl TripleGenerator {
    pub fn new(triple: SlhTriple, bindings: SignalSet) -> Self {
        Self { triple, bindings }
    }

    pub fn triple(&self) -> &SlhTriple {
        &self.triple
    }
}

impl Generator for TripleGenerator {
    fn space(&self) -> &Arc<HilbertSpace> {
        self.triple.space()
    }

    fn rhs(&self, t: f64, rho: &CMatrix) -> Result<CMatrix, DynamicsError> {
        let h = self.triple.h().evaluate_matrix(t, &self.bindings)?;
        let l = self
            .triple
            .l()
            .iter()
            .map(|p| p.evaluate_matrix(t, &self.bindings))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(lindblad_rhs(rho, &h, &l))
    }
}

/// `−iH(t)ρ`, for closed evolution of a vector stored as a column.
#[derive(Debug, Clone)]
pub struct HamiltonianGenerator {
    h: OpPolynomial,
    bindings: SignalSet,
}

impl HamiltonianGenerator {
    pub fn new(h: OpPolynomial, bindings: SignalSet) -> Self {
        Self { h, bindings }
    }
}

impl Generator for HamiltonianGenerator {
    fn space(&self) -> &Arc<HilbertSpace> {
        self.h.space()
    }

    fn rhs(&self, t: f64, psi: &CMatrix) -> Result<CMatrix, DynamicsError> {
        let h = self.h.evaluate_matrix(t, &self.bindings)?;
        Ok(h.dot(psi).mapv(|z| z * C64::new(0.0, -1.0)))
    }
}

/// Linear map `X ↦ A·X + X·B + Σ_k C_k X D_k` on operators.
///
/// Sandwiches whose outer factor is an exact multiple of the identity are
/// folded into `A` or `B`, which keeps c-number scattering cheap. Absent
/// `A`/`B` are zero.
#[derive(Debug, Clone, Default)]
pub struct SuperOp {
    left: Option<CMatrix>,
    right: Option<CMatrix>,
    sandwiches: Vec<(CMatrix, CMatrix)>,
}

fn accumulate(slot: &mut Option<CMatrix>, m: CMatrix) {
    if linalg::is_zero(&m) {
        return;
    }
    let sum = match slot.take() {
        Some(acc) => acc + m,
        None => m,
    };
    *slot = (!linalg::is_zero(&sum)).then_some(sum);
}

fn scale(m: &CMatrix, z: C64) -> CMatrix {
    m.mapv(|x| x * z)
}

impl SuperOp {
    fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.left.is_none() && self.right.is_none() && self.sandwiches.is_empty()
    }

    fn push_sandwich(&mut self, c: CMatrix, d: CMatrix) {
        if linalg::is_zero(&c) || linalg::is_zero(&d) {
            return;
        }
        match (linalg::scalar_identity(&c), linalg::scalar_identity(&d)) {
            (Some(_), Some(y)) => accumulate(&mut self.left, scale(&c, y)),
            (Some(x), None) => accumulate(&mut self.right, scale(&d, x)),
            (None, Some(y)) => accumulate(&mut self.left, scale(&c, y)),
            (None, None) => self.sandwiches.push((c, d)),
        }
    }

    fn add_left(&mut self, a: CMatrix) {
        accumulate(&mut self.left, a);
    }

    fn add_right(&mut self, b: CMatrix) {
        accumulate(&mut self.right, b);
    }

    fn add(&mut self, other: SuperOp) {
        if let Some(l) = other.left {
            accumulate(&mut self.left, l);
        }
        if let Some(r) = other.right {
            accumulate(&mut self.right, r);
        }
        for (c, d) in other.sandwiches {
            self.push_sandwich(c, d);
        }
    }

    fn scaled(&self, z: C64) -> SuperOp {
        if z == C64::new(0.0, 0.0) {
            return SuperOp::zero();
        }
        SuperOp {
            left: self.left.as_ref().map(|m| scale(m, z)),
            right: self.right.as_ref().map(|m| scale(m, z)),
            sandwiches: self
                .sandwiches
                .iter()
                .map(|(c, d)| (scale(c, z), d.clone()))
                .collect(),
        }
    }

    /// `X ↦ P·self(X)`.
    fn premul(&self, p: &CMatrix) -> SuperOp {
        if self.is_zero() {
            return SuperOp::zero();
        }
        if let Some(z) = linalg::scalar_identity(p) {
            return self.scaled(z);
        }
        let mut out = SuperOp::zero();
        if let Some(l) = &self.left {
            out.add_left(p.dot(l));
        }
        if let Some(r) = &self.right {
            out.push_sandwich(p.clone(), r.clone());
        }
        for (c, d) in &self.sandwiches {
            out.push_sandwich(p.dot(c), d.clone());
        }
        out
    }

    /// `X ↦ self(X)·Q`.
    fn postmul(&self, q: &CMatrix) -> SuperOp {
        if self.is_zero() {
            return SuperOp::zero();
        }
        if let Some(z) = linalg::scalar_identity(q) {
            return self.scaled(z);
        }
        let mut out = SuperOp::zero();
        if let Some(r) = &self.right {
            out.add_right(r.dot(q));
        }
        if let Some(l) = &self.left {
            out.push_sandwich(l.clone(), q.clone());
        }
        for (c, d) in &self.sandwiches {
            out.push_sandwich(c.clone(), d.dot(q));
        }
        out
    }

    /// Heisenberg action on `x`.
    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(x.dim());
        if let Some(l) = &self.left {
            out = out + l.dot(x);
        }
        if let Some(r) = &self.right {
            out = out + x.dot(r);
        }
        for (c, d) in &self.sandwiches {
            out = out + c.dot(x).dot(d);
        }
        out
    }

    /// Dual action on a state: `tr(dual(ρ) X) = tr(ρ apply(X))`.
    pub fn dual(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(rho.dim());
        if let Some(l) = &self.left {
            out = out + rho.dot(l);
        }
        if let Some(r) = &self.right {
            out = out + r.dot(rho);
        }
        for (c, d) in &self.sandwiches {
            out = out + d.dot(rho).dot(c);
        }
        out
    }

    pub fn sandwich_count(&self) -> usize {
        self.sandwiches.len()
    }
}

/// Heisenberg-picture generator data of a component or cascade, evaluated at
/// one time: `𝒮_ij`, `𝒥_i`, `𝒦_j`, `𝓛` together with the composite `S`, `L`
/// needed to fold in further components.
#[derive(Debug, Clone)]
pub struct HeisenbergGenerator {
    s_super: Vec<Vec<SuperOp>>,
    j_super: Vec<SuperOp>,
    k_super: Vec<SuperOp>,
    lindbladian: SuperOp,
    s: Vec<Vec<CMatrix>>,
    l: Vec<CMatrix>,
}

impl HeisenbergGenerator {
    /// Generators of a single component:
    ///
    /// ```text
    /// 𝒮_ij(X) = Σ_k S_ki† X S_kj − δ_ij X
    /// 𝒥_i(X)  = Σ_j S_ji† [X, L_j]
    /// 𝒦_j(X)  = Σ_i [L_i†, X] S_ij
    /// 𝓛(X)    = ½Σ L_i†[X, L_i] + ½Σ [L_i†, X] L_i − i[X, H]
    /// ```
    pub fn component(g: &EvaluatedTriple) -> Self {
        let n = g.l.len();
        let d = g.h.nrows();
        let sd: Vec<Vec<CMatrix>> = g.s.iter().map(|row| row.iter().map(linalg::dagger).collect()).collect();
        let ld: Vec<CMatrix> = g.l.iter().map(linalg::dagger).collect();

        let mut s_super = vec![vec![SuperOp::zero(); n]; n];
        for (i, row) in s_super.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                for k in 0..n {
                    slot.push_sandwich(sd[k][i].clone(), g.s[k][j].clone());
                }
                if i == j {
                    slot.add_left(linalg::identity(d).mapv(|z| -z));
                }
            }
        }

        let mut j_super = vec![SuperOp::zero(); n];
        for (i, slot) in j_super.iter_mut().enumerate() {
            for j in 0..n {
                slot.push_sandwich(sd[j][i].clone(), g.l[j].clone());
                slot.add_left(linalg::mul(&sd[j][i], &g.l[j]).mapv(|z| -z));
            }
        }

        let mut k_super = vec![SuperOp::zero(); n];
        for (j, slot) in k_super.iter_mut().enumerate() {
            for i in 0..n {
                slot.push_sandwich(ld[i].clone(), g.s[i][j].clone());
                slot.add_right(linalg::mul(&ld[i], &g.s[i][j]).mapv(|z| -z));
            }
        }

        let mut lindbladian = SuperOp::zero();
        let mut ldl = CMatrix::zeros((d, d));
        for i in 0..n {
            lindbladian.push_sandwich(ld[i].clone(), g.l[i].clone());
            ldl = ldl + linalg::mul(&ld[i], &g.l[i]);
        }
        let ih = g.h.mapv(|z| z * C64::new(0.0, 1.0));
        let half = ldl.mapv(|z| z * 0.5);
        lindbladian.add_left(&ih - &half);
        lindbladian.add_right(-&ih - &half);

        Self {
            s_super,
            j_super,
            k_super,
            lindbladian,
            s: g.s.clone(),
            l: g.l.clone(),
        }
    }

    /// Generators of `second ◁ self`, where `self` is met first by the
    /// field:
    ///
    /// ```text
    /// 𝒮 = 𝒮1 + S1†𝒮2S1
    /// 𝒥 = 𝒥1 + S1†𝒥2 + S1†𝒮2L1
    /// 𝒦 = 𝒦1 + 𝒦2S1 + L1†𝒮2S1
    /// 𝓛 = 𝓛1 + 𝓛2 + L1†𝒥2 + 𝒦2L1 + L1†𝒮2L1
    /// ```
    pub fn cascade(&self, second: &HeisenbergGenerator) -> Self {
        let n = self.l.len();
        let d = self.l[0].nrows();
        let (s1, l1) = (&self.s, &self.l);
        let s1d: Vec<Vec<CMatrix>> = s1.iter().map(|row| row.iter().map(linalg::dagger).collect()).collect();
        let l1d: Vec<CMatrix> = l1.iter().map(linalg::dagger).collect();

        // S1†𝒮2 as a matrix of superoperators, shared by three terms.
        let mut s1d_s2 = vec![vec![SuperOp::zero(); n]; n];
        for (i, row) in s1d_s2.iter_mut().enumerate() {
            for (l, slot) in row.iter_mut().enumerate() {
                for k in 0..n {
                    slot.add(second.s_super[k][l].premul(&s1d[k][i]));
                }
            }
        }
        let mut l1d_s2 = vec![SuperOp::zero(); n];
        for (l, slot) in l1d_s2.iter_mut().enumerate() {
            for k in 0..n {
                slot.add(second.s_super[k][l].premul(&l1d[k]));
            }
        }

        let mut s_super = self.s_super.clone();
        for (i, row) in s_super.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                for l in 0..n {
                    slot.add(s1d_s2[i][l].postmul(&s1[l][j]));
                }
            }
        }

        let mut j_super = self.j_super.clone();
        for (i, slot) in j_super.iter_mut().enumerate() {
            for k in 0..n {
                slot.add(second.j_super[k].premul(&s1d[k][i]));
            }
            for l in 0..n {
                slot.add(s1d_s2[i][l].postmul(&l1[l]));
            }
        }

        let mut k_super = self.k_super.clone();
        for (j, slot) in k_super.iter_mut().enumerate() {
            for k in 0..n {
                slot.add(second.k_super[k].postmul(&s1[k][j]));
            }
            for l in 0..n {
                slot.add(l1d_s2[l].postmul(&s1[l][j]));
            }
        }

        let mut lindbladian = self.lindbladian.clone();
        lindbladian.add(second.lindbladian.clone());
        for k in 0..n {
            lindbladian.add(second.j_super[k].premul(&l1d[k]));
            lindbladian.add(second.k_super[k].postmul(&l1[k]));
            lindbladian.add(l1d_s2[k].postmul(&l1[k]));
        }

        let s = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (0..n).fold(CMatrix::zeros((d, d)), |acc, k| {
                            acc + linalg::mul(&second.s[i][k], &s1[k][j])
                        })
                    })
                    .collect()
            })
            .collect();
        let l = (0..n)
            .map(|i| {
                (0..n).fold(second.l[i].clone(), |acc, k| acc + linalg::mul(&second.s[i][k], &l1[k]))
            })
            .collect();

        Self {
            s_super,
            j_super,
            k_super,
            lindbladian,
            s,
            l,
        }
    }

    pub fn lindbladian(&self) -> &SuperOp {
        &self.lindbladian
    }

    /// Composite coupling vector.
    pub fn l(&self) -> &[CMatrix] {
        &self.l
    }

    pub fn s(&self) -> &[Vec<CMatrix>] {
        &self.s
    }
}

/// Master equation of an unreduced series chain, built by cascading the
/// Heisenberg generators of each member at every evaluation time. The
/// series product is never formed.
#[derive(Debug, Clone)]
pub struct CascadeGenerator {
    members: Vec<SlhTriple>,
    bindings: SignalSet,
    /// Generators of members that do not depend on signals.
    fixed: Vec<Option<HeisenbergGenerator>>,
}

impl CascadeGenerator {
    /// `members` in `◁` order: the last one is met first by the field.
    pub fn new(members: Vec<SlhTriple>, bindings: SignalSet) -> Result<Self, DynamicsError> {
        let first = members
            .first()
            .ok_or_else(|| DynamicsError::Unsupported("empty chain".into()))?;
        for g in &members {
            if g.channels() != first.channels() {
                return Err(crate::slh::SlhError::ChannelMismatch {
                    left: first.channels(),
                    right: g.channels(),
                }
                .into());
            }
            if !crate::operator::same_space(g.space(), first.space()) {
                return Err(DynamicsError::SpaceMismatch(
                    first.space().to_string(),
                    g.space().to_string(),
                ));
            }
        }
        let fixed = members
            .iter()
            .map(|g| {
                let static_member = g.max_degree() == 0;
                static_member
                    .then(|| g.evaluate(0.0, &bindings).map(|e| HeisenbergGenerator::component(&e)))
                    .transpose()
            })
            .collect::<Result<_, _>>()?;
        Ok(Self {
            members,
            bindings,
            fixed,
        })
    }

    pub fn heisenberg(&self, t: f64) -> Result<HeisenbergGenerator, DynamicsError> {
        let mut acc: Option<HeisenbergGenerator> = None;
        for (g, fixed) in self.members.iter().zip(&self.fixed).rev() {
            let next = match fixed {
                Some(f) => f.clone(),
                None => HeisenbergGenerator::component(&g.evaluate(t, &self.bindings)?),
            };
            acc = Some(match acc {
                None => next,
                Some(first) => first.cascade(&next),
            });
        }
        Ok(acc.expect("chain is non-empty"))
    }
}

impl Generator for CascadeGenerator {
    fn space(&self) -> &Arc<HilbertSpace> {
        self.members[0].space()
    }

    fn rhs(&self, t: f64, rho: &CMatrix) -> Result<CMatrix, DynamicsError> {
        Ok(self.heisenberg(t)?.lindbladian().dual(rho))
    }
}
