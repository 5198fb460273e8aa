// Copyright 2026 The slhforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Polynomials in scalar signal symbols with operator coefficients.
//!
//! Signals commute with everything, so a term is a [`Monomial`] in the
//! signals and their conjugates times a dense operator. Coefficients multiply
//! in order, which keeps operator products noncommutative. The representation
//! is canonical: terms are keyed by monomial in a sorted map and exactly-zero
//! coefficients are dropped, so structurally equal polynomials compare equal
//! with `==`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::numfmt::{fmt_complex, fmt_float};
use crate::operator::{linalg, same_space, CMatrix, HilbertSpace, Operator, C64};
use crate::signal::{SignalError, SignalSet};

/// Degree cap applied by [`OpPolynomial::mul`].
pub const DEFAULT_DEGREE_CAP: u32 = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolyError {
    #[error("space mismatch: {0} vs {1}")]
    SpaceMismatch(String, String),
    #[error("signal degree {degree} exceeds cap {cap}")]
    DegreeCap { degree: u32, cap: u32 },
    #[error(transparent)]
    Signal(#[from] SignalError),
}

/// Product of signals and conjugated signals, e.g. `u^2·conj(u)·v`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Monomial {
    powers: BTreeMap<String, (u32, u32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn signal(name: &str) -> Self {
        Self {
            powers: BTreeMap::from([(name.to_string(), (1, 0))]),
        }
    }

    pub fn conj_signal(name: &str) -> Self {
        Self {
            powers: BTreeMap::from([(name.to_string(), (0, 1))]),
        }
    }

    pub fn is_one(&self) -> bool {
        self.powers.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.powers.values().map(|(p, q)| p + q).sum()
    }

    /// `(power, conj_power)` of `name`.
    pub fn power(&self, name: &str) -> (u32, u32) {
        self.powers.get(name).copied().unwrap_or((0, 0))
    }

    pub fn signals(&self) -> impl Iterator<Item = &str> {
        self.powers.keys().map(String::as_str)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut powers = self.powers.clone();
        for (name, (p, q)) in &other.powers {
            let e = powers.entry(name.clone()).or_insert((0, 0));
            e.0 += p;
            e.1 += q;
        }
        Self { powers }
    }

    /// Complex conjugate: swaps power and conjugate power of every signal.
    pub fn conj(&self) -> Self {
        Self {
            powers: self
                .powers
                .iter()
                .map(|(n, &(p, q))| (n.clone(), (q, p)))
                .collect(),
        }
    }

    pub fn eval(&self, t: f64, bindings: &SignalSet) -> Result<C64, SignalError> {
        let mut value = C64::new(1.0, 0.0);
        for (name, &(p, q)) in &self.powers {
            let u = bindings.eval(name, t)?;
            value *= u.powu(p) * u.conj().powu(q);
        }
        Ok(value)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.powers.cmp(&other.powers))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        let mut parts = Vec::new();
        for (name, &(p, q)) in &self.powers {
            match p {
                0 => {}
                1 => parts.push(name.clone()),
                _ => parts.push(format!("{name}^{p}")),
            }
            match q {
                0 => {}
                1 => parts.push(format!("conj({name})")),
                _ => parts.push(format!("conj({name})^{q}")),
            }
        }
        f.write_str(&parts.join("*"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpPolynomial {
    space: Arc<HilbertSpace>,
    terms: BTreeMap<Monomial, CMatrix>,
}

impl OpPolynomial {
    pub fn zero(space: Arc<HilbertSpace>) -> Self {
        Self {
            space,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(op: &Operator) -> Self {
        Self::term(op.space().clone(), Monomial::one(), op.matrix().clone())
    }

    /// `c·I`
    pub fn scalar(space: Arc<HilbertSpace>, c: C64) -> Self {
        let m = linalg::identity(space.dim()).mapv(|z| z * c);
        Self::term(space, Monomial::one(), m)
    }

    pub fn identity(space: Arc<HilbertSpace>) -> Self {
        Self::scalar(space, C64::new(1.0, 0.0))
    }

    /// `u·I` for the signal `name`.
    pub fn signal(space: Arc<HilbertSpace>, name: &str) -> Self {
        let m = linalg::identity(space.dim());
        Self::term(space, Monomial::signal(name), m)
    }

    /// Single term `monomial · coefficient`. Panics if the coefficient does
    /// not match the space dimension.
    pub fn term(space: Arc<HilbertSpace>, monomial: Monomial, coefficient: CMatrix) -> Self {
        assert_eq!(coefficient.dim(), (space.dim(), space.dim()), "coefficient shape");
        let mut terms = BTreeMap::new();
        if !linalg::is_zero(&coefficient) {
            terms.insert(monomial, coefficient);
        }
        Self { space, terms }
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &CMatrix)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, monomial: &Monomial) -> Option<&CMatrix> {
        self.terms.get(monomial)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Exactly the zero polynomial (no terms after canonicalization).
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn has_signals(&self) -> bool {
        self.terms.keys().any(|m| !m.is_one())
    }

    /// True when every coefficient is exactly a multiple of the identity.
    pub fn is_c_number(&self) -> bool {
        self.terms
            .values()
            .all(|c| linalg::scalar_identity(c).is_some())
    }

    fn check_space(&self, other: &Self) -> Result<(), PolyError> {
        if same_space(&self.space, &other.space) {
            Ok(())
        } else {
            Err(PolyError::SpaceMismatch(
                self.space.to_string(),
                other.space.to_string(),
            ))
        }
    }

    fn accumulate(terms: &mut BTreeMap<Monomial, CMatrix>, monomial: Monomial, coefficient: CMatrix) {
        match terms.get_mut(&monomial) {
            Some(existing) => {
                *existing += &coefficient;
                if linalg::is_zero(existing) {
                    terms.remove(&monomial);
                }
            }
            None => {
                if !linalg::is_zero(&coefficient) {
                    terms.insert(monomial, coefficient);
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_space(other)?;
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            Self::accumulate(&mut terms, m.clone(), c.clone());
        }
        Ok(Self {
            space: self.space.clone(),
            terms,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(C64::new(-1.0, 0.0))
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut terms = BTreeMap::new();
        for (m, coeff) in &self.terms {
            Self::accumulate(&mut terms, m.clone(), coeff.mapv(|z| c * z));
        }
        Self {
            space: self.space.clone(),
            terms,
        }
    }

    /// Product `self · other` with the default degree cap.
    pub fn mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.mul_capped(other, DEFAULT_DEGREE_CAP)
    }

    pub fn mul_capped(&self, other: &Self, cap: u32) -> Result<Self, PolyError> {
        self.check_space(other)?;
        let mut terms = BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let m = m1.mul(m2);
                let degree = m.degree();
                if degree > cap {
                    return Err(PolyError::DegreeCap { degree, cap });
                }
                Self::accumulate(&mut terms, m, linalg::mul(c1, c2));
            }
        }
        Ok(Self {
            space: self.space.clone(),
            terms,
        })
    }

    /// Adjoint: conjugate-transpose each coefficient and conjugate each monomial.
    pub fn dagger(&self) -> Self {
        Self {
            space: self.space.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.conj(), linalg::dagger(c)))
                .collect(),
        }
    }

    /// `(p − p†)/(2i)`, formally self-adjoint by construction.
    pub fn imag(&self) -> Self {
        let diff = self
            .sub(&self.dagger())
            .expect("dagger preserves the space");
        diff.scale(C64::new(0.0, -0.5))
    }

    pub fn is_formally_self_adjoint(&self) -> bool {
        self.dagger() == *self
    }

    pub fn evaluate_matrix(&self, t: f64, bindings: &SignalSet) -> Result<CMatrix, PolyError> {
        let d = self.space.dim();
        let mut out = CMatrix::zeros((d, d));
        for (m, c) in &self.terms {
            if m.is_one() {
                out += c;
            } else {
                let v = m.eval(t, bindings)?;
                out.zip_mut_with(c, |o, &x| *o += v * x);
            }
        }
        Ok(out)
    }

    pub fn evaluate(&self, t: f64, bindings: &SignalSet) -> Result<Operator, PolyError> {
        let matrix = self.evaluate_matrix(t, bindings)?;
        Ok(Operator::new(self.space.clone(), matrix).expect("shape is the space dimension"))
    }

    /// Largest coefficient difference over the union of monomials, together
    /// with the monomial where it occurs.
    pub fn max_coefficient_diff(&self, other: &Self) -> Result<(f64, Option<Monomial>), PolyError> {
        self.check_space(other)?;
        let mut worst = (0.0, None);
        let d = self.space.dim();
        let zero = CMatrix::zeros((d, d));
        let keys: std::collections::BTreeSet<&Monomial> =
            self.terms.keys().chain(other.terms.keys()).collect();
        for m in keys {
            let a = self.terms.get(m).unwrap_or(&zero);
            let b = other.terms.get(m).unwrap_or(&zero);
            let diff = linalg::max_abs_diff(a, b);
            if diff > worst.0 {
                worst = (diff, Some(m.clone()));
            }
        }
        Ok(worst)
    }

    /// Monomial-by-monomial comparison within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        matches!(self.max_coefficient_diff(other), Ok((d, _)) if d <= tol)
    }

    /// Compact textual form: `1:|C|=.., u:|C|=..`, or `0`.
    pub fn summary(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|(m, c)| match linalg::scalar_identity(c) {
                Some(z) => format!("{m}·({})I", fmt_complex(z.re, z.im)),
                None => format!("{m}·[op |max|={}]", fmt_float(linalg::max_abs(c))),
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::annihilator;
    use crate::signal::{SampledTable, Signal, SignalDef};
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn space2() -> Arc<HilbertSpace> {
        HilbertSpace::generic("q", 2)
    }

    #[test]
    fn additive_identities() {
        let s = space2();
        let a = OpPolynomial::constant(
            &Operator::new(s.clone(), array![[c(1., 0.), c(2., 1.)], [c(0., 3.), c(-1., 0.)]]).unwrap(),
        );
        let p = a.add(&OpPolynomial::signal(s.clone(), "u")).unwrap();
        assert_eq!(p.add(&OpPolynomial::zero(s.clone())).unwrap(), p);

        let u = OpPolynomial::signal(s.clone(), "u");
        let cancelled = u.add(&u.neg()).unwrap();
        assert!(cancelled.is_zero());

        let ua = OpPolynomial::term(s.clone(), Monomial::signal("u"), a.coefficient(&Monomial::one()).unwrap().clone());
        let doubled = ua.scale(c(2., 0.));
        let expected = OpPolynomial::term(s, Monomial::signal("u"), a.coefficient(&Monomial::one()).unwrap().mapv(|z| z * 2.0));
        assert_eq!(doubled, expected);
    }

    #[test]
    fn multiplication_bookkeeping() {
        let s = space2();
        let u = OpPolynomial::signal(s.clone(), "u");
        let uc = u.dagger();
        let prod = u.mul(&uc).unwrap();
        let mono = Monomial::signal("u").mul(&Monomial::conj_signal("u"));
        assert_eq!(prod, OpPolynomial::term(s.clone(), mono.clone(), linalg::identity(2)));
        assert_eq!(mono.to_string(), "u*conj(u)");

        let a = OpPolynomial::constant(
            &Operator::new(s.clone(), array![[c(0., 1.), c(2., 0.)], [c(0., 0.), c(1., -1.)]]).unwrap(),
        );
        assert_eq!(u.mul(&a).unwrap(), a.mul(&u).unwrap());
    }

    #[test]
    fn distributes_in_order() {
        let s = space2();
        let am = array![[c(0.3, 0.1), c(-1.2, 0.5)], [c(0.7, 0.0), c(0.2, -0.9)]];
        let bm = array![[c(1.1, 0.0), c(0.4, 0.4)], [c(-0.6, 0.2), c(0.0, 1.3)]];
        let a = OpPolynomial::term(s.clone(), Monomial::one(), am.clone());
        let b = OpPolynomial::term(s.clone(), Monomial::one(), bm.clone());
        let p = a.add(&OpPolynomial::signal(s.clone(), "u")).unwrap().mul(&b).unwrap();
        // hand expansion: A·B + u·B
        assert_eq!(p.coefficient(&Monomial::one()).unwrap(), &am.dot(&bm));
        assert_eq!(p.coefficient(&Monomial::signal("u")).unwrap(), &bm);
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn dagger_examples() {
        let s = HilbertSpace::fock("c", 2);
        let a = annihilator(&s, "c").unwrap();
        let ua = OpPolynomial::term(s.clone(), Monomial::signal("u"), a.matrix().clone());
        let expected = OpPolynomial::term(s, Monomial::conj_signal("u"), a.adjoint().into_matrix());
        assert_eq!(ua.dagger(), expected);
        assert_eq!(ua.dagger().dagger(), ua);
        assert!(ua.imag().is_formally_self_adjoint());
    }

    #[test]
    fn degree_cap() {
        let s = space2();
        let u = OpPolynomial::signal(s, "u");
        let u4 = u.mul(&u).unwrap().mul(&u).unwrap().mul(&u).unwrap();
        assert!(u4.mul_capped(&u, 4).is_err());
        assert_eq!(
            u4.mul_capped(&u, 4).unwrap_err(),
            PolyError::DegreeCap { degree: 5, cap: 4 }
        );
        assert_eq!(u4.mul(&u).unwrap().degree(), 5);
    }

    #[test]
    fn evaluation_examples() {
        let s = space2();
        let k = OpPolynomial::scalar(s.clone(), c(3., -1.));
        assert_eq!(
            k.evaluate_matrix(123.0, &SignalSet::new()).unwrap(),
            linalg::identity(2).mapv(|z| z * c(3., -1.))
        );

        let bindings = SignalSet::new().with(Signal::constant("u", c(0., 2.)));
        let u = OpPolynomial::signal(s.clone(), "u");
        assert_eq!(
            u.evaluate_matrix(0.7, &bindings).unwrap(),
            linalg::identity(2).mapv(|z| z * c(0., 2.))
        );

        let f = HilbertSpace::fock("c", 2);
        let a = annihilator(&f, "c").unwrap();
        let table = SampledTable::new(vec![(0.0, c(0., 0.)), (1.0, c(1., 0.))]).unwrap();
        let bindings = SignalSet::new().with(Signal::new("u", SignalDef::Sampled(Arc::new(table))).unwrap());
        let ua = OpPolynomial::term(f, Monomial::signal("u"), a.matrix().clone());
        assert_eq!(ua.evaluate_matrix(0.5, &bindings).unwrap(), a.matrix().mapv(|z| z * 0.5));

        assert!(matches!(
            u.evaluate(0.0, &SignalSet::new()),
            Err(PolyError::Signal(SignalError::Unbound(_)))
        ));
    }

    #[test]
    fn space_mismatch() {
        let p = OpPolynomial::identity(space2());
        let q = OpPolynomial::identity(HilbertSpace::generic("r", 2));
        assert!(matches!(p.add(&q), Err(PolyError::SpaceMismatch(..))));
        assert!(matches!(p.mul(&q), Err(PolyError::SpaceMismatch(..))));
    }

    #[test]
    fn real_scalar_monomial_has_no_imaginary_part() {
        let s = space2();
        let u = OpPolynomial::signal(s.clone(), "u");
        let modsq = u.dagger().mul(&u).unwrap().neg();
        assert!(modsq.imag().is_zero());
    }
}
