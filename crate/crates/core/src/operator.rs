// Copyright 2026 The slhforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Finite-dimensional Hilbert spaces and dense operators on them.
//!
//! A [`HilbertSpace`] is an ordered tensor product of labelled factors. Every
//! [`Operator`] carries the space it acts on so that products between
//! operators on different spaces are rejected instead of silently producing
//! garbage.

use std::fmt;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;
pub type CMatrix = Array2<C64>;

/// Default tolerance for numerical operator equality (max-abs entry difference).
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OperatorError {
    #[error("unknown factor label `{0}`")]
    UnknownLabel(String),
    #[error("factor `{0}` is not a Fock factor")]
    NotFock(String),
    #[error("duplicate factor label `{0}`")]
    DuplicateLabel(String),
    #[error("factor `{0}` must have positive dimension")]
    EmptyFactor(String),
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("dimension mismatch: expected {expected}x{expected}, got {rows}x{cols}")]
    DimensionMismatch {
        expected: usize,
        rows: usize,
        cols: usize,
    },
    #[error("factor mismatch: {0}")]
    FactorMismatch(String),
    #[error("ragged channel matrix: row {row} has {len} entries, expected {expected}")]
    Ragged {
        row: usize,
        len: usize,
        expected: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FactorKind {
    /// Oscillator truncated at occupation number `cutoff`.
    Fock { cutoff: usize },
    Generic,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Factor {
    label: String,
    dim: usize,
    kind: FactorKind,
}

impl Factor {
    pub fn fock(label: impl Into<String>, cutoff: usize) -> Self {
        Self {
            label: label.into(),
            dim: cutoff + 1,
            kind: FactorKind::Fock { cutoff },
        }
    }

    pub fn generic(label: impl Into<String>, dim: usize) -> Self {
        Self {
            label: label.into(),
            dim,
            kind: FactorKind::Generic,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> FactorKind {
        self.kind
    }
}

/// Ordered tensor product of labelled factors. Factor order is declaration
/// order and is never permuted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HilbertSpace {
    factors: Vec<Factor>,
    total_dim: usize,
}

impl HilbertSpace {
    pub fn new(factors: Vec<Factor>) -> Result<Arc<Self>, OperatorError> {
        for (i, f) in factors.iter().enumerate() {
            if f.dim == 0 {
                return Err(OperatorError::EmptyFactor(f.label.clone()));
            }
            if factors[..i].iter().any(|g| g.label == f.label) {
                return Err(OperatorError::DuplicateLabel(f.label.clone()));
            }
        }
        let total_dim = factors.iter().map(|f| f.dim).product();
        Ok(Arc::new(Self { factors, total_dim }))
    }

    /// Single Fock factor with levels `0..=cutoff`.
    pub fn fock(label: impl Into<String>, cutoff: usize) -> Arc<Self> {
        Self::new(vec![Factor::fock(label, cutoff)]).expect("single factor is valid")
    }

    /// Single generic factor. Panics if `dim == 0`.
    pub fn generic(label: impl Into<String>, dim: usize) -> Arc<Self> {
        Self::new(vec![Factor::generic(label, dim)]).expect("generic factor needs dim > 0")
    }

    pub fn dim(&self) -> usize {
        self.total_dim
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn factor(&self, label: &str) -> Option<(usize, &Factor)> {
        self.factors
            .iter()
            .enumerate()
            .find(|(_, f)| f.label == label)
    }

    /// Product of the dimensions of the factors to the right of `index`.
    fn stride(&self, index: usize) -> usize {
        self.factors[index + 1..].iter().map(|f| f.dim).product()
    }

    /// Digit of factor `index` in the mixed-radix decomposition of basis index `i`.
    pub fn digit(&self, i: usize, index: usize) -> usize {
        (i / self.stride(index)) % self.factors[index].dim
    }
}

impl fmt::Display for HilbertSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|fac| match fac.kind {
                FactorKind::Fock { cutoff } => format!("{}:fock({})", fac.label, cutoff),
                FactorKind::Generic => format!("{}:generic({})", fac.label, fac.dim),
            })
            .collect();
        write!(f, "[{}]", parts.join(" ⊗ "))
    }
}

pub(crate) fn same_space(a: &Arc<HilbertSpace>, b: &Arc<HilbertSpace>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// Dense operator on a [`HilbertSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    space: Arc<HilbertSpace>,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(space: Arc<HilbertSpace>, matrix: CMatrix) -> Result<Self, OperatorError> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(OperatorError::DimensionMismatch {
                expected: d,
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        Ok(Self { space, matrix })
    }

    pub fn identity(space: Arc<HilbertSpace>) -> Self {
        let matrix = linalg::identity(space.dim());
        Self { space, matrix }
    }

    pub fn zeros(space: Arc<HilbertSpace>) -> Self {
        let d = space.dim();
        Self {
            space,
            matrix: CMatrix::zeros((d, d)),
        }
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space.clone(),
            matrix: linalg::dagger(&self.matrix),
        }
    }

    fn check_space(&self, other: &Self) -> Result<(), OperatorError> {
        if same_space(&self.space, &other.space) {
            Ok(())
        } else {
            Err(OperatorError::SpaceMismatch(format!(
                "{} vs {}",
                self.space, other.space
            )))
        }
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, OperatorError> {
        self.check_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: self.matrix.dot(&other.matrix),
        })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, OperatorError> {
        self.check_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, OperatorError> {
        self.check_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix - &other.matrix,
        })
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.mapv(|z| z * c),
        }
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Result<Self, OperatorError> {
        self.check_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: linalg::commutator(&self.matrix, &other.matrix),
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, OperatorError> {
        self.check_space(other)?;
        Ok(linalg::max_abs_diff(&self.matrix, &other.matrix))
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other).map(|d| d <= tol).unwrap_or(false)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        linalg::max_abs_diff(&self.matrix, &linalg::dagger(&self.matrix)) <= tol
    }

    pub fn trace(&self) -> C64 {
        self.matrix.diag().sum()
    }
}

/// Truncated annihilation operator of the Fock factor `label`, embedded in
/// the full space. The top level has no raising partner.
pub fn annihilator(space: &Arc<HilbertSpace>, label: &str) -> Result<Operator, OperatorError> {
    let (index, factor) = space
        .factor(label)
        .ok_or_else(|| OperatorError::UnknownLabel(label.to_string()))?;
    let cutoff = match factor.kind {
        FactorKind::Fock { cutoff } => cutoff,
        FactorKind::Generic => return Err(OperatorError::NotFock(label.to_string())),
    };
    let mut local = CMatrix::zeros((cutoff + 1, cutoff + 1));
    for m in 0..cutoff {
        local[[m, m + 1]] = C64::new(((m + 1) as f64).sqrt(), 0.0);
    }
    Ok(Operator {
        space: space.clone(),
        matrix: embed_local(space, index, &local),
    })
}

pub fn creator(space: &Arc<HilbertSpace>, label: &str) -> Result<Operator, OperatorError> {
    annihilator(space, label).map(|a| a.adjoint())
}

/// Number operator `a†a` of the Fock factor `label`.
pub fn number(space: &Arc<HilbertSpace>, label: &str) -> Result<Operator, OperatorError> {
    let a = annihilator(space, label)?;
    a.adjoint().try_mul(&a)
}

/// Operator acting as `local` on factor `label` and as the identity elsewhere.
pub fn local_operator(
    space: &Arc<HilbertSpace>,
    label: &str,
    local: &CMatrix,
) -> Result<Operator, OperatorError> {
    let (index, factor) = space
        .factor(label)
        .ok_or_else(|| OperatorError::UnknownLabel(label.to_string()))?;
    if local.nrows() != factor.dim || local.ncols() != factor.dim {
        return Err(OperatorError::DimensionMismatch {
            expected: factor.dim,
            rows: local.nrows(),
            cols: local.ncols(),
        });
    }
    Ok(Operator {
        space: space.clone(),
        matrix: embed_local(space, index, local),
    })
}

fn embed_local(space: &HilbertSpace, index: usize, local: &CMatrix) -> CMatrix {
    let left: usize = space.factors[..index].iter().map(|f| f.dim).product();
    let right = space.stride(index);
    let out = linalg::kron(&linalg::identity(left), local);
    linalg::kron(&out, &linalg::identity(right))
}

/// Kronecker-extends `op` (on a subspace) to `big`, with identities on the
/// factors `op` does not mention. The small space's factors must appear in
/// `big` in the same relative order.
pub fn embed(op: &Operator, big: &Arc<HilbertSpace>) -> Result<Operator, OperatorError> {
    let small = op.space();
    let mut positions = Vec::with_capacity(small.factors.len());
    for f in &small.factors {
        let (pos, g) = big
            .factor(&f.label)
            .ok_or_else(|| OperatorError::FactorMismatch(format!("`{}` not in {}", f.label, big)))?;
        if g.dim != f.dim || g.kind != f.kind {
            return Err(OperatorError::FactorMismatch(format!(
                "`{}` differs between {} and {}",
                f.label, small, big
            )));
        }
        if positions.last().is_some_and(|&p| p >= pos) {
            return Err(OperatorError::FactorMismatch(format!(
                "factor order of {} differs from {}",
                small, big
            )));
        }
        positions.push(pos);
    }

    let d = big.dim();
    let small_index = |i: usize| {
        positions
            .iter()
            .fold(0, |acc, &p| acc * big.factors[p].dim + big.digit(i, p))
    };
    let others: Vec<usize> = (0..big.factors.len())
        .filter(|p| !positions.contains(p))
        .collect();
    let mut matrix = CMatrix::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            if others.iter().all(|&p| big.digit(i, p) == big.digit(j, p)) {
                matrix[[i, j]] = op.matrix[[small_index(i), small_index(j)]];
            }
        }
    }
    Ok(Operator {
        space: big.clone(),
        matrix,
    })
}

/// Operator imaginary part `(x − x†)/(2i)`; always self-adjoint.
pub fn op_imag(x: &Operator) -> Operator {
    Operator {
        space: x.space.clone(),
        matrix: linalg::imag_part(&x.matrix),
    }
}

/// Checks `Σ_k S_ik S_jk† = δ_ij` and `Σ_k S_ki† S_kj = δ_ij` entrywise in
/// max-abs norm.
pub fn is_unitary_channel_matrix(s: &[Vec<Operator>], tol: f64) -> Result<bool, OperatorError> {
    let n = s.len();
    for (row, entries) in s.iter().enumerate() {
        if entries.len() != n {
            return Err(OperatorError::Ragged {
                row,
                len: entries.len(),
                expected: n,
            });
        }
    }
    if n == 0 {
        return Ok(true);
    }
    let mats: Vec<Vec<CMatrix>> = s
        .iter()
        .map(|r| r.iter().map(|o| o.matrix.clone()).collect())
        .collect();
    let space = s[0][0].space();
    for entry in s.iter().flatten() {
        if !same_space(space, entry.space()) {
            return Err(OperatorError::SpaceMismatch(
                "channel matrix entries live on different spaces".into(),
            ));
        }
    }
    Ok(linalg::channel_unitarity_defect(&mats) <= tol)
}

/// Small dense-matrix helpers shared across the crate.
pub mod linalg {
    use super::{CMatrix, C64};

    pub fn identity(n: usize) -> CMatrix {
        CMatrix::from_diag_elem(n, C64::new(1.0, 0.0))
    }

    pub fn dagger(m: &CMatrix) -> CMatrix {
        m.t().mapv(|z| z.conj())
    }

    pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
        a.dot(b) - b.dot(a)
    }

    pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
        a.dot(b) + b.dot(a)
    }

    /// `(m − m†)/(2i)`, computed as `(m − m†)·(−i/2)` which is exact in
    /// floating point and therefore exactly Hermitian.
    pub fn imag_part(m: &CMatrix) -> CMatrix {
        let factor = C64::new(0.0, -0.5);
        (m - &dagger(m)).mapv(|z| z * factor)
    }

    pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
        let (ar, ac) = a.dim();
        let (br, bc) = b.dim();
        let mut out = CMatrix::zeros((ar * br, ac * bc));
        for ((i, j), &x) in a.indexed_iter() {
            if x == C64::new(0.0, 0.0) {
                continue;
            }
            let mut block = out.slice_mut(ndarray::s![i * br..(i + 1) * br, j * bc..(j + 1) * bc]);
            block.zip_mut_with(b, |o, &y| *o = x * y);
        }
        out
    }

    pub fn max_abs(m: &CMatrix) -> f64 {
        m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
        a.iter()
            .zip(b.iter())
            .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
    }

    pub fn is_zero(m: &CMatrix) -> bool {
        m.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// `Some(c)` when `m` is exactly `c·I`.
    pub fn scalar_identity(m: &CMatrix) -> Option<C64> {
        let (r, c) = m.dim();
        if r != c || r == 0 {
            return None;
        }
        let value = m[[0, 0]];
        for ((i, j), z) in m.indexed_iter() {
            let expected = if i == j { value } else { C64::new(0.0, 0.0) };
            if *z != expected {
                return None;
            }
        }
        Some(value)
    }

    /// Product that short-circuits exact scalar multiples of the identity so
    /// that c-number factors act by plain scaling.
    pub fn mul(a: &CMatrix, b: &CMatrix) -> CMatrix {
        if let Some(c) = scalar_identity(a) {
            return b.mapv(|z| c * z);
        }
        if let Some(c) = scalar_identity(b) {
            return a.mapv(|z| z * c);
        }
        a.dot(b)
    }

    /// Largest entry deviation from the two unitarity conditions of a block
    /// matrix whose entries are operators.
    pub fn channel_unitarity_defect(s: &[Vec<CMatrix>]) -> f64 {
        let n = s.len();
        if n == 0 {
            return 0.0;
        }
        let d = s[0][0].nrows();
        let eye = identity(d);
        let zero = CMatrix::zeros((d, d));
        let mut defect: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut rows = zero.clone();
                let mut cols = zero.clone();
                for (row_i, row_j) in s[i].iter().zip(&s[j]) {
                    rows = rows + row_i.dot(&dagger(row_j));
                }
                for row in s {
                    cols = cols + dagger(&row[i]).dot(&row[j]);
                }
                let target = if i == j { &eye } else { &zero };
                defect = defect
                    .max(max_abs_diff(&rows, target))
                    .max(max_abs_diff(&cols, target));
            }
        }
        defect
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn annihilator_two_level() {
        let space = HilbertSpace::fock("c", 1);
        let a = annihilator(&space, "c").unwrap();
        assert_eq!(a.matrix(), &array![[c(0., 0.), c(1., 0.)], [c(0., 0.), c(0., 0.)]]);
    }

    #[test]
    fn annihilator_cutoff_two() {
        let space = HilbertSpace::fock("c", 2);
        let a = annihilator(&space, "c").unwrap();
        let m = a.matrix();
        assert_eq!(m[[0, 1]], c(1., 0.));
        assert_eq!(m[[1, 2]], c(2f64.sqrt(), 0.));
        let nonzero = m.iter().filter(|z| z.norm() > 0.0).count();
        assert_eq!(nonzero, 2);
    }

    #[test]
    fn truncated_ccr_holds_below_top_level() {
        for cutoff in [1, 2, 5, 12] {
            let space = HilbertSpace::fock("c", cutoff);
            let a = annihilator(&space, "c").unwrap();
            let ccr = a.commutator(&a.adjoint()).unwrap();
            for m in 0..cutoff {
                assert!((ccr.matrix()[[m, m]] - c(1., 0.)).norm() < 1e-12);
            }
            // the top level is where truncation shows up
            assert!((ccr.matrix()[[cutoff, cutoff]] - c(-(cutoff as f64), 0.)).norm() < 1e-12);
        }
    }

    #[test]
    fn annihilator_errors() {
        let space = HilbertSpace::new(vec![Factor::fock("c", 2), Factor::generic("q", 2)]).unwrap();
        assert_eq!(
            annihilator(&space, "x").unwrap_err(),
            OperatorError::UnknownLabel("x".into())
        );
        assert_eq!(
            annihilator(&space, "q").unwrap_err(),
            OperatorError::NotFock("q".into())
        );
    }

    #[test]
    fn space_invariants() {
        let space = HilbertSpace::new(vec![Factor::fock("c", 3), Factor::generic("q", 2)]).unwrap();
        assert_eq!(space.dim(), 8);
        assert_eq!(
            HilbertSpace::new(vec![Factor::generic("q", 2), Factor::generic("q", 3)]).unwrap_err(),
            OperatorError::DuplicateLabel("q".into())
        );
        assert!(HilbertSpace::new(vec![Factor::generic("q", 0)]).is_err());
    }

    #[test]
    fn annihilator_on_second_factor() {
        let space = HilbertSpace::new(vec![Factor::generic("q", 2), Factor::fock("c", 1)]).unwrap();
        let a = annihilator(&space, "c").unwrap();
        // I_2 ⊗ [[0,1],[0,0]]
        assert_eq!(a.matrix()[[0, 1]], c(1., 0.));
        assert_eq!(a.matrix()[[2, 3]], c(1., 0.));
        assert_eq!(a.matrix().iter().filter(|z| z.norm() > 0.0).count(), 2);
    }

    #[test]
    fn embed_identity_and_first_factor() {
        let small = HilbertSpace::generic("p", 2);
        let big = HilbertSpace::new(vec![Factor::generic("p", 2), Factor::generic("q", 2)]).unwrap();
        let id = embed(&Operator::identity(small.clone()), &big).unwrap();
        assert_eq!(id, Operator::identity(big.clone()));

        let x = Operator::new(small, array![[c(1., 0.), c(2., 1.)], [c(0., -3.), c(4., 0.)]]).unwrap();
        let e = embed(&x, &big).unwrap();
        let expected = linalg::kron(x.matrix(), &linalg::identity(2));
        assert_eq!(e.matrix(), &expected);
    }

    #[test]
    fn embed_rejects_mismatches() {
        let small = HilbertSpace::generic("p", 3);
        let big = HilbertSpace::new(vec![Factor::generic("p", 2), Factor::generic("q", 2)]).unwrap();
        assert!(matches!(
            embed(&Operator::identity(small), &big),
            Err(OperatorError::FactorMismatch(_))
        ));
        let swapped = HilbertSpace::new(vec![Factor::generic("q", 2), Factor::generic("p", 2)]).unwrap();
        assert!(embed(&Operator::identity(swapped), &big).is_err());
    }

    #[test]
    fn op_imag_examples() {
        let space = HilbertSpace::generic("q", 2);
        let herm = Operator::new(space.clone(), array![[c(1., 0.), c(2., 1.)], [c(2., -1.), c(0., 0.)]]).unwrap();
        assert_eq!(op_imag(&herm), Operator::zeros(space.clone()));

        let ii = Operator::identity(space.clone()).scale(c(0., 1.));
        assert_eq!(op_imag(&ii), Operator::identity(space.clone()));

        let x = Operator::new(space.clone(), array![[c(0., 0.), c(0., 2.)], [c(0., 0.), c(0., 0.)]]).unwrap();
        let expected = Operator::new(space, array![[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]]).unwrap();
        assert!(op_imag(&x).approx_eq(&expected, 0.0));
    }

    #[test]
    fn unitary_channel_matrix_examples() {
        let space = HilbertSpace::generic("q", 2);
        let id = Operator::identity(space.clone());
        assert!(is_unitary_channel_matrix(&[vec![id.clone()]], 1e-10).unwrap());

        let minus = id.scale(c(-1., 0.));
        let zero = Operator::zeros(space.clone());
        let s = vec![vec![minus.clone(), zero.clone()], vec![zero.clone(), minus]];
        assert!(is_unitary_channel_matrix(&s, 1e-10).unwrap());

        let s = vec![vec![id.clone(), id.clone()], vec![zero.clone(), id.clone()]];
        assert!(!is_unitary_channel_matrix(&s, 1e-10).unwrap());

        let ragged = vec![vec![id.clone(), zero], vec![id]];
        assert!(matches!(
            is_unitary_channel_matrix(&ragged, 1e-10),
            Err(OperatorError::Ragged { row: 1, .. })
        ));
    }

    #[test]
    fn scalar_identity_detection() {
        let m = linalg::identity(3).mapv(|z| z * c(0.5, -2.0));
        assert_eq!(linalg::scalar_identity(&m), Some(c(0.5, -2.0)));
        let mut n = m.clone();
        n[[0, 1]] = c(1e-300, 0.);
        assert_eq!(linalg::scalar_identity(&n), None);
    }
}
