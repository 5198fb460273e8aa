// Copyright 2026 The slhforge Authors
// SPDX-License-Identifier: Apache-2.0

use std::sync::Arc;

use nalgebra::DMatrix;
use ndarray::Array1;

use crate::operator::{linalg, same_space, CMatrix, FactorKind, HilbertSpace, Operator, C64};

use super::DynamicsError;

const STATE_TOL: f64 = 1e-10;
const POSITIVITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum Repr {
    Pure(Array1<C64>),
    Mixed(CMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    space: Arc<HilbertSpace>,
    repr: Repr,
}

impl QuantumState {
    pub fn pure(space: Arc<HilbertSpace>, psi: Array1<C64>) -> Result<Self, DynamicsError> {
        if psi.len() != space.dim() {
            return Err(DynamicsError::InvalidState(format!(
                "vector length {} does not match space dimension {}",
                psi.len(),
                space.dim()
            )));
        }
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(DynamicsError::InvalidState(format!("norm² is {norm}, expected 1")));
        }
        Ok(Self {
            space,
            repr: Repr::Pure(psi),
        })
    }

    pub fn mixed(space: Arc<HilbertSpace>, rho: CMatrix) -> Result<Self, DynamicsError> {
        if rho.dim() != (space.dim(), space.dim()) {
            return Err(DynamicsError::InvalidState(format!(
                "density matrix is {:?}, space dimension is {}",
                rho.dim(),
                space.dim()
            )));
        }
        let tr: C64 = rho.diag().sum();
        if (tr - 1.0).norm() > STATE_TOL {
            return Err(DynamicsError::InvalidState(format!("trace is {tr}, expected 1")));
        }
        if linalg::max_abs_diff(&rho, &linalg::dagger(&rho)) > STATE_TOL {
            return Err(DynamicsError::InvalidState("density matrix is not Hermitian".into()));
        }
        let min = min_eigenvalue(&rho);
        if min < -POSITIVITY_TOL {
            return Err(DynamicsError::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self {
            space,
            repr: Repr::Mixed(rho),
        })
    }

    /// Wraps a density matrix without validation (integrator output).
    pub(crate) fn mixed_unchecked(space: Arc<HilbertSpace>, rho: CMatrix) -> Self {
        Self {
            space,
            repr: Repr::Mixed(rho),
        }
    }

    pub(crate) fn pure_unchecked(space: Arc<HilbertSpace>, psi: Array1<C64>) -> Self {
        Self {
            space,
            repr: Repr::Pure(psi),
        }
    }

    /// Computational basis state with the given per-factor levels.
    pub fn basis(space: Arc<HilbertSpace>, levels: &[usize]) -> Result<Self, DynamicsError> {
        let factors = space.factors();
        if levels.len() != factors.len() {
            return Err(DynamicsError::InvalidState(format!(
                "{} levels given for {} factors",
                levels.len(),
                factors.len()
            )));
        }
        let mut index = 0;
        for (f, &k) in factors.iter().zip(levels) {
            if k >= f.dim() {
                return Err(DynamicsError::InvalidState(format!(
                    "level {k} out of range for factor `{}` (dimension {})",
                    f.label(),
                    f.dim()
                )));
            }
            index = index * f.dim() + k;
        }
        let mut psi = Array1::zeros(space.dim());
        psi[index] = C64::new(1.0, 0.0);
        Ok(Self::pure_unchecked(space, psi))
    }

    /// Every factor in its lowest level.
    pub fn vacuum(space: Arc<HilbertSpace>) -> Self {
        let zeros = vec![0; space.factors().len()];
        Self::basis(space, &zeros).expect("level 0 always exists")
    }

    /// Fock state `|n⟩` on the first Fock factor, vacuum elsewhere.
    pub fn fock(space: Arc<HilbertSpace>, n: usize) -> Result<Self, DynamicsError> {
        let pos = first_fock(&space)?;
        let mut levels = vec![0; space.factors().len()];
        levels[pos] = n;
        Self::basis(space, &levels)
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn repr(&self) -> &Repr {
        &self.repr
    }

    pub fn is_pure_repr(&self) -> bool {
        matches!(self.repr, Repr::Pure(_))
    }

    pub fn density(&self) -> CMatrix {
        match &self.repr {
            Repr::Mixed(rho) => rho.clone(),
            Repr::Pure(psi) => {
                let n = psi.len();
                CMatrix::from_shape_fn((n, n), |(i, j)| psi[i] * psi[j].conj())
            }
        }
    }

    /// Diagonal of the density matrix.
    pub fn populations(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Mixed(rho) => rho.diag().iter().map(|z| z.re).collect(),
            Repr::Pure(psi) => psi.iter().map(|z| z.norm_sqr()).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        self.populations().iter().sum()
    }

    /// Population in the top two levels of each Fock factor, maximized over
    /// factors. Zero when the space has no Fock factor.
    pub fn leak(&self) -> f64 {
        leak_of(&self.space, &self.populations())
    }

    /// Smallest eigenvalue of the density matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        match &self.repr {
            Repr::Pure(_) => 0.0_f64.min(self.trace()),
            Repr::Mixed(rho) => min_eigenvalue(rho),
        }
    }
}

pub(crate) fn first_fock(space: &HilbertSpace) -> Result<usize, DynamicsError> {
    space
        .factors()
        .iter()
        .position(|f| matches!(f.kind(), FactorKind::Fock { .. }))
        .ok_or_else(|| DynamicsError::InvalidState("space has no Fock factor".into()))
}

pub(crate) fn leak_of(space: &HilbertSpace, populations: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, f) in space.factors().iter().enumerate() {
        if let FactorKind::Fock { cutoff } = f.kind() {
            let top = cutoff.saturating_sub(1);
            let leak: f64 = populations
                .iter()
                .enumerate()
                .filter(|(i, _)| space.digit(*i, k) >= top)
                .map(|(_, p)| p)
                .sum();
            worst = worst.max(leak);
        }
    }
    worst
}

fn to_nalgebra(m: &CMatrix) -> DMatrix<C64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[[i, j]])
}

/// Eigenvalues of the Hermitian part of `m`.
///
/// Entries below `1e-30` of the largest one are flushed to zero first:
/// subnormal inputs make the eigensolver return infinities.
pub(crate) fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let floor = linalg::max_abs(m) * 1e-30;
    let h = (m + &linalg::dagger(m)).mapv(|z| {
        let z = z * 0.5;
        if z.norm() < floor {
            C64::new(0.0, 0.0)
        } else {
            z
        }
    });
    to_nalgebra(&h).symmetric_eigenvalues().iter().copied().collect()
}

pub(crate) fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).into_iter().fold(f64::INFINITY, f64::min)
}

fn check_space(op: &Operator, state: &QuantumState) -> Result<(), DynamicsError> {
    if !same_space(op.space(), state.space()) {
        return Err(DynamicsError::SpaceMismatch(
            op.space().to_string(),
            state.space().to_string(),
        ));
    }
    Ok(())
}

/// `tr(ρ X)`, or `⟨ψ|X|ψ⟩` for a pure state.
pub fn expectation(op: &Operator, state: &QuantumState) -> Result<C64, DynamicsError> {
    check_space(op, state)?;
    Ok(expectation_matrix(op.matrix(), state))
}

pub(crate) fn expectation_matrix(x: &CMatrix, state: &QuantumState) -> C64 {
    match &state.repr {
        Repr::Pure(psi) => {
            let xpsi = x.dot(psi);
            psi.iter().zip(xpsi.iter()).map(|(a, b)| a.conj() * b).sum()
        }
        Repr::Mixed(rho) => trace_of_product(rho, x),
    }
}

/// `tr(A B)` without forming the product.
pub(crate) fn trace_of_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for ((i, j), x) in a.indexed_iter() {
        acc += x * b[[j, i]];
    }
    acc
}

/// `tr(ρ²)`.
pub fn purity(state: &QuantumState) -> f64 {
    match &state.repr {
        Repr::Pure(psi) => psi.iter().map(|z| z.norm_sqr()).sum::<f64>().powi(2),
        Repr::Mixed(rho) => trace_of_product(rho, rho).re,
    }
}

/// Truncated coherent state `|α⟩` on factor `label` (renormalized after
/// truncation), tensored with the lowest level on every other factor.
pub fn coherent_state(
    space: &Arc<HilbertSpace>,
    label: &str,
    alpha: C64,
) -> Result<QuantumState, DynamicsError> {
    let (pos, factor) = space
        .factor(label)
        .ok_or_else(|| DynamicsError::InvalidState(format!("unknown factor `{label}`")))?;
    if !matches!(factor.kind(), FactorKind::Fock { .. }) {
        return Err(DynamicsError::InvalidState(format!("factor `{label}` is not a Fock mode")));
    }
    let d = factor.dim();
    let mut local = vec![C64::new(0.0, 0.0); d];
    let mut amp = C64::new(1.0, 0.0);
    for (k, slot) in local.iter_mut().enumerate() {
        if k > 0 {
            amp = amp * alpha / (k as f64).sqrt();
        }
        *slot = amp;
    }
    let norm = local.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut psi = Array1::zeros(space.dim());
    for (i, slot) in psi.iter_mut().enumerate() {
        let others_zero = (0..space.factors().len()).all(|k| k == pos || space.digit(i, k) == 0);
        if others_zero {
            *slot = local[space.digit(i, pos)] / norm;
        }
    }
    Ok(QuantumState::pure_unchecked(space.clone(), psi))
}

/// `⟨α|ρ|α⟩` with `|α⟩` from [`coherent_state`].
pub fn coherent_fidelity(state: &QuantumState, label: &str, alpha: C64) -> Result<f64, DynamicsError> {
    let target = coherent_state(state.space(), label, alpha)?;
    let phi = match target.repr {
        Repr::Pure(psi) => psi,
        Repr::Mixed(_) => unreachable!(),
    };
    let value = match &state.repr {
        Repr::Pure(psi) => phi.iter().zip(psi.iter()).map(|(a, b)| a.conj() * b).sum::<C64>().norm_sqr(),
        Repr::Mixed(rho) => {
            let r = rho.dot(&phi);
            phi.iter().zip(r.iter()).map(|(a, b)| a.conj() * b).sum::<C64>().re
        }
    };
    Ok(value)
}

/// `½ Σ |λ_i|` over the eigenvalues of `ρ_a − ρ_b`.
pub fn trace_distance(a: &QuantumState, b: &QuantumState) -> Result<f64, DynamicsError> {
    if !same_space(a.space(), b.space()) {
        return Err(DynamicsError::SpaceMismatch(a.space().to_string(), b.space().to_string()));
    }
    let diff = a.density() - b.density();
    Ok(0.5 * hermitian_eigenvalues(&diff).iter().map(|x| x.abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{annihilator, number};

    #[test]
    fn pure_states_have_unit_purity() {
        let space = HilbertSpace::fock("c", 4);
        let psi = coherent_state(&space, "c", C64::new(0.3, -0.2)).unwrap();
        assert!((purity(&psi) - 1.0).abs() < 1e-14);
        let rho = QuantumState::mixed(space, psi.density()).unwrap();
        assert!((purity(&rho) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn coherent_eigenrelation() {
        let space = HilbertSpace::fock("c", 30);
        let alpha = C64::new(0.6, 0.8);
        let psi = coherent_state(&space, "c", alpha).unwrap();
        let a = annihilator(&space, "c").unwrap();
        assert!((expectation(&a, &psi).unwrap() - alpha).norm() < 1e-12);
        let n = number(&space, "c").unwrap();
        assert!((expectation(&n, &psi).unwrap().re - alpha.norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn vacuum_fidelity() {
        let space = HilbertSpace::fock("c", 3);
        let vac = QuantumState::vacuum(space);
        assert!((coherent_fidelity(&vac, "c", C64::new(0.0, 0.0)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn trace_distance_of_orthogonal_states() {
        let space = HilbertSpace::fock("c", 3);
        let a = QuantumState::fock(space.clone(), 0).unwrap();
        let b = QuantumState::fock(space, 1).unwrap();
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        assert!(trace_distance(&a, &a).unwrap() < 1e-15);
    }

    #[test]
    fn leak_counts_top_two_levels() {
        let space = HilbertSpace::fock("c", 5);
        assert_eq!(QuantumState::fock(space.clone(), 3).unwrap().leak(), 0.0);
        assert_eq!(QuantumState::fock(space.clone(), 4).unwrap().leak(), 1.0);
        assert_eq!(QuantumState::fock(space, 5).unwrap().leak(), 1.0);
        assert_eq!(QuantumState::vacuum(HilbertSpace::generic("q", 2)).leak(), 0.0);
    }

    #[test]
    fn invalid_density_is_rejected() {
        let space = HilbertSpace::generic("q", 2);
        let mut rho = CMatrix::zeros((2, 2));
        rho[[0, 0]] = C64::new(1.5, 0.0);
        rho[[1, 1]] = C64::new(-0.5, 0.0);
        assert!(QuantumState::mixed(space, rho).is_err());
    }
}
