// Copyright 2026 The slhforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Deterministic JSON and CSV rendering.

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

pub use crate::numfmt::fmt_float;
use crate::operator::{FactorKind, HilbertSpace};
use crate::poly::OpPolynomial;

/// A float serialized with [`fmt_float`]; non-finite values become `null`.
#[derive(Debug, Clone, Copy)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return serializer.serialize_none();
        }
        let raw = RawValue::from_string(fmt_float(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

#[derive(Debug, Serialize)]
pub struct FactorJson {
    pub label: String,
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    pub dim: usize,
}

pub fn space_json(space: &HilbertSpace) -> Vec<FactorJson> {
    space
        .factors()
        .iter()
        .map(|f| match f.kind() {
            FactorKind::Fock { cutoff } => FactorJson {
                label: f.label().to_string(),
                kind: "fock",
                cutoff: Some(cutoff),
                dim: f.dim(),
            },
            FactorKind::Generic => FactorJson {
                label: f.label().to_string(),
                kind: "generic",
                cutoff: None,
                dim: f.dim(),
            },
        })
        .collect()
}

/// One monomial of a polynomial with its coefficient matrix as rows of
/// `[re, im]` pairs.
#[derive(Debug, Serialize)]
pub struct TermJson {
    pub monomial: String,
    pub matrix: Vec<Vec<[Num; 2]>>,
}

/// A polynomial as its term list; the zero polynomial is `[]`.
pub fn poly_json(p: &OpPolynomial) -> Vec<TermJson> {
    p.terms()
        .map(|(m, c)| TermJson {
            monomial: m.to_string(),
            matrix: c
                .outer_iter()
                .map(|row| row.iter().map(|z| [Num(z.re), Num(z.im)]).collect())
                .collect(),
        })
        .collect()
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_embed_raw() {
        let s = serde_json::to_string(&vec![Num(0.5), Num(f64::NAN)]).unwrap();
        assert_eq!(s, "[5.000000000000e-01,null]");
    }
}
