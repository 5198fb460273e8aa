// Copyright 2026 The slhforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Scalar (c-number) control signals `u(t)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::operator::C64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SignalError {
    #[error("unbound signal `{0}`")]
    Unbound(String),
    #[error("signal `{name}` evaluated at t={t} outside its horizon [{start}, {end}]")]
    OutsideHorizon {
        name: String,
        t: f64,
        start: f64,
        end: f64,
    },
    #[error("sample table times must be strictly increasing (row {row})")]
    NotIncreasing { row: usize },
    #[error("sample table is empty")]
    EmptyTable,
    #[error("signal table line {line}: {message}")]
    Table { line: usize, message: String },
    #[error("signal `{name}`: {message}")]
    InvalidParameter { name: String, message: String },
    #[error("io error reading `{path}`: {message}")]
    Io { path: String, message: String },
}

/// Piecewise-linear sample table. Evaluation outside `[first, last]` is an error.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTable {
    times: Vec<f64>,
    values: Vec<C64>,
}

impl SampledTable {
    pub fn new(samples: Vec<(f64, C64)>) -> Result<Self, SignalError> {
        if samples.is_empty() {
            return Err(SignalError::EmptyTable);
        }
        for (row, w) in samples.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(SignalError::NotIncreasing { row: row + 1 });
            }
        }
        let (times, values) = samples.into_iter().unzip();
        Ok(Self { times, values })
    }

    /// Parses the `t,re,im` CSV format. The header row is mandatory.
    pub fn from_csv(text: &str) -> Result<Self, SignalError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header = reader.headers().map_err(|e| SignalError::Table {
            line: 1,
            message: e.to_string(),
        })?;
        if header.iter().collect::<Vec<_>>() != ["t", "re", "im"] {
            return Err(SignalError::Table {
                line: 1,
                message: "expected header `t,re,im`".into(),
            });
        }
        let mut samples = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| SignalError::Table {
                line: e.position().map_or(0, |p| p.line() as usize),
                message: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            let field = |i: usize| -> Result<f64, SignalError> {
                record
                    .get(i)
                    .and_then(|s| s.parse::<f64>().ok())
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| SignalError::Table {
                        line,
                        message: format!("column {} is not a finite number", i + 1),
                    })
            };
            samples.push((field(0)?, C64::new(field(1)?, field(2)?)));
        }
        Self::new(samples).map_err(|e| match e {
            SignalError::NotIncreasing { row } => SignalError::Table {
                line: row + 2,
                message: "times must be strictly increasing".into(),
            },
            other => other,
        })
    }

    pub fn from_csv_file(path: &Path) -> Result<Self, SignalError> {
        let text = std::fs::read_to_string(path).map_err(|e| SignalError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_csv(&text)
    }

    pub fn horizon(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().expect("non-empty"))
    }

    fn eval(&self, name: &str, t: f64) -> Result<C64, SignalError> {
        let (start, end) = self.horizon();
        if !(t >= start && t <= end) {
            return Err(SignalError::OutsideHorizon {
                name: name.to_string(),
                t,
                start,
                end,
            });
        }
        // index of the first sample time strictly greater than t
        let hi = self.times.partition_point(|&s| s <= t);
        if hi == self.times.len() {
            return Ok(*self.values.last().expect("non-empty"));
        }
        let lo = hi - 1;
        let w = (t - self.times[lo]) / (self.times[hi] - self.times[lo]);
        Ok(self.values[lo] * (1.0 - w) + self.values[hi] * w)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SignalDef {
    Constant(C64),
    Sampled(Arc<SampledTable>),
    /// `amplitude · exp(i(2π·frequency·t + phase))`
    ComplexExponential {
        amplitude: C64,
        frequency: f64,
        phase: f64,
    },
    /// `amplitude · exp(−(t − center)² / (2·width²))`
    GaussianPulse {
        amplitude: C64,
        center: f64,
        width: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    name: String,
    def: SignalDef,
}

impl Signal {
    pub fn new(name: impl Into<String>, def: SignalDef) -> Result<Self, SignalError> {
        let name = name.into();
        let bad = |message: &str| SignalError::InvalidParameter {
            name: name.clone(),
            message: message.to_string(),
        };
        let finite = |z: C64| z.re.is_finite() && z.im.is_finite();
        match &def {
            SignalDef::Constant(c) if !finite(*c) => return Err(bad("value must be finite")),
            SignalDef::ComplexExponential {
                amplitude,
                frequency,
                phase,
            } if !(finite(*amplitude) && frequency.is_finite() && phase.is_finite()) => {
                return Err(bad("parameters must be finite"))
            }
            SignalDef::GaussianPulse {
                amplitude,
                center,
                width,
            } => {
                if !(finite(*amplitude) && center.is_finite() && width.is_finite()) {
                    return Err(bad("parameters must be finite"));
                }
                if *width <= 0.0 {
                    return Err(bad("width must be positive"));
                }
            }
            _ => {}
        }
        Ok(Self { name, def })
    }

    pub fn constant(name: impl Into<String>, value: C64) -> Self {
        Self::new(name, SignalDef::Constant(value)).expect("finite constant")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn def(&self) -> &SignalDef {
        &self.def
    }

    /// Time interval on which the signal may be evaluated.
    pub fn horizon(&self) -> (f64, f64) {
        match &self.def {
            SignalDef::Sampled(table) => table.horizon(),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn eval(&self, t: f64) -> Result<C64, SignalError> {
        Ok(match &self.def {
            SignalDef::Constant(c) => *c,
            SignalDef::Sampled(table) => return table.eval(&self.name, t),
            SignalDef::ComplexExponential {
                amplitude,
                frequency,
                phase,
            } => *amplitude * C64::from_polar(1.0, 2.0 * PI * frequency * t + phase),
            SignalDef::GaussianPulse {
                amplitude,
                center,
                width,
            } => {
                let x = (t - center) / width;
                *amplitude * (-0.5 * x * x).exp()
            }
        })
    }
}

/// Named signal bindings used when evaluating polynomials at a time.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SignalSet {
    signals: BTreeMap<String, Signal>,
}

impl SignalSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, signal: Signal) -> Option<Signal> {
        self.signals.insert(signal.name.clone(), signal)
    }

    pub fn with(mut self, signal: Signal) -> Self {
        self.insert(signal);
        self
    }

    pub fn get(&self, name: &str) -> Option<&Signal> {
        self.signals.get(name)
    }

    pub fn eval(&self, name: &str, t: f64) -> Result<C64, SignalError> {
        self.signals
            .get(name)
            .ok_or_else(|| SignalError::Unbound(name.to_string()))?
            .eval(t)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Signal> {
        self.signals.values()
    }

    /// Intersection of all signal horizons.
    pub fn horizon(&self) -> (f64, f64) {
        self.signals.values().fold(
            (f64::NEG_INFINITY, f64::INFINITY),
            |(lo, hi), s| {
                let (a, b) = s.horizon();
                (lo.max(a), hi.min(b))
            },
        )
    }
}

impl FromIterator<Signal> for SignalSet {
    fn from_iter<I: IntoIterator<Item = Signal>>(iter: I) -> Self {
        let mut set = Self::new();
        for s in iter {
            set.insert(s);
        }
        set
    }
}
