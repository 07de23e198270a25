//! Result records shared by the threshold and second-moment computations.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Subgaussian,
    Conditioning,
    RateFunction,
    UpperBound,
    NoiseConditioned,
}

/// Optimizer or quadrature trace attached to a threshold.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub argmax: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evaluations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spread: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature_error: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

/// A named threshold value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub name: String,
    pub value: f64,
    pub method: Method,
    #[serde(default)]
    pub infinite: bool,
    pub diagnostics: Diagnostics,
}

impl ThresholdReport {
    pub fn new(name: impl Into<String>, value: f64, method: Method) -> Self {
        Self {
            name: name.into(),
            value,
            method,
            infinite: !value.is_finite(),
            diagnostics: Diagnostics::default(),
        }
    }

    pub fn with_diagnostics(mut self, diagnostics: Diagnostics) -> Self {
        self.diagnostics = diagnostics;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Exact,
    Series,
    MonteCarlo,
}

/// A second moment `E_Q (dP/dQ)^2`, possibly infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondMomentValue {
    /// `f64::INFINITY` when the moment diverges.
    pub value: f64,
    /// `None` marks the n → ∞ limit.
    pub n: Option<usize>,
    pub estimator: Estimator,
    pub std_error: Option<f64>,
}

impl SecondMomentValue {
    pub fn exact(value: f64, n: Option<usize>) -> Self {
        Self {
            value,
            n,
            estimator: Estimator::Exact,
            std_error: None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }
}
