use std::ops::Deref;

use crate::error::{Error, Result};

/// Flat vector of model parameters. Every entry is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::argument("parameter vector must have positive dimension"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("parameter vector"));
        }
        Ok(ParamVector(values))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "parameter vector must have positive dimension");
        ParamVector(vec![0.0; dim])
    }

    /// Wraps values that the caller has already checked to be finite.
    pub(crate) fn from_finite(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| v.is_finite()));
        ParamVector(values)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm_sq(&self) -> f64 {
        norm_sq(&self.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dot(&self, other: &ParamVector) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn dist_sq(&self, other: &ParamVector) -> f64 {
        dist_sq(&self.0, &other.0)
    }
}

impl Deref for ParamVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for ParamVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        ParamVector::new(values)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Loss and gradient of one sample (or the mean over a batch) at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleEval {
    pub loss: f64,
    pub gradient: ParamVector,
}

/// Known facts about a problem. Constants are the ones a problem was
/// constructed with, not estimates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProblemMeta {
    pub num_samples: usize,
    pub minimizer: Option<ParamVector>,
    pub f_star: Option<f64>,
    pub lipschitz_c: Option<f64>,
    pub smoothness_beta: Option<f64>,
    pub rsi_alpha: Option<f64>,
    pub strong_convexity_alpha: Option<f64>,
    pub interp_tolerance_eps: Option<f64>,
}

impl ProblemMeta {
    pub fn new(num_samples: usize) -> Self {
        ProblemMeta {
            num_samples,
            ..Default::default()
        }
    }

    /// Minimum of the objective; zero under interpolation when not declared.
    pub fn f_star_or_zero(&self) -> f64 {
        self.f_star.unwrap_or(0.0)
    }
}
