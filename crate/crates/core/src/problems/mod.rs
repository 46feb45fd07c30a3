//! Test problems with exact gradients and constants known by construction.

mod constants;
mod fixture;
mod gradcheck;
mod hinge;
mod least_squares;
mod mlp;
mod quadratic;
mod rsi;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

pub use constants::{check_constants, ConstantCheck, ConstantsReport};
pub use fixture::{read_fixture, write_fixture};
pub use gradcheck::check_gradient;
pub use hinge::HingeEnsembleProblem;
pub use least_squares::LeastSquaresProblem;
pub use mlp::TinyMlpProblem;
pub use quadratic::{QuadraticConfig, QuadraticEnsembleProblem};
pub use rsi::{RsiScalarProblem, RSI_DOMAIN_BOUND};

use crate::error::{Error, Result};
use crate::problem::Problem;
use crate::projection::FeasibleRegion;
use crate::types::{ParamVector, ProblemMeta};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    RsiScalar,
    LeastSquares,
    QuadraticEnsemble,
    HingeEnsemble,
    TinyMlp,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 5] = [
        ProblemKind::RsiScalar,
        ProblemKind::LeastSquares,
        ProblemKind::QuadraticEnsemble,
        ProblemKind::HingeEnsemble,
        ProblemKind::TinyMlp,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ProblemKind::RsiScalar => "rsi_scalar",
            ProblemKind::LeastSquares => "least_squares",
            ProblemKind::QuadraticEnsemble => "quadratic_ensemble",
            ProblemKind::HingeEnsemble => "hinge_ensemble",
            ProblemKind::TinyMlp => "tiny_mlp",
        }
    }

    /// Whether every per-sample loss is differentiable everywhere.
    pub fn is_smooth(&self) -> bool {
        !matches!(self, ProblemKind::HingeEnsemble)
    }

    pub fn default_dims(&self) -> Dims {
        match self {
            ProblemKind::RsiScalar => Dims::new(1, 1),
            ProblemKind::LeastSquares => Dims::new(20, 10),
            ProblemKind::QuadraticEnsemble => Dims::new(20, 10),
            ProblemKind::HingeEnsemble => Dims::new(40, 10),
            ProblemKind::TinyMlp => Dims { samples: 32, dim: 4, hidden: Some(16) },
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "rsi" | "rsi_scalar" => ProblemKind::RsiScalar,
            "least_squares" | "lsq" => ProblemKind::LeastSquares,
            "quadratic" | "quadratic_ensemble" => ProblemKind::QuadraticEnsemble,
            "hinge" | "hinge_ensemble" => ProblemKind::HingeEnsemble,
            "mlp" | "tiny_mlp" => ProblemKind::TinyMlp,
            other => return Err(Error::argument(format!("unknown problem kind {other:?}"))),
        })
    }
}

/// Problem sizes: sample count, input dimension and, for the MLP, hidden width.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub samples: usize,
    pub dim: usize,
    pub hidden: Option<usize>,
}

impl Dims {
    pub fn new(samples: usize, dim: usize) -> Self {
        Dims { samples, dim, hidden: None }
    }

    pub fn with_hidden(samples: usize, dim: usize, hidden: usize) -> Self {
        Dims { samples, dim, hidden: Some(hidden) }
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.samples, self.dim)?;
        if let Some(h) = self.hidden {
            write!(f, "x{h}")?;
        }
        Ok(())
    }
}

impl FromStr for Dims {
    type Err = Error;

    /// `<samples>x<dim>` or `<samples>x<dim>x<hidden>`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<usize> = s
            .trim()
            .split('x')
            .map(|p| p.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::argument(format!("bad dims {s:?}")))?;
        let dims = match parts.as_slice() {
            [n, d] => Dims::new(*n, *d),
            [n, d, h] => Dims::with_hidden(*n, *d, *h),
            _ => return Err(Error::argument(format!("bad dims {s:?}"))),
        };
        if dims.samples == 0 || dims.dim == 0 || dims.hidden == Some(0) {
            return Err(Error::argument("dims must be positive"));
        }
        Ok(dims)
    }
}

/// One of the built-in problems, constructed by [`make_problem`] or read back
/// from a fixture.
#[derive(Debug, Clone)]
pub enum BuiltinProblem {
    RsiScalar(RsiScalarProblem),
    LeastSquares(LeastSquaresProblem),
    QuadraticEnsemble(QuadraticEnsembleProblem),
    HingeEnsemble(HingeEnsembleProblem),
    TinyMlp(TinyMlpProblem),
}

impl BuiltinProblem {
    pub fn kind(&self) -> ProblemKind {
        match self {
            BuiltinProblem::RsiScalar(_) => ProblemKind::RsiScalar,
            BuiltinProblem::LeastSquares(_) => ProblemKind::LeastSquares,
            BuiltinProblem::QuadraticEnsemble(_) => ProblemKind::QuadraticEnsemble,
            BuiltinProblem::HingeEnsemble(_) => ProblemKind::HingeEnsemble,
            BuiltinProblem::TinyMlp(_) => ProblemKind::TinyMlp,
        }
    }

    /// A random parameter vector at the scale the problem is used at: around
    /// the minimizer with unit Gaussian noise, uniform on the RSI interval,
    /// and drawn like the teacher for the MLP.
    pub fn random_point<R: Rng>(&self, rng: &mut R) -> ParamVector {
        match self {
            BuiltinProblem::RsiScalar(_) => {
                ParamVector::from_finite(vec![rng.random_range(-RSI_DOMAIN_BOUND..=RSI_DOMAIN_BOUND)])
            }
            BuiltinProblem::TinyMlp(p) => p.random_parameters(rng),
            other => {
                let center = other.meta().minimizer.clone().unwrap_or_else(|| ParamVector::zeros(other.dim()));
                let noise = gaussian_vec(rng, center.dim());
                ParamVector::from_finite(center.iter().zip(noise).map(|(c, n)| c + n).collect())
            }
        }
    }

    fn inner(&self) -> &dyn Problem {
        match self {
            BuiltinProblem::RsiScalar(p) => p,
            BuiltinProblem::LeastSquares(p) => p,
            BuiltinProblem::QuadraticEnsemble(p) => p,
            BuiltinProblem::HingeEnsemble(p) => p,
            BuiltinProblem::TinyMlp(p) => p,
        }
    }
}

impl Problem for BuiltinProblem {
    fn name(&self) -> &str {
        self.inner().name()
    }
    fn dim(&self) -> usize {
        self.inner().dim()
    }
    fn meta(&self) -> &ProblemMeta {
        self.inner().meta()
    }
    fn eval_into(&self, w: &[f64], z: usize, grad: &mut [f64]) -> f64 {
        self.inner().eval_into(w, z, grad)
    }
    fn domain(&self) -> FeasibleRegion {
        self.inner().domain()
    }
    fn initial_point(&self) -> ParamVector {
        self.inner().initial_point()
    }
    fn near_kink(&self, w: &[f64], z: usize, h: f64) -> bool {
        self.inner().near_kink(w, z, h)
    }
}

/// Builds a problem of the given kind; the same arguments always yield the
/// same problem.
///
/// `eps > 0` selects tolerance mode, supported by the least-squares and
/// quadratic kinds only. Quadratic ensembles use eigenvalues in `[1, 4]`; use
/// [`QuadraticEnsembleProblem::new`] for other constants.
pub fn make_problem(kind: ProblemKind, dims: Dims, eps: f64, seed: u64) -> Result<BuiltinProblem> {
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::argument(format!("eps must be non-negative, got {eps}")));
    }
    if dims.samples == 0 || dims.dim == 0 {
        return Err(Error::argument("dims must be positive"));
    }
    if dims.hidden.is_some() && kind != ProblemKind::TinyMlp {
        return Err(Error::argument(format!("{kind} takes no hidden width")));
    }
    Ok(match kind {
        ProblemKind::RsiScalar => {
            if eps > 0.0 {
                return Err(Error::argument("rsi_scalar interpolates exactly; eps must be 0"));
            }
            if dims != Dims::new(1, 1) {
                return Err(Error::argument("rsi_scalar has one sample in one dimension"));
            }
            BuiltinProblem::RsiScalar(RsiScalarProblem::new())
        }
        ProblemKind::LeastSquares => {
            BuiltinProblem::LeastSquares(LeastSquaresProblem::new(dims.samples, dims.dim, eps, seed)?)
        }
        ProblemKind::QuadraticEnsemble => BuiltinProblem::QuadraticEnsemble(QuadraticEnsembleProblem::new(
            QuadraticConfig { samples: dims.samples, dim: dims.dim, eps, seed, ..Default::default() },
        )?),
        ProblemKind::HingeEnsemble => {
            if eps > 0.0 {
                return Err(Error::argument("hinge_ensemble supports exact interpolation only"));
            }
            BuiltinProblem::HingeEnsemble(HingeEnsembleProblem::new(dims.samples, dims.dim, seed)?)
        }
        ProblemKind::TinyMlp => {
            if eps > 0.0 {
                return Err(Error::argument("tiny_mlp supports exact interpolation only"));
            }
            let hidden = dims.hidden.unwrap_or(16);
            BuiltinProblem::TinyMlp(TinyMlpProblem::new(dims.samples, dims.dim, hidden, seed)?)
        }
    })
}

pub(crate) fn gaussian_vec<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}
