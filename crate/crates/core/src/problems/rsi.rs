use crate::problem::Problem;
use crate::projection::FeasibleRegion;
use crate::types::{ParamVector, ProblemMeta};

/// Half-width of the interval on which the scalar RSI example is defined:
/// the smallest double not below `3/5`.
///
/// `±3/5` is a repelling two-cycle of Polyak's method (each step multiplies
/// a perturbation by -16), and the nearest double `0.6` lies just inside it,
/// so iterates started there drift to 0 within a dozen steps. Started from
/// just outside, every step overshoots and the projection pins the cycle.
pub const RSI_DOMAIN_BOUND: f64 = 0.6f64.next_up();

/// `f(w) = w² - |w|³` on `[-3/5, 3/5]`, a single-sample non-convex function
/// that satisfies the restricted secant inequality with constant `1/5`.
///
/// The domain is reported as a one-dimensional l2 ball of radius `3/5`, which
/// is exactly the interval; optimizers clamp iterates to it.
#[derive(Debug, Clone)]
pub struct RsiScalarProblem {
    meta: ProblemMeta,
}

impl RsiScalarProblem {
    pub fn new() -> Self {
        let meta = ProblemMeta {
            num_samples: 1,
            minimizer: Some(ParamVector::zeros(1)),
            f_star: Some(0.0),
            lipschitz_c: None,
            // |f''(w)| = |2 - 6|w|| <= 2 on the domain
            smoothness_beta: Some(2.0),
            rsi_alpha: Some(0.2),
            strong_convexity_alpha: None,
            interp_tolerance_eps: Some(0.0),
        };
        RsiScalarProblem { meta }
    }

    pub fn value(w: f64) -> f64 {
        w * w - w.abs().powi(3)
    }

    /// `2w - 3σ(w)w²` with `σ(0) = 1`.
    pub fn derivative(w: f64) -> f64 {
        let sign = if w >= 0.0 { 1.0 } else { -1.0 };
        2.0 * w - 3.0 * sign * w * w
    }
}

impl Default for RsiScalarProblem {
    fn default() -> Self {
        Self::new()
    }
}

impl Problem for RsiScalarProblem {
    fn name(&self) -> &str {
        "rsi_scalar"
    }

    fn dim(&self) -> usize {
        1
    }

    fn meta(&self) -> &ProblemMeta {
        &self.meta
    }

    fn eval_into(&self, w: &[f64], _z: usize, grad: &mut [f64]) -> f64 {
        grad[0] = Self::derivative(w[0]);
        Self::value(w[0])
    }

    fn domain(&self) -> FeasibleRegion {
        FeasibleRegion::L2Ball { radius: RSI_DOMAIN_BOUND }
    }

    fn initial_point(&self) -> ParamVector {
        ParamVector::from_finite(vec![-RSI_DOMAIN_BOUND])
    }
}
