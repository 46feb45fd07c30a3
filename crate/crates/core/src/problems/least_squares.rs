use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::gaussian_vec;
use crate::error::{Error, Result};
use crate::problem::Problem;
use crate::types::{dot, norm_sq, ParamVector, ProblemMeta};

/// Per-sample squared residuals `ℓ_i(w) = (a_iᵀw - b_i)²`.
///
/// With `eps = 0` the targets are `b = A w⋆` exactly. With `eps > 0` the
/// targets carry a residual orthogonal to the range of `A`, so `w⋆` is still
/// the least-squares solution while `max_i ℓ_i(w⋆) = eps`.
#[derive(Debug, Clone)]
pub struct LeastSquaresProblem {
    dim: usize,
    rows: Vec<f64>,
    targets: Vec<f64>,
    meta: ProblemMeta,
}

impl LeastSquaresProblem {
    pub fn new(samples: usize, dim: usize, eps: f64, seed: u64) -> Result<Self> {
        if samples == 0 || dim == 0 {
            return Err(Error::argument("least_squares needs positive dims"));
        }
        if eps > 0.0 && samples <= dim {
            return Err(Error::argument(
                "least_squares tolerance mode needs more samples than dimensions",
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = gaussian_vec(&mut rng, samples * dim);
        let w_star = gaussian_vec(&mut rng, dim);
        let mut targets: Vec<f64> = rows.chunks(dim).map(|a| dot(a, &w_star)).collect();

        if eps > 0.0 {
            let a = DMatrix::from_row_slice(samples, dim, &rows);
            let q = a.qr().q();
            let z = DVector::from_vec(gaussian_vec(&mut rng, samples));
            let r = &z - &q * (q.transpose() * &z);
            let max_abs = r.amax();
            if max_abs == 0.0 {
                return Err(Error::argument("degenerate residual draw"));
            }
            // keep ℓ_i(w⋆) ≤ eps after rounding
            let scale = eps.sqrt() * (1.0 - 1e-9) / max_abs;
            targets.iter_mut().zip(r.iter()).for_each(|(b, ri)| *b += scale * ri);
        }
        Self::from_parts(dim, rows, targets, w_star, eps)
    }

    /// Rebuilds a problem from raw data: `rows` is row-major `n × dim`.
    pub fn from_parts(dim: usize, rows: Vec<f64>, targets: Vec<f64>, w_star: Vec<f64>, eps: f64) -> Result<Self> {
        if dim == 0 || targets.is_empty() || rows.len() != targets.len() * dim || w_star.len() != dim {
            return Err(Error::argument("inconsistent least-squares data"));
        }
        let max_row_sq = rows.chunks(dim).map(norm_sq).fold(0.0, f64::max);
        let mut problem = LeastSquaresProblem {
            dim,
            meta: ProblemMeta::new(targets.len()),
            rows,
            targets,
        };
        let f_star = crate::problem::mean_loss(&problem, &w_star);
        problem.meta = ProblemMeta {
            num_samples: problem.targets.len(),
            minimizer: Some(ParamVector::new(w_star)?),
            f_star: Some(f_star),
            lipschitz_c: None,
            smoothness_beta: Some(2.0 * max_row_sq),
            rsi_alpha: None,
            strong_convexity_alpha: None,
            interp_tolerance_eps: Some(eps),
        };
        Ok(problem)
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.rows.chunks(self.dim)
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }
}

impl Problem for LeastSquaresProblem {
    fn name(&self) -> &str {
        "least_squares"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn meta(&self) -> &ProblemMeta {
        &self.meta
    }

    fn eval_into(&self, w: &[f64], z: usize, grad: &mut [f64]) -> f64 {
        let a = &self.rows[z * self.dim..(z + 1) * self.dim];
        let r = dot(a, w) - self.targets[z];
        grad.iter_mut().zip(a).for_each(|(g, ai)| *g = 2.0 * r * ai);
        r * r
    }

    fn initial_point(&self) -> ParamVector {
        ParamVector::zeros(self.dim)
    }
}
