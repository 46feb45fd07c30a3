use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gaussian_vec;
use crate::error::{Error, Result};
use crate::problem::Problem;
use crate::types::{ParamVector, ProblemMeta};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticConfig {
    pub samples: usize,
    pub dim: usize,
    /// Smallest eigenvalue of every `A_i`.
    pub alpha: f64,
    /// Largest eigenvalue of every `A_i`.
    pub beta: f64,
    /// Offsets `c_i` are drawn from `[0, eps]`.
    pub eps: f64,
    pub seed: u64,
    /// Put the shared minimizer at the origin.
    pub centered: bool,
}

impl Default for QuadraticConfig {
    fn default() -> Self {
        QuadraticConfig {
            samples: 20,
            dim: 10,
            alpha: 1.0,
            beta: 4.0,
            eps: 0.0,
            seed: 0,
            centered: false,
        }
    }
}

/// `ℓ_i(w) = ½(w - w⋆)ᵀA_i(w - w⋆) + c_i` with a shared minimizer.
///
/// Each `A_i = Q_i Λ_i Q_iᵀ` with eigenvalues drawn in `[α, β]`; the first
/// sample carries both endpoints so the declared constants are tight.
#[derive(Debug, Clone)]
pub struct QuadraticEnsembleProblem {
    dim: usize,
    alpha: f64,
    beta: f64,
    /// Row-major `dim × dim` blocks, one per sample.
    matrices: Vec<f64>,
    offsets: Vec<f64>,
    w_star: Vec<f64>,
    start: Vec<f64>,
    meta: ProblemMeta,
}

impl QuadraticEnsembleProblem {
    pub fn new(cfg: QuadraticConfig) -> Result<Self> {
        if cfg.samples == 0 || cfg.dim == 0 {
            return Err(Error::argument("quadratic_ensemble needs positive dims"));
        }
        if !(cfg.alpha > 0.0 && cfg.alpha <= cfg.beta && cfg.beta.is_finite()) {
            return Err(Error::argument(format!(
                "need 0 < alpha <= beta, got alpha={} beta={}",
                cfg.alpha, cfg.beta
            )));
        }
        let d = cfg.dim;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut matrices = Vec::with_capacity(cfg.samples * d * d);
        for i in 0..cfg.samples {
            let mut eig: Vec<f64> = (0..d).map(|_| rng.random_range(cfg.alpha..=cfg.beta)).collect();
            if i == 0 {
                eig[0] = cfg.alpha;
                eig[d - 1] = cfg.beta;
            }
            let g = DMatrix::from_vec(d, d, gaussian_vec(&mut rng, d * d));
            let q = g.qr().q();
            let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(eig));
            let a = &q * lambda * q.transpose();
            let a = (&a + a.transpose()) * 0.5;
            for r in 0..d {
                for c in 0..d {
                    matrices.push(a[(r, c)]);
                }
            }
        }
        let offsets: Vec<f64> = (0..cfg.samples)
            .map(|_| if cfg.eps > 0.0 { rng.random_range(0.0..=cfg.eps) } else { 0.0 })
            .collect();
        let w_star = if cfg.centered { vec![0.0; d] } else { gaussian_vec(&mut rng, d) };
        let start: Vec<f64> = w_star.iter().zip(gaussian_vec(&mut rng, d)).map(|(a, b)| a + b).collect();
        Self::from_parts(d, cfg.alpha, cfg.beta, matrices, offsets, w_star, start, cfg.eps)
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        dim: usize,
        alpha: f64,
        beta: f64,
        matrices: Vec<f64>,
        offsets: Vec<f64>,
        w_star: Vec<f64>,
        start: Vec<f64>,
        eps: f64,
    ) -> Result<Self> {
        let n = offsets.len();
        if n == 0 || matrices.len() != n * dim * dim || w_star.len() != dim || start.len() != dim {
            return Err(Error::argument("inconsistent quadratic data"));
        }
        if offsets.iter().any(|&c| !(0.0..=eps).contains(&c)) {
            return Err(Error::argument("quadratic offsets must lie in [0, eps]"));
        }
        let f_star = offsets.iter().sum::<f64>() / n as f64;
        let meta = ProblemMeta {
            num_samples: n,
            minimizer: Some(ParamVector::new(w_star.clone())?),
            f_star: Some(f_star),
            lipschitz_c: None,
            smoothness_beta: Some(beta),
            rsi_alpha: Some(alpha),
            strong_convexity_alpha: Some(alpha),
            interp_tolerance_eps: Some(eps),
        };
        Ok(QuadraticEnsembleProblem { dim, alpha, beta, matrices, offsets, w_star, start, meta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn matrix(&self, z: usize) -> &[f64] {
        let s = self.dim * self.dim;
        &self.matrices[z * s..(z + 1) * s]
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn minimizer(&self) -> &[f64] {
        &self.w_star
    }
}

impl Problem for QuadraticEnsembleProblem {
    fn name(&self) -> &str {
        "quadratic_ensemble"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn meta(&self) -> &ProblemMeta {
        &self.meta
    }

    fn eval_into(&self, w: &[f64], z: usize, grad: &mut [f64]) -> f64 {
        let a = self.matrix(z);
        let d = self.dim;
        let mut quad = 0.0;
        for r in 0..d {
            let row = &a[r * d..(r + 1) * d];
            let mut g = 0.0;
            for c in 0..d {
                g += row[c] * (w[c] - self.w_star[c]);
            }
            grad[r] = g;
            quad += g * (w[r] - self.w_star[r]);
        }
        0.5 * quad + self.offsets[z]
    }

    fn initial_point(&self) -> ParamVector {
        ParamVector::from_finite(self.start.clone())
    }
}
