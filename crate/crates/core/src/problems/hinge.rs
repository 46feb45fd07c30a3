use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::gaussian_vec;
use crate::error::{Error, Result};
use crate::problem::Problem;
use crate::types::{dot, norm_sq, ParamVector, ProblemMeta};

/// Smallest `|xᵀu|` accepted when drawing separable data.
const MIN_MARGIN: f64 = 0.1;

/// Binary hinge losses `ℓ_i(w) = max{0, 1 - y_i x_iᵀw}` on linearly separable
/// data. The subgradient at the kink is taken to be zero.
#[derive(Debug, Clone)]
pub struct HingeEnsembleProblem {
    dim: usize,
    inputs: Vec<f64>,
    labels: Vec<f64>,
    meta: ProblemMeta,
}

impl HingeEnsembleProblem {
    pub fn new(samples: usize, dim: usize, seed: u64) -> Result<Self> {
        if samples == 0 || dim == 0 {
            return Err(Error::argument("hinge_ensemble needs positive dims"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut u = gaussian_vec(&mut rng, dim);
        let n = norm_sq(&u).sqrt();
        u.iter_mut().for_each(|x| *x /= n);

        let mut inputs = Vec::with_capacity(samples * dim);
        let mut labels = Vec::with_capacity(samples);
        let mut min_margin = f64::INFINITY;
        while labels.len() < samples {
            let x = gaussian_vec(&mut rng, dim);
            let m = dot(&x, &u);
            if m.abs() < MIN_MARGIN {
                continue;
            }
            min_margin = min_margin.min(m.abs());
            labels.push(m.signum());
            inputs.extend(x);
        }
        // slightly above the exact margin so every loss rounds to zero
        let w_star: Vec<f64> = u.iter().map(|x| x * (1.0 + 1e-9) / min_margin).collect();
        Self::from_parts(dim, inputs, labels, w_star)
    }

    pub fn from_parts(dim: usize, inputs: Vec<f64>, labels: Vec<f64>, w_star: Vec<f64>) -> Result<Self> {
        if dim == 0 || labels.is_empty() || inputs.len() != labels.len() * dim || w_star.len() != dim {
            return Err(Error::argument("inconsistent hinge data"));
        }
        if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
            return Err(Error::argument("hinge labels must be +1 or -1"));
        }
        let lipschitz = inputs.chunks(dim).map(|x| norm_sq(x).sqrt()).fold(0.0, f64::max);
        let labels_len = labels.len();
        let mut problem = HingeEnsembleProblem { dim, inputs, labels, meta: ProblemMeta::new(labels_len) };
        let f_star = crate::problem::mean_loss(&problem, &w_star);
        if f_star != 0.0 {
            return Err(Error::argument("hinge minimizer does not separate the data"));
        }
        problem.meta = ProblemMeta {
            num_samples: problem.labels.len(),
            minimizer: Some(ParamVector::new(w_star)?),
            f_star: Some(0.0),
            lipschitz_c: Some(lipschitz),
            smoothness_beta: None,
            rsi_alpha: None,
            strong_convexity_alpha: None,
            interp_tolerance_eps: Some(0.0),
        };
        Ok(problem)
    }

    pub fn input(&self, z: usize) -> &[f64] {
        &self.inputs[z * self.dim..(z + 1) * self.dim]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    fn slack(&self, w: &[f64], z: usize) -> f64 {
        1.0 - self.labels[z] * dot(self.input(z), w)
    }
}

impl Problem for HingeEnsembleProblem {
    fn name(&self) -> &str {
        "hinge_ensemble"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn meta(&self) -> &ProblemMeta {
        &self.meta
    }

    fn eval_into(&self, w: &[f64], z: usize, grad: &mut [f64]) -> f64 {
        let s = self.slack(w, z);
        if s > 0.0 {
            let y = self.labels[z];
            grad.iter_mut().zip(self.input(z)).for_each(|(g, x)| *g = -y * x);
            s
        } else {
            grad.iter_mut().for_each(|g| *g = 0.0);
            0.0
        }
    }

    fn initial_point(&self) -> ParamVector {
        ParamVector::zeros(self.dim)
    }

    fn near_kink(&self, w: &[f64], z: usize, h: f64) -> bool {
        let x_inf = self.input(z).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        self.slack(w, z).abs() < 10.0 * h * x_inf.max(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::evaluate_sample;

    #[test]
    fn minimizer_separates_with_margin() {
        let p = HingeEnsembleProblem::new(40, 10, 3).unwrap();
        let w = p.meta().minimizer.clone().unwrap();
        for z in 0..40 {
            let e = evaluate_sample(&p, &w, z).unwrap();
            assert_eq!(e.loss, 0.0);
            assert_eq!(e.gradient.norm_sq(), 0.0);
        }
    }

    #[test]
    fn kink_uses_zero_subgradient() {
        let p = HingeEnsembleProblem::from_parts(1, vec![2.0], vec![1.0], vec![1.0]).unwrap();
        let e = evaluate_sample(&p, &ParamVector::new(vec![0.5]).unwrap(), 0).unwrap();
        assert_eq!(e.loss, 0.0);
        assert_eq!(e.gradient[0], 0.0);
        let e = evaluate_sample(&p, &ParamVector::new(vec![0.0]).unwrap(), 0).unwrap();
        assert_eq!(e.loss, 1.0);
        assert_eq!(e.gradient[0], -2.0);
    }
}
