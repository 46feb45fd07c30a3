use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gaussian_vec;
use crate::error::{Error, Result};
use crate::problem::Problem;
use crate::types::{ParamVector, ProblemMeta};

const TEACHER_BIAS_STD: f64 = 0.5;

/// Two-layer tanh network with scalar output and squared loss,
/// `ℓ_i(θ) = (w₂ᵀ tanh(W₁x_i + b₁) + b₂ - t_i)²`.
///
/// Targets come from a teacher network of the same shape, so the teacher's
/// parameters reach zero loss on every sample. Parameters are laid out as
/// `[W₁ (row-major, hidden × input), b₁, w₂, b₂]`.
#[derive(Debug, Clone)]
pub struct TinyMlpProblem {
    input_dim: usize,
    hidden: usize,
    inputs: Vec<f64>,
    targets: Vec<f64>,
    start: Vec<f64>,
    meta: ProblemMeta,
}

impl TinyMlpProblem {
    pub fn new(samples: usize, input_dim: usize, hidden: usize, seed: u64) -> Result<Self> {
        if samples == 0 || input_dim == 0 || hidden == 0 {
            return Err(Error::argument("tiny_mlp needs positive dims"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let teacher = Self::random_params(&mut rng, input_dim, hidden, TEACHER_BIAS_STD);
        let inputs = gaussian_vec(&mut rng, samples * input_dim);
        let start = Self::random_params(&mut rng, input_dim, hidden, 0.0);
        let targets = inputs
            .chunks(input_dim)
            .map(|x| forward(&teacher, x, input_dim, hidden, None))
            .collect();
        Self::from_parts(input_dim, hidden, inputs, targets, teacher, start)
    }

    /// Parameters drawn like the teacher's.
    pub fn random_parameters<R: Rng>(&self, rng: &mut R) -> ParamVector {
        ParamVector::from_finite(Self::random_params(rng, self.input_dim, self.hidden, TEACHER_BIAS_STD))
    }

    /// Scaled Gaussian weights; biases drawn with standard deviation `bias_std`.
    fn random_params<R: Rng>(rng: &mut R, d: usize, h: usize, bias_std: f64) -> Vec<f64> {
        let mut p = Vec::with_capacity(param_count(d, h));
        p.extend(gaussian_vec(rng, h * d).into_iter().map(|x| x / (d as f64).sqrt()));
        p.extend(gaussian_vec(rng, h).into_iter().map(|x| x * bias_std));
        p.extend(gaussian_vec(rng, h).into_iter().map(|x| x / (h as f64).sqrt()));
        p.push(0.0);
        p
    }

    pub fn from_parts(
        input_dim: usize,
        hidden: usize,
        inputs: Vec<f64>,
        targets: Vec<f64>,
        teacher: Vec<f64>,
        start: Vec<f64>,
    ) -> Result<Self> {
        let p = param_count(input_dim, hidden);
        if targets.is_empty() || inputs.len() != targets.len() * input_dim || teacher.len() != p || start.len() != p {
            return Err(Error::argument("inconsistent mlp data"));
        }
        let mut problem = TinyMlpProblem {
            input_dim,
            hidden,
            meta: ProblemMeta::new(targets.len()),
            inputs,
            targets,
            start: start.clone(),
        };
        let f_star = crate::problem::mean_loss(&problem, &teacher);
        problem.meta = ProblemMeta {
            num_samples: problem.targets.len(),
            minimizer: Some(ParamVector::new(teacher)?),
            f_star: Some(f_star),
            interp_tolerance_eps: Some(0.0),
            ..Default::default()
        };
        ParamVector::new(start)?;
        Ok(problem)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }
}

pub(crate) fn param_count(d: usize, h: usize) -> usize {
    h * d + 2 * h + 1
}

/// Network output; when `grad_out` is given, writes `∂y/∂θ` into it.
fn forward(params: &[f64], x: &[f64], d: usize, h: usize, mut grad_out: Option<&mut [f64]>) -> f64 {
    let (w1, rest) = params.split_at(h * d);
    let (b1, rest) = rest.split_at(h);
    let (w2, b2) = rest.split_at(h);
    let mut y = b2[0];
    for j in 0..h {
        let pre: f64 = b1[j] + w1[j * d..(j + 1) * d].iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>();
        let act = pre.tanh();
        y += w2[j] * act;
        if let Some(g) = grad_out.as_deref_mut() {
            let dpre = w2[j] * (1.0 - act * act);
            for k in 0..d {
                g[j * d + k] = dpre * x[k];
            }
            g[h * d + j] = dpre;
            g[h * d + h + j] = act;
        }
    }
    if let Some(g) = grad_out {
        g[h * d + 2 * h] = 1.0;
    }
    y
}

impl Problem for TinyMlpProblem {
    fn name(&self) -> &str {
        "tiny_mlp"
    }

    fn dim(&self) -> usize {
        param_count(self.input_dim, self.hidden)
    }

    fn meta(&self) -> &ProblemMeta {
        &self.meta
    }

    fn eval_into(&self, w: &[f64], z: usize, grad: &mut [f64]) -> f64 {
        let d = self.input_dim;
        let x = &self.inputs[z * d..(z + 1) * d];
        let y = forward(w, x, d, self.hidden, Some(grad));
        let r = y - self.targets[z];
        grad.iter_mut().for_each(|g| *g *= 2.0 * r);
        r * r
    }

    fn initial_point(&self) -> ParamVector {
        ParamVector::from_finite(self.start.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::full_objective;

    #[test]
    fn teacher_interpolates_exactly() {
        let p = TinyMlpProblem::new(32, 4, 16, 0).unwrap();
        assert_eq!(p.dim(), 97);
        let teacher = p.meta().minimizer.clone().unwrap();
        assert_eq!(full_objective(&p, &teacher).unwrap(), 0.0);
        assert!(full_objective(&p, &p.initial_point()).unwrap() > 1e-3);
    }
}
