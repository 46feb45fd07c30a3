use crate::error::{Error, Result};
use crate::projection::FeasibleRegion;
use crate::types::{ParamVector, ProblemMeta, SampleEval};

/// A finite-sum objective `f(w) = (1/n) Σ ℓ_z(w)` with non-negative per-sample
/// losses and analytic gradients.
///
/// Implementations are immutable after construction and may be evaluated from
/// several threads at once.
pub trait Problem: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn meta(&self) -> &ProblemMeta;

    fn num_samples(&self) -> usize {
        self.meta().num_samples
    }

    /// Loss of sample `z` at `w`; writes the gradient into `grad`.
    ///
    /// Callers guarantee `z < num_samples()`, finite `w`, and matching
    /// lengths; use [`evaluate_sample`] for checked access.
    fn eval_into(&self, w: &[f64], z: usize, grad: &mut [f64]) -> f64;

    /// Set on which the loss is defined. Optimizers intersect this with the
    /// user-supplied feasible region.
    fn domain(&self) -> FeasibleRegion {
        FeasibleRegion::Unconstrained
    }

    /// Deterministic starting point, feasible for [`Problem::domain`].
    fn initial_point(&self) -> ParamVector;

    /// Whether sample `z` is non-differentiable within `h` of `w`.
    fn near_kink(&self, _w: &[f64], _z: usize, _h: f64) -> bool {
        false
    }
}

fn check_point(problem: &dyn Problem, w: &ParamVector) -> Result<()> {
    if w.dim() != problem.dim() {
        return Err(Error::Dimension { expected: problem.dim(), got: w.dim() });
    }
    Ok(())
}

fn check_index(problem: &dyn Problem, z: usize) -> Result<()> {
    let n = problem.num_samples();
    if z >= n {
        return Err(Error::Index { index: z, len: n });
    }
    Ok(())
}

fn finish(loss: f64, grad: Vec<f64>) -> Result<SampleEval> {
    if !loss.is_finite() {
        return Err(Error::Domain("loss"));
    }
    Ok(SampleEval { loss, gradient: ParamVector::new(grad)? })
}

pub fn evaluate_sample(problem: &dyn Problem, w: &ParamVector, z: usize) -> Result<SampleEval> {
    check_point(problem, w)?;
    check_index(problem, z)?;
    let mut grad = vec![0.0; problem.dim()];
    let loss = problem.eval_into(w, z, &mut grad);
    finish(loss, grad)
}

/// Mean loss and mean gradient over `indices`.
pub fn evaluate_batch(problem: &dyn Problem, w: &ParamVector, indices: &[usize]) -> Result<SampleEval> {
    if indices.is_empty() {
        return Err(Error::argument("batch must contain at least one index"));
    }
    check_point(problem, w)?;
    for &z in indices {
        check_index(problem, z)?;
    }
    let (loss, grad) = batch_mean(problem, w, indices);
    finish(loss, grad)
}

pub(crate) fn batch_mean(problem: &dyn Problem, w: &[f64], indices: &[usize]) -> (f64, Vec<f64>) {
    let dim = problem.dim();
    let mut grad = vec![0.0; dim];
    let mut scratch = vec![0.0; dim];
    let mut loss = 0.0;
    for &z in indices {
        loss += problem.eval_into(w, z, &mut scratch);
        grad.iter_mut().zip(&scratch).for_each(|(g, s)| *g += s);
    }
    let n = indices.len() as f64;
    grad.iter_mut().for_each(|g| *g /= n);
    (loss / n, grad)
}

pub(crate) fn mean_loss(problem: &dyn Problem, w: &[f64]) -> f64 {
    let mut scratch = vec![0.0; problem.dim()];
    let n = problem.num_samples();
    let total: f64 = (0..n).map(|z| problem.eval_into(w, z, &mut scratch)).sum();
    total / n as f64
}

/// `f(w)`: the mean loss over all samples.
pub fn full_objective(problem: &dyn Problem, w: &ParamVector) -> Result<f64> {
    check_point(problem, w)?;
    let f = mean_loss(problem, w);
    if !f.is_finite() {
        return Err(Error::Domain("objective"));
    }
    Ok(f)
}
