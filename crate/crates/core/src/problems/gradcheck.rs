use crate::error::{Error, Result};
use crate::problem::Problem;
use crate::types::ParamVector;

const ABS_FLOOR: f64 = 1e-8;

/// Largest relative deviation between the analytic gradient and a central
/// finite difference with step `h`, over every coordinate and sample.
///
/// The relative error is `|a - n| / max(|a|, |n|, 1e-8)`. Samples within
/// `10h` of a kink are skipped.
pub fn check_gradient(problem: &dyn Problem, w: &ParamVector, h: f64) -> Result<f64> {
    if !(1e-8..=1e-3).contains(&h) {
        return Err(Error::argument(format!("finite-difference step {h} outside [1e-8, 1e-3]")));
    }
    let dim = problem.dim();
    if w.dim() != dim {
        return Err(Error::Dimension { expected: dim, got: w.dim() });
    }
    let mut analytic = vec![0.0; dim];
    let mut scratch = vec![0.0; dim];
    let mut probe = w.as_slice().to_vec();
    let mut worst: f64 = 0.0;
    for z in 0..problem.num_samples() {
        if problem.near_kink(w, z, h) {
            continue;
        }
        problem.eval_into(w, z, &mut analytic);
        for j in 0..dim {
            let orig = probe[j];
            probe[j] = orig + h;
            let plus = problem.eval_into(&probe, z, &mut scratch);
            probe[j] = orig - h;
            let minus = problem.eval_into(&probe, z, &mut scratch);
            probe[j] = orig;
            let numeric = (plus - minus) / (2.0 * h);
            let a = analytic[j];
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(ABS_FLOOR);
            worst = worst.max(err);
        }
    }
    Ok(worst)
}
