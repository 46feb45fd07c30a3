//! Closed-form step-size rules.
//!
//! Both rules use the convention `0/0 = 0`: a zero residual with a zero
//! gradient is a fixed point, not an error. A positive residual over a zero
//! denominator is reported as [`Error::DivergentStep`].

use crate::error::{Error, Result};
use crate::types::{dot, norm_sq, ParamVector};

fn check_non_negative(name: &str, x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::argument(format!("{name} must be non-negative, got {x}")));
    }
    Ok(())
}

/// Polyak step-size `(f(w) - f*) / ‖∇f(w)‖²`.
pub fn polyak_step_size(f_val: f64, f_star: f64, grad_norm_sq: f64) -> Result<f64> {
    check_non_negative("squared gradient norm", grad_norm_sq)?;
    if !f_val.is_finite() || !f_star.is_finite() {
        return Err(Error::Domain("objective value"));
    }
    if f_val < f_star {
        return Err(Error::argument(format!(
            "objective {f_val:e} is below the declared minimum {f_star:e}"
        )));
    }
    let gap = f_val - f_star;
    if gap == 0.0 {
        return Ok(0.0);
    }
    if grad_norm_sq == 0.0 {
        return Err(Error::DivergentStep { loss: gap, grad_norm_sq });
    }
    Ok(gap / grad_norm_sq)
}

/// ALI-G step-size `min{ℓ / (‖∇ℓ‖² + δ), η}`. Pass `f64::INFINITY` as `eta`
/// for the unclipped variant.
pub fn alig_step_size(loss: f64, grad_norm_sq: f64, delta: f64, eta: f64) -> Result<f64> {
    check_non_negative("loss", loss)?;
    check_non_negative("squared gradient norm", grad_norm_sq)?;
    check_non_negative("delta", delta)?;
    if eta.is_nan() || eta <= 0.0 {
        return Err(Error::argument(format!("maximal learning-rate must be positive, got {eta}")));
    }
    if loss == 0.0 {
        return Ok(0.0);
    }
    let denom = grad_norm_sq + delta;
    if denom == 0.0 {
        return Err(Error::DivergentStep { loss, grad_norm_sq });
    }
    Ok((loss / denom).min(eta))
}

/// Minimizer of `‖w - w_t‖² / (2η) + max{ℓ + gᵀ(w - w_t), 0}`, the proximal
/// problem on the zero-truncated linearization, with `δ = 0`.
pub fn prox_truncated_solve(
    w_t: &ParamVector,
    loss: f64,
    gradient: &ParamVector,
    eta: f64,
) -> Result<ParamVector> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::argument(format!("eta must be positive and finite, got {eta}")));
    }
    if gradient.dim() != w_t.dim() {
        return Err(Error::Dimension { expected: w_t.dim(), got: gradient.dim() });
    }
    let gamma = alig_step_size(loss, gradient.norm_sq(), 0.0, eta)?;
    let next: Vec<f64> = w_t.iter().zip(gradient.iter()).map(|(w, g)| w - gamma * g).collect();
    ParamVector::new(next)
}

/// Whether `w_next` is the closest point to `w_t` on the hyperplane where the
/// linearization at `w_t` equals `f_star`.
///
/// Checks that the linearization vanishes at `w_next` (to `1e-10` relative) and
/// that the displacement is parallel to the gradient.
pub fn hyperplane_intersection_check(
    w_t: &ParamVector,
    w_next: &ParamVector,
    f_val: f64,
    gradient: &ParamVector,
    f_star: f64,
) -> bool {
    if w_t.dim() != w_next.dim() || w_t.dim() != gradient.dim() {
        return false;
    }
    let g_sq = gradient.norm_sq();
    if g_sq == 0.0 {
        return false;
    }
    let disp: Vec<f64> = w_next.iter().zip(w_t.iter()).map(|(a, b)| a - b).collect();
    let gap = f_val + dot(gradient, &disp) - f_star;
    let scale = 1.0f64.max(f_star.abs()).max(f_val.abs());
    if gap.abs() > 1e-10 * scale {
        return false;
    }
    // component of the displacement orthogonal to the gradient
    let along = dot(&disp, gradient) / g_sq;
    let orth_sq: f64 = disp
        .iter()
        .zip(gradient.iter())
        .map(|(d, g)| {
            let r = d - along * g;
            r * r
        })
        .sum();
    orth_sq.sqrt() <= 1e-10 * 1.0f64.max(norm_sq(&disp).sqrt())
}
