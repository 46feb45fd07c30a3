//! Fits of measured errors against the rate forms `c/√t`, `c/t` and
//! `c·exp(s·t)`.

use std::fmt;
use std::str::FromStr;

use alig::Trajectory;

use crate::error::{HarnessError, Result};

/// A fit with a larger max log-deviation is reported as non-conforming.
pub const CONFORMING_RESIDUAL: f64 = 0.5;
pub const MIN_FIT_POINTS: usize = 10;
pub const MIN_TRAJECTORY_LEN: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RateModel {
    InvSqrtT,
    InvT,
    Exponential,
}

impl RateModel {
    pub const ALL: [RateModel; 3] = [RateModel::InvSqrtT, RateModel::InvT, RateModel::Exponential];

    pub fn as_str(&self) -> &'static str {
        match self {
            RateModel::InvSqrtT => "inv_sqrt_t",
            RateModel::InvT => "inv_t",
            RateModel::Exponential => "exponential",
        }
    }

    fn power(&self) -> Option<f64> {
        match self {
            RateModel::InvSqrtT => Some(-0.5),
            RateModel::InvT => Some(-1.0),
            RateModel::Exponential => None,
        }
    }
}

impl fmt::Display for RateModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RateModel {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        RateModel::ALL
            .into_iter()
            .find(|m| m.as_str() == s.trim())
            .ok_or_else(|| HarnessError::Fit(format!("unknown rate model {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub model: RateModel,
    /// `c` in `c/√t`, `c/t` or `c·exp(s·t)`.
    pub fitted_constant: f64,
    /// Max absolute deviation between `log e` and the fitted curve.
    pub fit_residual: f64,
    /// First and last step used.
    pub window: (usize, usize),
    /// Exponential models: the fitted `s`. Power laws: the slope of a free
    /// least-squares line through `(log t, log e)`, for information.
    pub slope: f64,
}

impl RateFit {
    pub fn conforming(&self) -> bool {
        self.fit_residual < CONFORMING_RESIDUAL
    }
}

/// Error level below which rounding dominates: the squared relative
/// precision of the iterate times the initial error, or the absolute
/// precision of `f⋆`.
pub fn roundoff_floor(initial_error: f64, f_star: f64) -> f64 {
    1e4 * f64::EPSILON * f64::EPSILON * initial_error.abs() + 1e2 * f64::EPSILON * f_star.abs()
}

/// Fits `f(w_t) - f⋆` over the logged steps `t ≥ 1` of a trajectory.
///
/// The window stops before the first error that is zero or under
/// [`roundoff_floor`].
pub fn fit_rate(traj: &Trajectory, model: RateModel, f_star: f64) -> Result<RateFit> {
    if traj.len() < MIN_TRAJECTORY_LEN {
        return Err(HarnessError::Fit(format!(
            "trajectory has {} records, need {MIN_TRAJECTORY_LEN}",
            traj.len()
        )));
    }
    let errors: Vec<(usize, f64)> = traj.objectives().map(|(t, f)| (t, f - f_star)).collect();
    let e0 = errors.first().map_or(0.0, |&(_, e)| e);
    let floor = roundoff_floor(e0, f_star);
    let window: Vec<(usize, f64)> = errors
        .into_iter()
        .filter(|&(t, _)| t >= 1)
        .take_while(|&(_, e)| e > floor)
        .collect();
    fit_points(&window, model)
}

/// Fits `(t, e)` pairs with `t ≥ 1` and `e > 0`.
pub fn fit_points(points: &[(usize, f64)], model: RateModel) -> Result<RateFit> {
    if points.len() < MIN_FIT_POINTS {
        return Err(HarnessError::Fit(format!(
            "{} usable points, need {MIN_FIT_POINTS}",
            points.len()
        )));
    }
    if let Some(&(t, e)) = points.iter().find(|&&(t, e)| t == 0 || !(e > 0.0 && e.is_finite())) {
        return Err(HarnessError::Fit(format!("unusable point ({t}, {e})")));
    }
    let log_e: Vec<f64> = points.iter().map(|&(_, e)| e.ln()).collect();
    let window = (points[0].0, points[points.len() - 1].0);
    match model.power() {
        Some(p) => {
            let log_t: Vec<f64> = points.iter().map(|&(t, _)| (t as f64).ln()).collect();
            // log e = log c + p log t with p fixed: only the offset is fitted
            let offsets: Vec<f64> = log_e.iter().zip(&log_t).map(|(e, t)| e - p * t).collect();
            let log_c = mean(&offsets);
            let fit_residual = offsets.iter().map(|o| (o - log_c).abs()).fold(0.0, f64::max);
            let (slope, _) = ols(&log_t, &log_e);
            Ok(RateFit { model, fitted_constant: log_c.exp(), fit_residual, window, slope })
        }
        None => {
            let t: Vec<f64> = points.iter().map(|&(t, _)| t as f64).collect();
            let (slope, intercept) = ols(&t, &log_e);
            let fit_residual = t
                .iter()
                .zip(&log_e)
                .map(|(t, e)| (e - intercept - slope * t).abs())
                .fold(0.0, f64::max);
            Ok(RateFit { model, fitted_constant: intercept.exp(), fit_residual, window, slope })
        }
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Least-squares line `y = a·x + b`, returned as `(a, b)`.
fn ols(x: &[f64], y: &[f64]) -> (f64, f64) {
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = x.iter().map(|x| (x - mx) * (x - mx)).sum();
    let a = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (a, my - a * mx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alig::{StepRecord, Termination};
    use proptest::prelude::*;

    fn traj_from(values: &[f64]) -> Trajectory {
        let records = values
            .iter()
            .enumerate()
            .map(|(t, &f)| StepRecord {
                step: t,
                sample_indices: vec![],
                loss: f,
                step_size: 0.0,
                grad_norm_sq: 0.0,
                dist_to_opt_sq: None,
                full_objective: Some(f),
                averaged_objective: None,
            })
            .collect();
        Trajectory { records, termination: Termination::Completed }
    }

    #[test]
    fn exact_power_laws_fit_with_zero_residual() {
        let pts: Vec<(usize, f64)> = (1..200).map(|t| (t, 3.0 / (t as f64).sqrt())).collect();
        let fit = fit_points(&pts, RateModel::InvSqrtT).unwrap();
        assert!((fit.fitted_constant - 3.0).abs() < 1e-12);
        assert!(fit.fit_residual < 1e-12);
        assert!((fit.slope + 0.5).abs() < 1e-12);

        let pts: Vec<(usize, f64)> = (1..200).map(|t| (t, 2.0 / t as f64)).collect();
        let fit = fit_points(&pts, RateModel::InvT).unwrap();
        assert!((fit.fitted_constant - 2.0).abs() < 1e-12);
        assert!(fit.conforming());
    }

    #[test]
    fn exponential_fit_recovers_rate() {
        let pts: Vec<(usize, f64)> = (1..100).map(|t| (t, 5.0 * (-0.2 * t as f64).exp())).collect();
        let fit = fit_points(&pts, RateModel::Exponential).unwrap();
        assert!((fit.slope + 0.2).abs() < 1e-12);
        assert!((fit.fitted_constant - 5.0).abs() < 1e-10);
        assert!(fit.fit_residual < 1e-10);
    }

    #[test]
    fn constant_error_is_not_inv_sqrt_t() {
        let values = vec![0.7; 1001];
        let fit = fit_rate(&traj_from(&values), RateModel::InvSqrtT, 0.0).unwrap();
        // offsets are log 0.7 + ½ log t; the fitted constant is their mean
        let offsets: Vec<f64> = (1..=1000).map(|t| 0.7f64.ln() + 0.5 * (t as f64).ln()).collect();
        let m = offsets.iter().sum::<f64>() / offsets.len() as f64;
        let expected = offsets.iter().map(|o| (o - m).abs()).fold(0.0, f64::max);
        assert!((fit.fit_residual - expected).abs() < 1e-12);
        assert!(!fit.conforming());
        assert_eq!(fit.window, (1, 1000));
    }

    #[test]
    fn window_stops_at_exact_zero() {
        let mut values: Vec<f64> = (0..60).map(|t| (-(t as f64)).exp()).collect();
        values[30] = 0.0;
        let fit = fit_rate(&traj_from(&values), RateModel::Exponential, 0.0).unwrap();
        assert_eq!(fit.window, (1, 29));
        assert!((fit.slope + 1.0).abs() < 1e-9);
    }

    #[test]
    fn too_few_points_is_an_error() {
        let mut values: Vec<f64> = (0..60).map(|t| 1.0 / (t + 1) as f64).collect();
        values[5] = 0.0;
        assert!(fit_rate(&traj_from(&values), RateModel::InvT, 0.0).is_err());
        assert!(fit_rate(&traj_from(&values[..20]), RateModel::InvT, 0.0).is_err());
    }

    #[test]
    fn model_names_round_trip() {
        for m in RateModel::ALL {
            assert_eq!(m.as_str().parse::<RateModel>().unwrap(), m);
        }
        assert!("linear".parse::<RateModel>().is_err());
    }

    proptest! {
        #[test]
        fn residual_is_max_log_deviation(c in 0.1f64..10.0, noise in proptest::collection::vec(-0.3f64..0.3, 20..80)) {
            let pts: Vec<(usize, f64)> = noise.iter().enumerate()
                .map(|(i, n)| (i + 1, c / (i + 1) as f64 * n.exp()))
                .collect();
            let fit = fit_points(&pts, RateModel::InvT).unwrap();
            let log_c = fit.fitted_constant.ln();
            let dev = pts.iter().map(|&(t, e)| (e.ln() - (log_c - (t as f64).ln())).abs()).fold(0.0, f64::max);
            prop_assert!((dev - fit.fit_residual).abs() < 1e-9);
            prop_assert!(fit.fit_residual <= 0.6 + 1e-9);
        }
    }
}
