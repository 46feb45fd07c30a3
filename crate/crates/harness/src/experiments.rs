//! Fixed experiments on the built-in problems, shared by `verify` and the
//! acceptance tests.

use alig::problems::{QuadraticConfig, QuadraticEnsembleProblem, RsiScalarProblem, TinyMlpProblem};
use alig::{
    alig_momentum_step, alig_step, full_objective, polyak_gd_step, run, FeasibleRegion, MomentumVariant, OptimizerConfig,
    OptimizerKind, OptimizerState, Problem, Trajectory,
};
use rayon::prelude::*;

use crate::error::{HarnessError, Result};
use crate::rates::{fit_rate, RateFit, RateModel};

pub const OSCILLATION_VALUE: f64 = 18.0 / 125.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Oscillation {
    pub steps: usize,
    /// Max over `t ≤ steps` of `||w_t| - 3/5|`.
    pub max_radius_error: f64,
    /// Max over `t ≤ steps` of `|f(w_t) - 18/125|`.
    pub max_objective_error: f64,
    /// `f(w_t)` never fell below `18/125` by more than rounding.
    pub never_improves: bool,
}

/// Polyak-GD on `w² - |w|³` from `w₀ = -3/5` with `f⋆ = 0`.
pub fn polyak_oscillation(steps: usize) -> Result<Oscillation> {
    let p = RsiScalarProblem::new();
    let mut state = OptimizerState::new(&p, &p.initial_point(), FeasibleRegion::Unconstrained, 0)?;
    let mut o = Oscillation { steps, max_radius_error: 0.0, max_objective_error: 0.0, never_improves: true };
    for t in 0..=steps {
        if t > 0 {
            polyak_gd_step(&mut state, &p, 0.0)?;
        }
        let f = full_objective(&p, &state.params())?;
        o.max_radius_error = o.max_radius_error.max((state.w()[0].abs() - 0.6).abs());
        o.max_objective_error = o.max_objective_error.max((f - OSCILLATION_VALUE).abs());
        o.never_improves &= f >= OSCILLATION_VALUE - 1e-12;
    }
    Ok(o)
}

/// ALI-G on `w² - |w|³` from `-3/5`.
pub fn rsi_alig(eta: f64, delta: f64, steps: usize, stop_below: Option<f64>) -> Result<Trajectory> {
    let p = RsiScalarProblem::new();
    let config = OptimizerConfig {
        max_lr_eta: eta,
        delta,
        max_steps: steps,
        stop_threshold: stop_below.map(f64::next_down),
        ..Default::default()
    };
    Ok(run(&p, &config, OptimizerKind::Alig, FeasibleRegion::Unconstrained, &p.initial_point())?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialRate {
    pub fit: RateFit,
    /// Logged steps where `f(w_t)` exceeded the theoretical envelope.
    pub envelope_violations: usize,
    pub points: usize,
}

/// ALI-G (`δ = 0`) on a quadratic ensemble with curvature in `[α, β]`,
/// fitted against `c·exp(s·t)`. The envelope is
/// `(β/2)·exp(-(2α - ηβ²)t/(2β))·‖w₀ - w⋆‖²`.
pub fn exponential_rate(alpha: f64, beta: f64, eta: f64, steps: usize, seed: u64) -> Result<ExponentialRate> {
    let p = QuadraticEnsembleProblem::new(QuadraticConfig { alpha, beta, eps: 0.0, seed, ..Default::default() })?;
    let config = OptimizerConfig { max_lr_eta: eta, delta: 0.0, max_steps: steps, seed, ..Default::default() };
    let traj = run(&p, &config, OptimizerKind::Alig, FeasibleRegion::Unconstrained, &p.initial_point())?;
    let d0 = p.initial_point().dist_sq(p.meta().minimizer.as_ref().expect("declared"));
    let envelope = |t: f64| beta / 2.0 * (-(2.0 * alpha - eta * beta * beta) * t / (2.0 * beta)).exp() * d0;
    let objectives: Vec<(usize, f64)> = traj.objectives().collect();
    let envelope_violations = objectives.iter().filter(|&&(t, f)| f > envelope(t as f64)).count();
    let fit = fit_rate(&traj, RateModel::Exponential, p.meta().f_star_or_zero())?;
    Ok(ExponentialRate { fit, envelope_violations, points: objectives.len() })
}

/// ALI-G with constant `η` on a teacher-generated MLP problem.
pub fn mlp_interpolation(
    samples: usize,
    input_dim: usize,
    hidden: usize,
    config: &OptimizerConfig,
    problem_seed: u64,
) -> Result<Trajectory> {
    let p = TinyMlpProblem::new(samples, input_dim, hidden, problem_seed)?;
    Ok(run(&p, config, OptimizerKind::Alig, FeasibleRegion::Unconstrained, &p.initial_point())?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plateau {
    pub eps: f64,
    /// Mean over seeds and over the second half of the logged steps of
    /// `f(w_t) - f⋆`.
    pub level: f64,
}

/// Long-run excess objective of ALI-G on quadratic ensembles whose samples
/// are minimized at `w⋆` with values in `[0, ε]`.
pub fn eps_sensitivity(eps_values: &[f64], eta: f64, delta: f64, seeds: usize, steps: usize) -> Result<Vec<Plateau>> {
    eps_values
        .iter()
        .map(|&eps| {
            let p = QuadraticEnsembleProblem::new(QuadraticConfig { eps, seed: 5, ..Default::default() })?;
            let f_star = p.meta().f_star_or_zero();
            let levels: Result<Vec<f64>> = (0..seeds as u64)
                .into_par_iter()
                .map(|seed| {
                    let config = OptimizerConfig { max_lr_eta: eta, delta, max_steps: steps, seed, ..Default::default() };
                    let traj = run(&p, &config, OptimizerKind::Alig, FeasibleRegion::Unconstrained, &p.initial_point())?;
                    if traj.failed() {
                        return Err(HarnessError::Fit(format!("eps {eps} seed {seed}: {:?}", traj.termination)));
                    }
                    let tail: Vec<f64> = traj.objectives().filter(|&(t, _)| t > steps / 2).map(|(_, f)| f - f_star).collect();
                    Ok(tail.iter().sum::<f64>() / tail.len() as f64)
                })
                .collect();
            let levels = levels?;
            Ok(Plateau { eps, level: levels.iter().sum::<f64>() / levels.len() as f64 })
        })
        .collect()
}

/// ALI-G∞ with full batches and `δ = 0` against Polyak-GD with `f⋆ = 0`:
/// number of steps whose iterates differ bitwise.
pub fn unclipped_matches_polyak(problem: &dyn Problem, steps: usize) -> Result<usize> {
    let config = OptimizerConfig {
        max_lr_eta: f64::INFINITY,
        delta: 0.0,
        batch_size: problem.num_samples(),
        ..Default::default()
    };
    let w0 = problem.initial_point();
    let mut a = OptimizerState::new(problem, &w0, FeasibleRegion::Unconstrained, 0)?;
    let mut b = a.clone();
    let mut mismatches = 0;
    for _ in 0..steps {
        let ra = alig_step(&mut a, problem, &config)?;
        let rb = polyak_gd_step(&mut b, problem, 0.0)?;
        if a.w() != b.w() || ra.step_size.to_bits() != rb.step_size.to_bits() {
            mismatches += 1;
        }
    }
    Ok(mismatches)
}

/// Plain ALI-G against the momentum update with `μ = 0`: number of steps
/// whose iterates differ bitwise.
pub fn zero_momentum_matches_plain(problem: &dyn Problem, eta: f64, steps: usize, seed: u64) -> Result<usize> {
    let config = OptimizerConfig {
        max_lr_eta: eta,
        momentum_mu: 0.0,
        momentum_variant: MomentumVariant::StandardNesterov,
        ..Default::default()
    };
    let w0 = problem.initial_point();
    let mut a = OptimizerState::new(problem, &w0, FeasibleRegion::Unconstrained, seed)?;
    let mut b = a.clone();
    let mut mismatches = 0;
    for _ in 0..steps {
        alig_step(&mut a, problem, &config)?;
        alig_momentum_step(&mut b, problem, &config)?;
        if a.w() != b.w() {
            mismatches += 1;
        }
    }
    Ok(mismatches)
}

/// Runs the same configuration twice and reports whether the CSVs match.
pub fn replay_is_identical(problem: &dyn Problem, config: &OptimizerConfig, kind: OptimizerKind) -> Result<bool> {
    let w0 = problem.initial_point();
    let a = run(problem, config, kind, FeasibleRegion::Unconstrained, &w0)?;
    let b = run(problem, config, kind, FeasibleRegion::Unconstrained, &w0)?;
    let same_indices = a.records.iter().zip(&b.records).all(|(x, y)| x.sample_indices == y.sample_indices);
    Ok(a.to_csv() == b.to_csv() && same_indices && a.len() == b.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_oscillation() {
        let o = polyak_oscillation(10).unwrap();
        assert!(o.max_radius_error < 1e-12);
        assert!(o.never_improves);
    }

    #[test]
    fn rsi_alig_stops_at_threshold() {
        let t = rsi_alig(0.1, 0.0, 100_000, Some(1e-8)).unwrap();
        assert!(matches!(t.termination, alig::Termination::ThresholdReached { .. }));
        assert!(t.final_objective().unwrap() < 1e-8);
    }
}
