//! Runs ALI-G on problems that satisfy a convergence theorem's hypotheses
//! and compares the measured error with the theorem's right-hand side,
//! computed from the problem's declared constants.

use alig::problems::{HingeEnsembleProblem, LeastSquaresProblem, QuadraticConfig, QuadraticEnsembleProblem};
use alig::{run, FeasibleRegion, OptimizerConfig, OptimizerKind, Problem, Trajectory};
use rayon::prelude::*;

use crate::error::{HarnessError, Result};

pub const DEFAULT_SEEDS: usize = 20;
pub const DEFAULT_STEPS: usize = 10_000;
/// Multiplier on the bound absorbing finite-sample noise in seed means.
pub const SLACK: f64 = 1.1;
/// Per-run checks stop once `f - f⋆` falls below this; smaller values lose
/// relative precision to subnormal arithmetic.
pub const UNDERFLOW_FLOOR: f64 = 1e-290;

/// Which error a theorem bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    /// `f(w̄_T) - f⋆` with `w̄_T` the mean of `w_0..w_T`.
    Averaged,
    /// `f(w_{T+1}) - f⋆`.
    LastIterate,
}

/// One theorem with a problem satisfying its hypotheses.
pub struct EnvelopeCase {
    pub name: &'static str,
    pub problem: Box<dyn Problem>,
    pub kind: OptimizerKind,
    pub eta: f64,
    pub delta: f64,
    pub measure: Measure,
    /// Check every run against the bound instead of the seed mean.
    pub per_run: bool,
    /// Hypotheses on the declared constants, with their truth value.
    pub hypotheses: Vec<(&'static str, bool)>,
    bound: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl EnvelopeCase {
    /// Right-hand side at horizon `T`.
    pub fn bound(&self, t: f64) -> f64 {
        (self.bound)(t)
    }

    pub fn hypotheses_hold(&self) -> bool {
        self.hypotheses.iter().all(|&(_, ok)| ok)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeReport {
    pub name: &'static str,
    pub seeds: usize,
    pub steps: usize,
    /// Number of (step, run-or-mean) comparisons made.
    pub compared: usize,
    /// Largest `error / bound` seen.
    pub worst_ratio: f64,
    pub worst_step: usize,
    pub hypotheses_ok: bool,
    pub failure: Option<String>,
}

impl EnvelopeReport {
    pub fn passed(&self) -> bool {
        self.hypotheses_ok && self.failure.is_none() && self.compared > 0 && self.worst_ratio <= SLACK
    }
}

struct Constants {
    dist0_sq: f64,
    c: f64,
    alpha: f64,
    beta: f64,
    eps: f64,
}

fn constants(problem: &dyn Problem) -> Result<Constants> {
    let meta = problem.meta();
    let w_star = meta
        .minimizer
        .as_ref()
        .ok_or_else(|| HarnessError::Fit(format!("{} has no declared minimizer", problem.name())))?;
    Ok(Constants {
        dist0_sq: problem.initial_point().dist_sq(w_star),
        c: meta.lipschitz_c.unwrap_or(f64::NAN),
        alpha: meta.strong_convexity_alpha.or(meta.rsi_alpha).unwrap_or(f64::NAN),
        beta: meta.smoothness_beta.unwrap_or(f64::NAN),
        eps: meta.interp_tolerance_eps.unwrap_or(f64::NAN),
    })
}

/// The nine theorem configurations.
pub fn theorem_cases() -> Result<Vec<EnvelopeCase>> {
    let mut cases = Vec::new();

    let hinge = HingeEnsembleProblem::new(40, 10, 1)?;
    let k = constants(&hinge)?;
    let delta = 1e-5;
    let (d0, c2, eps) = (k.dist0_sq, k.c * k.c, k.eps);
    cases.push(EnvelopeCase {
        name: "convex_lipschitz_unclipped",
        problem: Box::new(hinge.clone()),
        kind: OptimizerKind::AligInf,
        eta: f64::INFINITY,
        delta,
        measure: Measure::Averaged,
        per_run: false,
        hypotheses: vec![("lipschitz constant declared", c2.is_finite())],
        bound: Box::new(move |t| d0.sqrt() * (c2 + delta).sqrt() / (t + 1.0).sqrt() + eps * (c2 / delta + 1.0).sqrt()),
    });
    let eta = 1.0;
    cases.push(EnvelopeCase {
        name: "convex_lipschitz_large_eta",
        problem: Box::new(hinge.clone()),
        kind: OptimizerKind::Alig,
        eta,
        delta,
        measure: Measure::Averaged,
        per_run: false,
        hypotheses: vec![("eta > eps/delta", eta > eps / delta)],
        bound: Box::new(move |t| {
            let e = eta - eps / delta;
            d0 / (e * (t + 1.0))
                + eps * eps / (delta * e)
                + ((c2 + delta) * d0 / (t + 1.0)).sqrt()
                + eps * (c2 / delta + 1.0).sqrt()
        }),
    });
    let eta = 0.01;
    cases.push(EnvelopeCase {
        name: "convex_lipschitz_small_eta",
        problem: Box::new(hinge),
        kind: OptimizerKind::Alig,
        eta,
        delta,
        measure: Measure::Averaged,
        per_run: false,
        hypotheses: vec![("lipschitz constant declared", c2.is_finite())],
        bound: Box::new(move |t| {
            d0 / (eta * (t + 1.0)) + 2.0 * eps + ((c2 + delta) * d0 / (t + 1.0)).sqrt() + 2.0 * eta * eps * (c2 + delta).sqrt()
        }),
    });

    let lsq = LeastSquaresProblem::new(20, 10, 0.0, 2)?;
    let k = constants(&lsq)?;
    let (d0, beta, eps) = (k.dist0_sq, k.beta, k.eps);
    let eta = 1.0;
    cases.push(EnvelopeCase {
        name: "smooth_convex_large_eta",
        problem: Box::new(lsq),
        kind: OptimizerKind::Alig,
        eta,
        delta,
        measure: Measure::Averaged,
        per_run: false,
        hypotheses: vec![("eta >= 1/(2 beta)", eta >= 1.0 / (2.0 * beta)), ("delta > 2 beta eps", delta > 2.0 * beta * eps)],
        bound: Box::new(move |t| {
            let r = 1.0 - 2.0 * beta * eps / delta;
            delta / (beta * r) + 2.0 * beta / r * d0 / (t + 1.0)
        }),
    });

    let lsq_tol = LeastSquaresProblem::new(20, 10, 1e-3, 2)?;
    let k = constants(&lsq_tol)?;
    let (d0, beta, eps) = (k.dist0_sq, k.beta, k.eps);
    let eta = 1.0 / (4.0 * beta);
    cases.push(EnvelopeCase {
        name: "smooth_convex_small_eta",
        problem: Box::new(lsq_tol),
        kind: OptimizerKind::Alig,
        eta,
        delta,
        measure: Measure::Averaged,
        per_run: false,
        hypotheses: vec![("eta <= 1/(2 beta)", eta <= 1.0 / (2.0 * beta))],
        bound: Box::new(move |t| d0 / (eta * (t + 1.0)) + delta / (2.0 * beta) + eps),
    });

    let quad = QuadraticEnsembleProblem::new(QuadraticConfig { alpha: 1.0, beta: 4.0, eps: 1e-4, seed: 3, ..Default::default() })?;
    let k = constants(&quad)?;
    let (d0, alpha, beta, eps) = (k.dist0_sq, k.alpha, k.beta, k.eps);
    let delta_sc = 1e-3;
    let eta = 1.0;
    cases.push(EnvelopeCase {
        name: "strongly_convex_large_eta",
        problem: Box::new(quad.clone()),
        kind: OptimizerKind::Alig,
        eta,
        delta: delta_sc,
        measure: Measure::LastIterate,
        per_run: false,
        hypotheses: vec![("eta >= 1/(2 beta)", eta >= 1.0 / (2.0 * beta)), ("delta > 2 beta eps", delta_sc > 2.0 * beta * eps)],
        bound: Box::new(move |t| {
            beta * (-alpha * t / (4.0 * beta)).exp() * d0
                + delta_sc / alpha
                + 2.0 * beta / alpha * eps
                + 2.0 * beta * beta / (alpha * alpha) * eps
        }),
    });
    let eta = 0.05;
    cases.push(EnvelopeCase {
        name: "strongly_convex_small_eta",
        problem: Box::new(quad),
        kind: OptimizerKind::Alig,
        eta,
        delta: delta_sc,
        measure: Measure::LastIterate,
        per_run: false,
        hypotheses: vec![("eta <= 1/(2 beta)", eta <= 1.0 / (2.0 * beta)), ("delta > 2 beta eps", delta_sc > 2.0 * beta * eps)],
        bound: Box::new(move |t| beta * (-alpha * eta * t / 2.0).exp() * d0 + delta_sc / alpha + 4.0 * eps * beta / alpha),
    });

    // centered so that f itself, not f - f⋆, is measured: no cancellation floor
    let rsi_quad = QuadraticEnsembleProblem::new(QuadraticConfig {
        alpha: 1.0,
        beta: 2.0,
        eps: 0.0,
        seed: 4,
        centered: true,
        ..Default::default()
    })?;
    let k = constants(&rsi_quad)?;
    let (d0, alpha, beta) = (k.dist0_sq, k.alpha, k.beta);
    let eta = 0.4;
    cases.push(EnvelopeCase {
        name: "rsi_large_eta",
        problem: Box::new(rsi_quad.clone()),
        kind: OptimizerKind::Alig,
        eta,
        delta: 0.0,
        measure: Measure::LastIterate,
        per_run: true,
        hypotheses: vec![
            ("1/(2 beta) <= eta <= 2 alpha/beta^2", 1.0 / (2.0 * beta) <= eta && eta <= 2.0 * alpha / (beta * beta)),
            ("exact interpolation", k.eps == 0.0),
        ],
        bound: Box::new(move |t| beta / 2.0 * (-(2.0 * alpha - eta * beta * beta) * t / (2.0 * beta)).exp() * d0),
    });
    let eta = 0.1;
    cases.push(EnvelopeCase {
        name: "rsi_small_eta",
        problem: Box::new(rsi_quad),
        kind: OptimizerKind::Alig,
        eta,
        delta: 0.0,
        measure: Measure::LastIterate,
        per_run: true,
        hypotheses: vec![("eta <= 1/(2 beta)", eta <= 1.0 / (2.0 * beta)), ("exact interpolation", k.eps == 0.0)],
        bound: Box::new(move |t| beta / 2.0 * (-eta * (2.0 * alpha - beta / 2.0) * t).exp() * d0),
    });
    Ok(cases)
}

fn config_for(case: &EnvelopeCase, seed: u64, steps: usize) -> OptimizerConfig {
    OptimizerConfig {
        max_lr_eta: case.eta,
        delta: case.delta,
        batch_size: 1,
        seed,
        max_steps: steps,
        stop_threshold: case.per_run.then(|| case.problem.meta().f_star_or_zero() + UNDERFLOW_FLOOR),
        track_average: case.measure == Measure::Averaged,
        ..Default::default()
    }
}

/// `(T, f - f⋆)` pairs for the measured quantity of `case`.
pub fn measured_errors(case: &EnvelopeCase, traj: &Trajectory) -> Vec<(usize, f64)> {
    let f_star = case.problem.meta().f_star_or_zero();
    traj.records
        .iter()
        .filter_map(|r| match case.measure {
            Measure::Averaged => r.averaged_objective.map(|f| (r.step, f - f_star)),
            Measure::LastIterate if r.step >= 1 => r.full_objective.map(|f| (r.step - 1, f - f_star)),
            Measure::LastIterate => None,
        })
        .collect()
}

pub fn run_case(case: &EnvelopeCase, seed: u64, steps: usize) -> Result<Trajectory> {
    let problem = case.problem.as_ref();
    let traj = run(problem, &config_for(case, seed, steps), case.kind, FeasibleRegion::Unconstrained, &problem.initial_point())?;
    if let alig::Termination::Failed { step, error } = &traj.termination {
        return Err(HarnessError::Fit(format!("{}: seed {seed} failed at step {step}: {error}", case.name)));
    }
    Ok(traj)
}

/// Runs `seeds` seeded runs of `case` for `steps` steps and compares each
/// logged error (or the seed mean) with the bound.
pub fn check_case(case: &EnvelopeCase, seeds: usize, steps: usize) -> EnvelopeReport {
    let mut report = EnvelopeReport {
        name: case.name,
        seeds,
        steps,
        compared: 0,
        worst_ratio: 0.0,
        worst_step: 0,
        hypotheses_ok: case.hypotheses_hold(),
        failure: None,
    };
    let runs: Result<Vec<Vec<(usize, f64)>>> = (0..seeds as u64)
        .into_par_iter()
        .map(|seed| run_case(case, seed, steps).map(|t| measured_errors(case, &t)))
        .collect();
    let runs = match runs {
        Ok(r) => r,
        Err(e) => {
            report.failure = Some(e.to_string());
            return report;
        }
    };
    let mut compare = |t: usize, err: f64| {
        let ratio = err / case.bound(t as f64);
        report.compared += 1;
        // NaN ratios count as the worst
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(ratio <= report.worst_ratio) {
            report.worst_ratio = ratio;
            report.worst_step = t;
        }
    };
    if case.per_run {
        for run in &runs {
            for &(t, e) in run {
                compare(t, e);
            }
        }
    } else {
        let len = runs[0].len();
        if runs.iter().any(|r| r.len() != len) {
            report.failure = Some("runs logged different steps".into());
            return report;
        }
        for i in 0..len {
            let t = runs[0][i].0;
            let mean = runs.iter().map(|r| r[i].1).sum::<f64>() / runs.len() as f64;
            compare(t, mean);
        }
    }
    report
}

pub fn check_all(seeds: usize, steps: usize) -> Result<Vec<EnvelopeReport>> {
    Ok(theorem_cases()?.iter().map(|c| check_case(c, seeds, steps)).collect())
}
