//! The property suite behind `alig-bench verify`.

use std::fmt;

use alig::problems::{check_constants, check_gradient, RsiScalarProblem};
use alig::{
    hyperplane_intersection_check, make_problem, polyak_step_size, project, FeasibleRegion, OptimizerConfig,
    OptimizerKind, ParamVector, Problem, ProblemKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::envelopes;
use crate::error::Result;
use crate::experiments;
use crate::lemmas;
use crate::oracle::prox_identity_check;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        CheckResult { name: name.into(), passed, detail: detail.into() }
    }

    fn from_result(name: &str, r: Result<CheckResult>) -> Self {
        r.unwrap_or_else(|e| CheckResult::new(name, false, format!("error: {e}")))
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "CHECK {} {status} {}", self.name, self.detail)
    }
}

pub fn report(checks: &[CheckResult]) -> String {
    checks.iter().map(|c| format!("{c}\n")).collect()
}

pub fn all_passed(checks: &[CheckResult]) -> bool {
    checks.iter().all(|c| c.passed)
}

fn builtin(kind: ProblemKind, seed: u64) -> Result<alig::BuiltinProblem> {
    Ok(make_problem(kind, kind.default_dims(), 0.0, seed)?)
}

fn oscillation() -> Result<CheckResult> {
    let o = experiments::polyak_oscillation(100)?;
    let passed = o.max_radius_error <= 1e-12 && o.max_objective_error <= 1e-12 && o.never_improves;
    Ok(CheckResult::new(
        "polyak_oscillation",
        passed,
        format!("steps=100 max_radius_error={:e} max_objective_error={:e}", o.max_radius_error, o.max_objective_error),
    ))
}

fn rsi_dichotomy() -> Result<CheckResult> {
    let beta = RsiScalarProblem::new().meta().smoothness_beta.expect("declared");
    let mut detail = Vec::new();
    let mut passed = true;
    for (eta, should_converge) in [(1.0 / (2.0 * beta), true), (0.1, true), (1.0, true), (100.0, false)] {
        let traj = experiments::rsi_alig(eta, 0.0, 100_000, Some(1e-8))?;
        let reached = traj.first_below(1e-8);
        passed &= reached.is_some() == should_converge;
        detail.push(format!("eta={eta}:{}", reached.map_or("none".to_string(), |s| s.to_string())));
    }
    Ok(CheckResult::new("rsi_eta_dichotomy", passed, detail.join(" ")))
}

fn prox_identity() -> Result<CheckResult> {
    let c = prox_identity_check(100, 50, 0)?;
    Ok(CheckResult::new(
        "prox_identity",
        c.worst <= 1e-8,
        format!("instances={} max_dim={} worst={:e}", c.instances, c.max_dim, c.worst),
    ))
}

fn hyperplane() -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut failures = 0;
    for _ in 0..100 {
        let dim = rng.random_range(1..=10);
        let w: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let g: Vec<f64> = (0..dim).map(|_| rng.random_range(0.1..2.0)).collect();
        let f_star = rng.random_range(0.0..1.0);
        let f_val = f_star + rng.random_range(0.0..3.0);
        let g_sq: f64 = g.iter().map(|x| x * x).sum();
        let gamma = polyak_step_size(f_val, f_star, g_sq)?;
        let next: Vec<f64> = w.iter().zip(&g).map(|(w, g)| w - gamma * g).collect();
        if !hyperplane_intersection_check(&ParamVector::new(w)?, &ParamVector::new(next)?, f_val, &ParamVector::new(g)?, f_star) {
            failures += 1;
        }
    }
    Ok(CheckResult::new("polyak_hyperplane", failures == 0, format!("instances=100 failures={failures}")))
}

fn gradients() -> Vec<CheckResult> {
    ProblemKind::ALL
        .into_iter()
        .filter(|k| k.is_smooth())
        .map(|kind| {
            let name = format!("gradient_{}", kind.as_str());
            CheckResult::from_result(
                &name,
                (|| {
                    let p = builtin(kind, 1)?;
                    let mut rng = ChaCha8Rng::seed_from_u64(2);
                    let mut worst = 0.0f64;
                    for _ in 0..10 {
                        worst = worst.max(check_gradient(&p, &p.random_point(&mut rng), 1e-5)?);
                    }
                    Ok(CheckResult::new(&name, worst < 1e-6, format!("points=10 h=1e-5 worst={worst:e}")))
                })(),
            )
        })
        .collect()
}

fn constants() -> Vec<CheckResult> {
    let dims = |k: ProblemKind| k.default_dims();
    let cases: Vec<(ProblemKind, f64)> = vec![
        (ProblemKind::RsiScalar, 0.0),
        (ProblemKind::LeastSquares, 0.0),
        (ProblemKind::LeastSquares, 1e-3),
        (ProblemKind::QuadraticEnsemble, 1e-3),
        (ProblemKind::HingeEnsemble, 0.0),
        (ProblemKind::TinyMlp, 0.0),
    ];
    cases
        .into_iter()
        .map(|(kind, eps)| {
            let name = format!("constants_{}_eps{eps:e}", kind.as_str());
            CheckResult::from_result(
                &name,
                (|| {
                    let p = make_problem(kind, dims(kind), eps, 3)?;
                    let r = check_constants(&p, 500, 4);
                    let detail = r
                        .checks
                        .iter()
                        .map(|c| format!("{}={}", c.name, if c.passed { "ok" } else { "violated" }))
                        .collect::<Vec<_>>()
                        .join(" ");
                    Ok(CheckResult::new(&name, r.all_passed(), detail))
                })(),
            )
        })
        .collect()
}

fn lemma_checks() -> Result<Vec<CheckResult>> {
    Ok(lemmas::all(1000, 0)?
        .into_iter()
        .map(|l| {
            CheckResult::new(
                format!("lemma_{}", l.name),
                l.passed() && l.points >= 1000,
                format!("points={} violations={}", l.points, l.violations),
            )
        })
        .collect())
}

fn equivalences() -> Result<Vec<CheckResult>> {
    let lsq = builtin(ProblemKind::LeastSquares, 0)?;
    let rsi = builtin(ProblemKind::RsiScalar, 0)?;
    let mut out = Vec::new();
    let m = experiments::unclipped_matches_polyak(&lsq, 100)? + experiments::unclipped_matches_polyak(&rsi, 100)?;
    out.push(CheckResult::new("equiv_unclipped_full_batch_polyak", m == 0, format!("steps=100 mismatches={m}")));
    let m = experiments::zero_momentum_matches_plain(&lsq, 0.1, 100, 3)?;
    out.push(CheckResult::new("equiv_zero_momentum", m == 0, format!("steps=100 mismatches={m}")));
    let config = OptimizerConfig { max_lr_eta: 0.1, momentum_mu: 0.5, max_steps: 200, seed: 11, ..Default::default() };
    let same = experiments::replay_is_identical(&lsq, &config, OptimizerKind::Alig)?;
    out.push(CheckResult::new("equiv_seed_replay", same, "steps=200"));
    Ok(out)
}

fn projection() -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut failures = 0;
    for _ in 0..1000 {
        let dim = rng.random_range(1..=20);
        let radius = rng.random_range(0.1..5.0);
        let region = FeasibleRegion::l2_ball(radius)?;
        let w: Vec<f64> = (0..dim).map(|_| 3.0 * rng.sample::<f64, _>(StandardNormal)).collect();
        let w = ParamVector::new(w)?;
        let p = project(&region, &w);
        let feasible = p.norm() <= radius * (1.0 + 1e-15);
        let idempotent = project(&region, &p).dist_sq(&p) <= (1e-15 * radius).powi(2);
        if !(feasible && idempotent) {
            failures += 1;
        }
    }
    Ok(CheckResult::new("projection_feasible_idempotent", failures == 0, format!("points=1000 failures={failures}")))
}

fn envelope_checks() -> Result<Vec<CheckResult>> {
    Ok(envelopes::check_all(envelopes::DEFAULT_SEEDS, envelopes::DEFAULT_STEPS)?
        .into_iter()
        .map(|r| {
            let mut detail = format!(
                "seeds={} steps={} compared={} worst_ratio={:.4} at_T={} slack={}",
                r.seeds,
                r.steps,
                r.compared,
                r.worst_ratio,
                r.worst_step,
                envelopes::SLACK
            );
            if let Some(f) = &r.failure {
                detail.push_str(&format!(" error={f}"));
            }
            CheckResult::new(format!("envelope_{}", r.name), r.passed(), detail)
        })
        .collect())
}

fn exponential_rate() -> Result<CheckResult> {
    let r = experiments::exponential_rate(1.0, 2.0, 0.5, 2000, 0)?;
    let passed = r.fit.slope <= -0.01 && r.fit.conforming() && r.envelope_violations == 0;
    Ok(CheckResult::new(
        "rate_exponential",
        passed,
        format!(
            "slope={:.4} residual={:.4} window={}..{} envelope_violations={}",
            r.fit.slope, r.fit.fit_residual, r.fit.window.0, r.fit.window.1, r.envelope_violations
        ),
    ))
}

fn mlp() -> Result<CheckResult> {
    let config = OptimizerConfig {
        max_lr_eta: 0.1,
        delta: 1e-5,
        batch_size: 8,
        max_steps: 20_000,
        stop_threshold: Some(1e-3f64.next_down()),
        ..Default::default()
    };
    let traj = experiments::mlp_interpolation(32, 4, 16, &config, 0)?;
    let reached = traj.first_below(1e-3);
    Ok(CheckResult::new(
        "mlp_interpolation",
        reached.is_some(),
        format!("steps_to_1e-3={}", reached.map_or("none".into(), |s| s.to_string())),
    ))
}

fn eps_sensitivity() -> Result<CheckResult> {
    let plateaus = experiments::eps_sensitivity(&[1e-2, 1e-3, 1e-4], 1.0, 1e-5, 20, 2000)?;
    let finite = plateaus.iter().all(|p| p.level.is_finite());
    let monotone = plateaus.windows(2).all(|w| w[1].level < w[0].level);
    let detail = plateaus.iter().map(|p| format!("eps={:e}:{:.3e}", p.eps, p.level)).collect::<Vec<_>>().join(" ");
    Ok(CheckResult::new("eps_sensitivity", finite && monotone, detail))
}

/// Runs every check with fixed seeds.
pub fn verify_suite() -> Vec<CheckResult> {
    let mut out = vec![
        CheckResult::from_result("polyak_oscillation", oscillation()),
        CheckResult::from_result("rsi_eta_dichotomy", rsi_dichotomy()),
        CheckResult::from_result("prox_identity", prox_identity()),
        CheckResult::from_result("polyak_hyperplane", hyperplane()),
        CheckResult::from_result("projection_feasible_idempotent", projection()),
    ];
    out.extend(gradients());
    out.extend(constants());
    for (name, group) in [
        ("lemmas", lemma_checks()),
        ("equivalences", equivalences()),
        ("envelopes", envelope_checks()),
    ] {
        match group {
            Ok(checks) => out.extend(checks),
            Err(e) => out.push(CheckResult::new(name, false, format!("error: {e}"))),
        }
    }
    out.push(CheckResult::from_result("rate_exponential", exponential_rate()));
    out.push(CheckResult::from_result("mlp_interpolation", mlp()));
    out.push(CheckResult::from_result("eps_sensitivity", eps_sensitivity()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_lines() {
        let checks = vec![CheckResult::new("a", true, "x=1"), CheckResult::new("b", false, "y=2")];
        assert_eq!(report(&checks), "CHECK a PASS x=1\nCHECK b FAIL y=2\n");
        assert!(!all_passed(&checks));
    }

    #[test]
    fn fast_checks_pass() {
        for c in [oscillation().unwrap(), prox_identity().unwrap(), hyperplane().unwrap(), projection().unwrap()] {
            assert!(c.passed, "{c}");
        }
    }
}
