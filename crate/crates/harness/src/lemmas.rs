//! Pointwise inequalities used by the convergence proofs, checked on
//! random points of the built-in problems.

use alig::problems::{QuadraticConfig, QuadraticEnsembleProblem, RsiScalarProblem, RSI_DOMAIN_BOUND};
use alig::{evaluate_sample, make_problem, Dims, ParamVector, Problem, ProblemKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;

/// Relative rounding allowance on each side of an inequality.
const ROUNDING: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaCheck {
    pub name: &'static str,
    pub points: usize,
    pub violations: usize,
}

impl LemmaCheck {
    pub fn passed(&self) -> bool {
        self.points > 0 && self.violations == 0
    }
}

fn random_point(rng: &mut ChaCha8Rng, center: &[f64], scale: f64) -> ParamVector {
    let w = center.iter().map(|c| c + scale * rng.sample::<f64, _>(StandardNormal)).collect();
    ParamVector::new(w).expect("finite sample")
}

/// `lhs ≥ rhs` up to rounding relative to the magnitudes involved.
fn holds(lhs: f64, rhs: f64, scale: f64) -> bool {
    lhs >= rhs - ROUNDING * scale.max(lhs.abs()).max(rhs.abs())
}

fn smooth_problems(seed: u64) -> Result<Vec<Box<dyn Problem>>> {
    Ok(vec![
        Box::new(make_problem(ProblemKind::LeastSquares, Dims::new(20, 10), 0.0, seed)?),
        Box::new(make_problem(ProblemKind::LeastSquares, Dims::new(20, 10), 1e-3, seed)?),
        Box::new(make_problem(ProblemKind::QuadraticEnsemble, Dims::new(20, 10), 1e-3, seed)?),
    ])
}

/// Visits `(problem, w, z)` triples with `w` drawn around the minimizer.
fn for_each_sample<F: FnMut(&dyn Problem, &ParamVector, usize)>(
    problems: &[Box<dyn Problem>],
    points: usize,
    seed: u64,
    mut f: F,
) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut count = 0;
    for p in problems {
        let center = p.meta().minimizer.clone().unwrap_or_else(|| ParamVector::zeros(p.dim()));
        for _ in 0..points {
            let w = random_point(&mut rng, &center, 2.0);
            let z = rng.random_range(0..p.num_samples());
            f(p.as_ref(), &w, z);
            count += 1;
        }
    }
    count
}

/// `ℓ ≥ ‖∇ℓ‖²/(2β)` for β-smooth non-negative losses.
pub fn smooth_lower_bound(points: usize, seed: u64) -> Result<LemmaCheck> {
    let problems = smooth_problems(seed)?;
    let mut violations = 0;
    let total = for_each_sample(&problems, points, seed, |p, w, z| {
        let beta = p.meta().smoothness_beta.expect("smooth problem");
        let e = evaluate_sample(p, w, z).expect("valid sample");
        if !holds(e.loss, e.gradient.norm_sq() / (2.0 * beta), 0.0) {
            violations += 1;
        }
    });
    Ok(LemmaCheck { name: "smooth_lower_bound", points: total, violations })
}

/// `ℓ/(‖∇ℓ‖² + δ) ≥ 1/(2β) - δ/(4β²ℓ)` wherever `ℓ > 0`.
pub fn step_lower_bound(points: usize, seed: u64, delta: f64) -> Result<LemmaCheck> {
    let problems = smooth_problems(seed)?;
    let mut violations = 0;
    let mut skipped = 0;
    let total = for_each_sample(&problems, points, seed, |p, w, z| {
        let beta = p.meta().smoothness_beta.expect("smooth problem");
        let e = evaluate_sample(p, w, z).expect("valid sample");
        if e.loss == 0.0 {
            skipped += 1;
            return;
        }
        let gamma = e.loss / (e.gradient.norm_sq() + delta);
        let rhs = 1.0 / (2.0 * beta) - delta / (4.0 * beta * beta * e.loss);
        if !holds(gamma, rhs, 1.0 / beta) {
            violations += 1;
        }
    });
    Ok(LemmaCheck { name: "step_lower_bound", points: total - skipped, violations })
}

/// `ℓ/(‖∇ℓ‖² + δ) ≤ 1/(2α)` for α-strongly convex losses with `inf ℓ ≤ ε`
/// and `δ = 2αε`.
pub fn strongly_convex_step_upper_bound(points: usize, seed: u64) -> Result<LemmaCheck> {
    let p = QuadraticEnsembleProblem::new(QuadraticConfig { eps: 1e-2, seed, ..Default::default() })?;
    let alpha = p.alpha();
    let delta = 2.0 * alpha * 1e-2;
    let problems: Vec<Box<dyn Problem>> = vec![Box::new(p)];
    let mut violations = 0;
    let total = for_each_sample(&problems, points, seed, |p, w, z| {
        let e = evaluate_sample(p, w, z).expect("valid sample");
        let gamma = e.loss / (e.gradient.norm_sq() + delta);
        if !holds(1.0 / (2.0 * alpha), gamma, 0.0) {
            violations += 1;
        }
    });
    Ok(LemmaCheck { name: "strongly_convex_step_upper_bound", points: total, violations })
}

/// `ℓ(w) - ℓ(w⋆) ≥ (α/2)‖w - w⋆‖²` for α-strongly convex losses.
pub fn strongly_convex_function_bound(points: usize, seed: u64) -> Result<LemmaCheck> {
    let p = QuadraticEnsembleProblem::new(QuadraticConfig { eps: 1e-2, seed, ..Default::default() })?;
    let alpha = p.alpha();
    let w_star = ParamVector::new(p.minimizer().to_vec())?;
    let problems: Vec<Box<dyn Problem>> = vec![Box::new(p)];
    let mut violations = 0;
    let total = for_each_sample(&problems, points, seed, |p, w, z| {
        let at_w = evaluate_sample(p, w, z).expect("valid sample").loss;
        let at_star = evaluate_sample(p, &w_star, z).expect("valid sample").loss;
        if !holds(at_w - at_star, 0.5 * alpha * w.dist_sq(&w_star), at_w) {
            violations += 1;
        }
    });
    Ok(LemmaCheck { name: "strongly_convex_function_bound", points: total, violations })
}

/// `f'(w)·w ≥ (1/5)w²` for `f(w) = w² - |w|³` on its domain.
pub fn rsi_inequality(points: usize, seed: u64) -> LemmaCheck {
    let p = RsiScalarProblem::new();
    let alpha = p.meta().rsi_alpha.expect("declared");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let violations = (0..points)
        .filter(|_| {
            let w: f64 = rng.random_range(-RSI_DOMAIN_BOUND..=RSI_DOMAIN_BOUND);
            !holds(RsiScalarProblem::derivative(w) * w, alpha * w * w, 0.0)
        })
        .count();
    LemmaCheck { name: "rsi_inequality", points, violations }
}

/// `‖a‖² + ‖b‖² ≥ ½‖a - b‖²`.
pub fn parallelogram(points: usize, seed: u64) -> LemmaCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let violations = (0..points)
        .filter(|_| {
            let dim = rng.random_range(1..=20);
            let a = random_point(&mut rng, &vec![0.0; dim], 1.0);
            let b = random_point(&mut rng, &vec![0.0; dim], 1.0);
            !holds(a.norm_sq() + b.norm_sq(), 0.5 * a.dist_sq(&b), 0.0)
        })
        .count();
    LemmaCheck { name: "parallelogram", points, violations }
}

pub fn all(points: usize, seed: u64) -> Result<Vec<LemmaCheck>> {
    Ok(vec![
        smooth_lower_bound(points, seed)?,
        step_lower_bound(points, seed, alig::DEFAULT_DELTA)?,
        strongly_convex_step_upper_bound(points, seed)?,
        strongly_convex_function_bound(points, seed)?,
        rsi_inequality(points, seed),
        parallelogram(points, seed),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_lemmas_hold() {
        for check in all(1000, 7).unwrap() {
            assert!(check.points >= 1000, "{check:?}");
            assert!(check.passed(), "{check:?}");
        }
    }

    #[test]
    fn violated_inequality_is_counted() {
        // an RSI constant above the true one must fail somewhere
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let bad = (0..1000)
            .filter(|_| {
                let w: f64 = rng.random_range(-0.6..0.6);
                !holds(RsiScalarProblem::derivative(w) * w, 0.5 * w * w, 0.0)
            })
            .count();
        assert!(bad > 0);
    }
}
