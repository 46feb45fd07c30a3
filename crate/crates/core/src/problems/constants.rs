use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gaussian_vec;
use crate::problem::Problem;
use crate::projection::FeasibleRegion;
use crate::types::{dist_sq, dot, norm_sq};

/// Relative slack granted to every inequality for floating-point rounding.
const ROUNDING_SLACK: f64 = 1e-9;

/// Outcome for one declared constant. `worst` is the extreme observed ratio:
/// a maximum for upper bounds (Lipschitz, smoothness, interpolation), a
/// minimum for lower bounds (strong convexity, RSI).
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantCheck {
    pub name: &'static str,
    pub declared: f64,
    pub worst: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConstantsReport {
    pub checks: Vec<ConstantCheck>,
}

impl ConstantsReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&ConstantCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Sampler {
    rng: ChaCha8Rng,
    center: Vec<f64>,
    scale: f64,
    domain: FeasibleRegion,
}

impl Sampler {
    fn point(&mut self) -> Vec<f64> {
        let d = self.center.len();
        match self.domain {
            FeasibleRegion::L2Ball { radius } if d == 1 => vec![self.rng.random_range(-radius..=radius)],
            domain => {
                let mut w: Vec<f64> = gaussian_vec(&mut self.rng, d)
                    .into_iter()
                    .zip(&self.center)
                    .map(|(g, c)| c + self.scale * g)
                    .collect();
                domain.project_in_place(&mut w);
                w
            }
        }
    }
}

/// Samples random points and pairs and checks every constant declared in the
/// problem's metadata. Failures are reported, never raised.
pub fn check_constants(problem: &dyn Problem, trials: usize, seed: u64) -> ConstantsReport {
    let meta = problem.meta();
    let d = problem.dim();
    let n = problem.num_samples();
    let center = meta.minimizer.as_ref().map(|m| m.as_slice().to_vec()).unwrap_or_else(|| vec![0.0; d]);
    let scale = 1.0f64.max(norm_sq(&center).sqrt());
    let mut sampler = Sampler { rng: ChaCha8Rng::seed_from_u64(seed), center, scale, domain: problem.domain() };

    let mut ga = vec![0.0; d];
    let mut gb = vec![0.0; d];
    let mut report = ConstantsReport::default();

    if let Some(c) = meta.lipschitz_c {
        let mut worst: f64 = 0.0;
        for _ in 0..trials {
            let w = sampler.point();
            for z in 0..n {
                problem.eval_into(&w, z, &mut ga);
                worst = worst.max(norm_sq(&ga).sqrt());
            }
        }
        report.checks.push(ConstantCheck {
            name: "lipschitz",
            declared: c,
            worst,
            passed: worst <= c * (1.0 + ROUNDING_SLACK),
        });
    }

    if meta.smoothness_beta.is_some() || meta.strong_convexity_alpha.is_some() {
        let mut worst_smooth: f64 = 0.0;
        let mut worst_convex = f64::INFINITY;
        for _ in 0..trials {
            let u = sampler.point();
            let v = sampler.point();
            let gap_sq = dist_sq(&u, &v);
            if gap_sq == 0.0 {
                continue;
            }
            for z in 0..n {
                problem.eval_into(&u, z, &mut ga);
                problem.eval_into(&v, z, &mut gb);
                let diff: Vec<f64> = ga.iter().zip(&gb).map(|(a, b)| a - b).collect();
                worst_smooth = worst_smooth.max((norm_sq(&diff) / gap_sq).sqrt());
                let uv: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - b).collect();
                worst_convex = worst_convex.min(dot(&diff, &uv) / gap_sq);
            }
        }
        if let Some(beta) = meta.smoothness_beta {
            report.checks.push(ConstantCheck {
                name: "smoothness",
                declared: beta,
                worst: worst_smooth,
                passed: worst_smooth <= beta * (1.0 + ROUNDING_SLACK),
            });
        }
        if let Some(alpha) = meta.strong_convexity_alpha {
            report.checks.push(ConstantCheck {
                name: "strong_convexity",
                declared: alpha,
                worst: worst_convex,
                passed: worst_convex >= alpha * (1.0 - ROUNDING_SLACK),
            });
        }
    }

    if let (Some(alpha), Some(w_star)) = (meta.rsi_alpha, meta.minimizer.as_ref()) {
        let mut points: Vec<Vec<f64>> = (0..trials).map(|_| sampler.point()).collect();
        if let FeasibleRegion::L2Ball { radius } = problem.domain() {
            if d == 1 {
                let grid = 10_000;
                points.extend((0..=grid).map(|i| vec![-radius + 2.0 * radius * i as f64 / grid as f64]));
            }
        }
        let mut worst = f64::INFINITY;
        for w in &points {
            let gap_sq = dist_sq(w, w_star);
            if gap_sq == 0.0 {
                continue;
            }
            let disp: Vec<f64> = w.iter().zip(w_star.iter()).map(|(a, b)| a - b).collect();
            for z in 0..n {
                problem.eval_into(w, z, &mut ga);
                worst = worst.min(dot(&ga, &disp) / gap_sq);
            }
        }
        report.checks.push(ConstantCheck {
            name: "rsi",
            declared: alpha,
            worst,
            passed: worst >= alpha * (1.0 - ROUNDING_SLACK),
        });
    }

    if let (Some(eps), Some(w_star)) = (meta.interp_tolerance_eps, meta.minimizer.as_ref()) {
        let worst = (0..n).map(|z| problem.eval_into(w_star, z, &mut ga)).fold(0.0, f64::max);
        report.checks.push(ConstantCheck {
            name: "interpolation",
            declared: eps,
            worst,
            passed: worst <= eps,
        });
    }

    report
}
