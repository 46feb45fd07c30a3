//! Independent solver for the proximal problem
//! `argmin_w ½‖w - w_t‖² + η·max{ℓ + gᵀ(w - w_t), 0}`, used to validate the
//! closed-form ALI-G update.

use alig::{prox_truncated_solve, ParamVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;

pub const TERNARY_ITERATIONS: usize = 200;

/// Maximizes the dual `-(η/2)ν²‖g‖² + νℓ` over `ν ∈ [0, 1]` by ternary
/// search and maps the maximizer back to `w = w_t - ηνg`.
pub fn prox_dual_solve(w_t: &[f64], loss: f64, g: &[f64], eta: f64) -> Vec<f64> {
    let g_sq: f64 = g.iter().map(|x| x * x).sum();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..TERNARY_ITERATIONS {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        // sign of dual(m2) - dual(m1), factored to avoid cancellation
        if loss - 0.5 * eta * g_sq * (m1 + m2) > 0.0 {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let nu = 0.5 * (lo + hi);
    w_t.iter().zip(g).map(|(w, gi)| w - eta * nu * gi).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProxCheck {
    pub instances: usize,
    pub max_dim: usize,
    /// Largest coordinate difference between closed form and dual solution.
    pub worst: f64,
}

/// Compares [`prox_truncated_solve`] with [`prox_dual_solve`] on random
/// instances of dimension `1..=max_dim`.
pub fn prox_identity_check(instances: usize, max_dim: usize, seed: u64) -> Result<ProxCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut largest = 0;
    for _ in 0..instances {
        let dim = rng.random_range(1..=max_dim);
        largest = largest.max(dim);
        let w_t: Vec<f64> = (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mut g: Vec<f64> = (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect();
        if g.iter().all(|&x| x == 0.0) {
            g[0] = 1.0;
        }
        let loss = rng.random_range(0.0..5.0);
        let eta = 10f64.powf(rng.random_range(-2.0..1.0));
        let closed = prox_truncated_solve(&ParamVector::new(w_t.clone())?, loss, &ParamVector::new(g.clone())?, eta)?;
        let dual = prox_dual_solve(&w_t, loss, &g, eta);
        for (a, b) in closed.iter().zip(&dual) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(ProxCheck { instances, max_dim: largest, worst })
}
