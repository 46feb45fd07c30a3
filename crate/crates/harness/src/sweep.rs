//! Runs one configuration over a grid of maximal learning-rates.

use std::fmt::Write as _;

use alig::{run, FeasibleRegion, OptimizerConfig, OptimizerKind, ParamVector, Problem};
use rayon::prelude::*;

use crate::error::Result;

pub const SWEEP_HEADER: &str = "eta,final_objective,converged,steps_to_threshold";
pub const DEFAULT_THRESHOLD: f64 = 1e-8;

/// `10^lo, 10^(lo+1), …, 10^hi`.
pub fn powers_of_ten(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|k| format!("1e{k}").parse().expect("valid literal")).collect()
}

pub fn default_grid() -> Vec<f64> {
    powers_of_ten(-4, 6)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub eta: f64,
    /// Missing when the run failed before logging anything past step 0.
    pub final_objective: Option<f64>,
    /// Final `f - f⋆` is below the threshold.
    pub converged: bool,
    /// First logged step with `f - f⋆` below the threshold.
    pub steps_to_threshold: Option<usize>,
}

pub fn sweep(
    problem: &dyn Problem,
    base: &OptimizerConfig,
    kind: OptimizerKind,
    region: FeasibleRegion,
    w0: &ParamVector,
    etas: &[f64],
    threshold: f64,
) -> Result<Vec<SweepRow>> {
    let f_star = problem.meta().f_star_or_zero();
    etas.par_iter()
        .map(|&eta| {
            let config = OptimizerConfig { max_lr_eta: eta, ..base.clone() };
            let traj = run(problem, &config, kind, region, w0)?;
            let final_objective = if traj.failed() { None } else { traj.final_objective() };
            let steps_to_threshold = traj.objectives().find(|&(_, f)| f - f_star < threshold).map(|(t, _)| t);
            Ok(SweepRow {
                eta,
                final_objective,
                converged: final_objective.is_some_and(|f| f - f_star < threshold),
                steps_to_threshold,
            })
        })
        .collect()
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let f = r.final_objective.map(|f| format!("{f:.16e}")).unwrap_or_default();
        let s = r.steps_to_threshold.map(|s| s.to_string()).unwrap_or_default();
        writeln!(out, "{:e},{f},{},{s}", r.eta, r.converged).expect("write to string");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alig::problems::RsiScalarProblem;

    #[test]
    fn grid_is_powers_of_ten() {
        let g = default_grid();
        assert_eq!(g.len(), 11);
        assert_eq!(g[0], 1e-4);
        assert_eq!(g[4], 1.0);
        assert_eq!(g[10], 1e6);
    }

    #[test]
    fn rsi_sweep_separates_small_and_large_eta() {
        let p = RsiScalarProblem::new();
        let base = OptimizerConfig { delta: 0.0, max_steps: 10_000, ..Default::default() };
        let rows = sweep(&p, &base, OptimizerKind::Alig, FeasibleRegion::Unconstrained, &p.initial_point(), &[0.1, 1.0, 100.0], DEFAULT_THRESHOLD)
            .unwrap();
        assert!(rows[0].converged && rows[1].converged);
        assert!(!rows[2].converged);
        assert_eq!(rows[2].steps_to_threshold, None);
        let csv = to_csv(&rows);
        assert!(csv.starts_with(SWEEP_HEADER));
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.lines().nth(3).unwrap().starts_with("1e2,"));
    }
}
