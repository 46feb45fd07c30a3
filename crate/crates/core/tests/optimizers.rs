use alig::problems::{LeastSquaresProblem, QuadraticConfig, QuadraticEnsembleProblem, RsiScalarProblem};
use alig::{
    alig_momentum_step, alig_step, full_objective, make_problem, polyak_gd_step, prox_truncated_solve, run, sgd_step,
    Error, FeasibleRegion, LogSchedule, MomentumVariant, OptimizerConfig, OptimizerKind, OptimizerState, ParamVector,
    Problem, ProblemKind, Termination,
};

fn pv(v: &[f64]) -> ParamVector {
    ParamVector::new(v.to_vec()).unwrap()
}

/// `ℓ(w) = w²` as a one-row least-squares problem.
fn square() -> LeastSquaresProblem {
    LeastSquaresProblem::from_parts(1, vec![1.0], vec![0.0], vec![0.0], 0.0).unwrap()
}

fn config(eta: f64, delta: f64, batch: usize, steps: usize) -> OptimizerConfig {
    OptimizerConfig { max_lr_eta: eta, delta, batch_size: batch, max_steps: steps, ..Default::default() }
}

#[test]
fn polyak_oscillates_on_rsi_example() {
    let p = RsiScalarProblem::new();
    let mut cfg = config(1.0, 0.0, 1, 100);
    cfg.log = LogSchedule::EVERY_STEP;
    let w0 = p.initial_point();
    assert!((w0[0] + 0.6).abs() < 1e-15);
    let traj = run(&p, &cfg, OptimizerKind::PolyakGd, FeasibleRegion::Unconstrained, &w0).unwrap();
    assert_eq!(traj.len(), 101);
    assert_eq!(traj.termination, Termination::Completed);
    for r in &traj.records {
        assert!((r.loss - 18.0 / 125.0).abs() < 1e-12, "step {} loss {}", r.step, r.loss);
        assert!((r.full_objective.unwrap() - 18.0 / 125.0).abs() < 1e-12, "step {} f {:?}", r.step, r.full_objective);
    }
    assert!((traj.final_objective().unwrap() - 0.144).abs() < 1e-12);
}

#[test]
fn polyak_drifts_inward_from_below_the_cycle() {
    // fl(0.6) < 3/5 and the two-cycle is repelling
    let p = RsiScalarProblem::new();
    let traj = run(&p, &config(1.0, 0.0, 1, 200), OptimizerKind::PolyakGd, FeasibleRegion::Unconstrained, &pv(&[-0.6])).unwrap();
    assert!(traj.final_objective().unwrap() < 0.1);
}

#[test]
fn polyak_first_steps_alternate_sign() {
    let p = RsiScalarProblem::new();
    let mut state = OptimizerState::new(&p, &pv(&[-0.6]), FeasibleRegion::Unconstrained, 0).unwrap();
    polyak_gd_step(&mut state, &p, 0.0).unwrap();
    assert!((state.w()[0] - 0.6).abs() < 1e-12);
    polyak_gd_step(&mut state, &p, 0.0).unwrap();
    assert!((state.w()[0] + 0.6).abs() < 1e-12);
}

#[test]
fn polyak_on_square() {
    let p = square();
    let mut state = OptimizerState::new(&p, &pv(&[1.0]), FeasibleRegion::Unconstrained, 0).unwrap();
    let rec = polyak_gd_step(&mut state, &p, 0.0).unwrap();
    assert_eq!(rec.step_size, 0.25);
    assert_eq!(state.w(), &[0.5]);
    assert!(rec.sample_indices.is_empty());
}

#[test]
fn sgd_examples() {
    let p = square();
    let mut state = OptimizerState::new(&p, &pv(&[2.0]), FeasibleRegion::Unconstrained, 0).unwrap();
    sgd_step(&mut state, &p, 0.25, 1).unwrap();
    assert_eq!(state.w(), &[1.0]);

    let mut state = OptimizerState::new(&p, &pv(&[0.0]), FeasibleRegion::Unconstrained, 0).unwrap();
    sgd_step(&mut state, &p, 0.25, 1).unwrap();
    assert_eq!(state.w(), &[0.0]);
}

#[test]
fn sgd_with_copied_step_size_matches_alig() {
    let p = make_problem(ProblemKind::LeastSquares, ProblemKind::LeastSquares.default_dims(), 0.0, 3).unwrap();
    let cfg = config(0.05, 1e-5, 4, 1);
    let w0 = p.initial_point();
    let mut a = OptimizerState::new(&p, &w0, FeasibleRegion::Unconstrained, 9).unwrap();
    let mut b = OptimizerState::new(&p, &w0, FeasibleRegion::Unconstrained, 9).unwrap();
    for _ in 0..20 {
        let rec = alig_step(&mut a, &p, &cfg).unwrap();
        let other = sgd_step(&mut b, &p, rec.step_size, 4).unwrap();
        assert_eq!(rec.sample_indices, other.sample_indices);
        assert_eq!(a.w(), b.w());
    }
}

#[test]
fn alig_converges_on_rsi_example() {
    let p = RsiScalarProblem::new();
    let traj = run(&p, &config(0.1, 0.0, 1, 5000), OptimizerKind::Alig, FeasibleRegion::Unconstrained, &pv(&[-0.6])).unwrap();
    assert!(traj.final_objective().unwrap() < 1e-10);
}

#[test]
fn zero_steps_keep_the_initial_record() {
    let p = make_problem(ProblemKind::QuadraticEnsemble, ProblemKind::QuadraticEnsemble.default_dims(), 0.0, 1).unwrap();
    let w0 = p.initial_point();
    let traj = run(&p, &config(1e9, 1e-5, 1, 0), OptimizerKind::Alig, FeasibleRegion::Unconstrained, &w0).unwrap();
    assert_eq!(traj.len(), 1);
    assert_eq!(traj.records[0].step, 0);
    assert_eq!(traj.records[0].full_objective, Some(full_objective(&p, &w0).unwrap()));
}

#[test]
fn step_sizes_bounded_and_iterates_feasible() {
    let p = make_problem(ProblemKind::LeastSquares, ProblemKind::LeastSquares.default_dims(), 1e-2, 4).unwrap();
    let region = FeasibleRegion::L2Ball { radius: 1.5 };
    for (mu, variant) in [(0.0, MomentumVariant::PaperLiteral), (0.9, MomentumVariant::PaperLiteral), (0.9, MomentumVariant::StandardNesterov)] {
        let mut cfg = config(0.3, 1e-5, 2, 300);
        cfg.momentum_mu = mu;
        cfg.momentum_variant = variant;
        let mut state = OptimizerState::new(&p, &ParamVector::zeros(10), region, 5).unwrap();
        for _ in 0..300 {
            let rec = alig_step(&mut state, &p, &cfg).unwrap();
            assert!((0.0..=0.3).contains(&rec.step_size));
            assert!(state.params().norm() <= 1.5 * (1.0 + 1e-12));
        }
    }
}

#[test]
fn unclipped_full_batch_matches_polyak() {
    let p = make_problem(ProblemKind::LeastSquares, ProblemKind::LeastSquares.default_dims(), 0.0, 6).unwrap();
    let w0 = p.initial_point();
    let n = p.num_samples();
    let a = run(&p, &config(1.0, 0.0, n, 100), OptimizerKind::AligInf, FeasibleRegion::Unconstrained, &w0).unwrap();
    let b = run(&p, &config(1.0, 0.0, n, 100), OptimizerKind::PolyakGd, FeasibleRegion::Unconstrained, &w0).unwrap();
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!(x.step_size.to_bits(), y.step_size.to_bits());
        assert_eq!(x.loss.to_bits(), y.loss.to_bits());
        assert_eq!(x.dist_to_opt_sq, y.dist_to_opt_sq);
    }
}

#[test]
fn zero_momentum_matches_plain() {
    let p = make_problem(ProblemKind::QuadraticEnsemble, ProblemKind::QuadraticEnsemble.default_dims(), 1e-3, 2).unwrap();
    let cfg = config(0.2, 1e-5, 1, 1);
    let mut nesterov = cfg.clone();
    nesterov.momentum_variant = MomentumVariant::StandardNesterov;
    let w0 = p.initial_point();
    let mut plain = OptimizerState::new(&p, &w0, FeasibleRegion::Unconstrained, 4).unwrap();
    let mut momentum = OptimizerState::new(&p, &w0, FeasibleRegion::Unconstrained, 4).unwrap();
    for _ in 0..100 {
        alig_step(&mut plain, &p, &cfg).unwrap();
        alig_momentum_step(&mut momentum, &p, &nesterov).unwrap();
        assert_eq!(plain.w(), momentum.w());
    }
}

#[test]
fn alig_step_is_the_truncated_prox_solution() {
    let p = make_problem(ProblemKind::LeastSquares, ProblemKind::LeastSquares.default_dims(), 0.0, 7).unwrap();
    let n = p.num_samples();
    let cfg = config(0.02, 0.0, n, 1);
    let mut state = OptimizerState::new(&p, &p.initial_point(), FeasibleRegion::Unconstrained, 0).unwrap();
    for _ in 0..30 {
        let before = state.params();
        let all: Vec<usize> = (0..n).collect();
        let e = alig::evaluate_batch(&p, &before, &all).unwrap();
        alig_step(&mut state, &p, &cfg).unwrap();
        let prox = prox_truncated_solve(&before, e.loss, &e.gradient, 0.02).unwrap();
        for (a, b) in state.w().iter().zip(prox.iter()) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }
}

#[test]
fn identical_seeds_replay_bitwise() {
    let p = make_problem(ProblemKind::TinyMlp, ProblemKind::TinyMlp.default_dims(), 0.0, 1).unwrap();
    let mut cfg = config(0.1, 1e-5, 8, 200);
    cfg.seed = 42;
    cfg.momentum_mu = 0.5;
    let w0 = p.initial_point();
    let a = run(&p, &cfg, OptimizerKind::Alig, FeasibleRegion::Unconstrained, &w0).unwrap();
    let b = run(&p, &cfg, OptimizerKind::Alig, FeasibleRegion::Unconstrained, &w0).unwrap();
    assert_eq!(a, b);
    cfg.seed = 43;
    let c = run(&p, &cfg, OptimizerKind::Alig, FeasibleRegion::Unconstrained, &w0).unwrap();
    assert_ne!(a.records[1].sample_indices, c.records[1].sample_indices);
}

#[test]
fn divergent_step_truncates_the_trajectory() {
    let p = QuadraticEnsembleProblem::new(QuadraticConfig { eps: 1e-2, seed: 3, ..Default::default() }).unwrap();
    let w_star = p.meta().minimizer.clone().unwrap();
    let mut cfg = config(1.0, 0.0, 1, 10);
    cfg.f_star = Some(0.0);
    let traj = run(&p, &cfg, OptimizerKind::PolyakGd, FeasibleRegion::Unconstrained, &w_star).unwrap();
    assert_eq!(traj.len(), 1);
    match traj.termination {
        Termination::Failed { step: 1, error: Error::DivergentStep { .. } } => {}
        other => panic!("unexpected termination {other:?}"),
    }
}

#[test]
fn stop_threshold_ends_the_run() {
    let p = RsiScalarProblem::new();
    let mut cfg = config(0.1, 0.0, 1, 100_000);
    cfg.stop_threshold = Some(1e-6);
    let traj = run(&p, &cfg, OptimizerKind::Alig, FeasibleRegion::Unconstrained, &pv(&[-0.6])).unwrap();
    let Termination::ThresholdReached { step } = traj.termination else { panic!("threshold not reached") };
    assert_eq!(traj.last().unwrap().step, step);
    assert!(traj.final_objective().unwrap() <= 1e-6);
    assert!(traj.records[traj.len() - 2].full_objective.unwrap() > 1e-6);
}

#[test]
fn invalid_configurations_are_rejected() {
    let p = make_problem(ProblemKind::LeastSquares, ProblemKind::LeastSquares.default_dims(), 1e-2, 0).unwrap();
    let w0 = p.initial_point();
    let go = |cfg: OptimizerConfig| run(&p, &cfg, OptimizerKind::Alig, FeasibleRegion::Unconstrained, &w0);
    assert!(go(config(0.1, 1e-5, 0, 1)).is_err());
    assert!(go(config(0.1, 1e-5, 21, 1)).is_err());
    assert!(go(config(-1.0, 1e-5, 1, 1)).is_err());
    assert!(go(config(0.1, 0.0, 1, 1)).is_err());
    let mut cfg = config(0.1, 1e-5, 1, 1);
    cfg.momentum_mu = 1.0;
    assert!(go(cfg).is_err());
    let outside = ParamVector::new(vec![10.0; 10]).unwrap();
    assert!(run(&p, &config(0.1, 1e-5, 1, 1), OptimizerKind::Alig, FeasibleRegion::L2Ball { radius: 1.0 }, &outside).is_err());
}
