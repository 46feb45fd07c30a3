use alig::problems::{check_constants, check_gradient, read_fixture, write_fixture, LeastSquaresProblem, TinyMlpProblem};
use alig::{
    evaluate_batch, evaluate_sample, full_objective, make_problem, BuiltinProblem, Dims, Error, FeasibleRegion,
    ParamVector, Problem, ProblemKind, ProblemMeta,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn builtin(kind: ProblemKind, eps: f64, seed: u64) -> BuiltinProblem {
    make_problem(kind, kind.default_dims(), eps, seed).unwrap()
}

fn points(p: &BuiltinProblem, count: usize, seed: u64) -> Vec<ParamVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| p.random_point(&mut rng)).collect()
}

/// `ℓ_i(w) = c_i`: no curvature, no gradient.
struct ConstantLoss {
    offsets: Vec<f64>,
    meta: ProblemMeta,
}

impl ConstantLoss {
    fn new(offsets: Vec<f64>) -> Self {
        let meta = ProblemMeta::new(offsets.len());
        ConstantLoss { offsets, meta }
    }
}

impl Problem for ConstantLoss {
    fn name(&self) -> &str {
        "constant"
    }

    fn dim(&self) -> usize {
        3
    }

    fn meta(&self) -> &ProblemMeta {
        &self.meta
    }

    fn eval_into(&self, _w: &[f64], z: usize, grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        self.offsets[z]
    }

    fn initial_point(&self) -> ParamVector {
        ParamVector::zeros(3)
    }
}

#[test]
fn linear_and_quadratic_gradients_match_finite_differences() {
    let cases = [
        builtin(ProblemKind::LeastSquares, 0.0, 1),
        builtin(ProblemKind::LeastSquares, 1e-2, 2),
        builtin(ProblemKind::QuadraticEnsemble, 0.0, 3),
        builtin(ProblemKind::QuadraticEnsemble, 1e-3, 4),
        builtin(ProblemKind::RsiScalar, 0.0, 0),
    ];
    for p in &cases {
        for w in points(p, 10, 7) {
            let err = check_gradient(p, &w, 1e-5).unwrap();
            assert!(err < 1e-6, "{} error {err:e}", p.name());
        }
    }
}

#[test]
fn hinge_gradient_matches_away_from_kinks() {
    let p = builtin(ProblemKind::HingeEnsemble, 0.0, 5);
    for w in points(&p, 10, 8) {
        assert!(check_gradient(&p, &w, 1e-5).unwrap() < 1e-6);
    }
}

#[test]
fn mlp_backprop_matches_finite_differences() {
    // mixed absolute/relative tolerance: per-sample losses near 1 limit
    // the resolution of a central difference to about 1e-11
    let h = 1e-5;
    for seed in 0..3 {
        let p = builtin(ProblemKind::TinyMlp, 0.0, seed);
        let d = p.dim();
        let mut analytic = vec![0.0; d];
        let mut scratch = vec![0.0; d];
        for w in points(&p, 5, seed + 10) {
            let mut probe = w.as_slice().to_vec();
            for z in 0..p.num_samples() {
                p.eval_into(&w, z, &mut analytic);
                for j in 0..d {
                    probe[j] = w[j] + h;
                    let plus = p.eval_into(&probe, z, &mut scratch);
                    probe[j] = w[j] - h;
                    let minus = p.eval_into(&probe, z, &mut scratch);
                    probe[j] = w[j];
                    let numeric = (plus - minus) / (2.0 * h);
                    let tol = 1e-5 * analytic[j].abs().max(numeric.abs()) + 1e-8;
                    assert!((analytic[j] - numeric).abs() <= tol, "z={z} j={j} {} vs {numeric}", analytic[j]);
                }
            }
        }
    }
}

#[test]
fn mlp_truncation_error_shrinks_quadratically() {
    let p = TinyMlpProblem::new(8, 3, 5, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let w = p.random_parameters(&mut rng);
    let coarse = check_gradient(&p, &w, 1e-3).unwrap();
    let fine = check_gradient(&p, &w, 1e-4).unwrap();
    assert!(fine < coarse / 10.0, "{coarse:e} -> {fine:e}");
}

#[test]
fn constant_loss_has_zero_gradient_and_zero_error() {
    let p = ConstantLoss::new(vec![0.5, 2.0, 0.0]);
    let w = ParamVector::new(vec![1.0, -2.0, 3.0]).unwrap();
    for z in 0..3 {
        assert_eq!(evaluate_sample(&p, &w, z).unwrap().gradient.norm_sq(), 0.0);
    }
    assert_eq!(check_gradient(&p, &w, 1e-5).unwrap(), 0.0);
}

#[test]
fn gradient_step_outside_range_is_rejected() {
    let p = builtin(ProblemKind::LeastSquares, 0.0, 0);
    let w = p.initial_point();
    assert!(check_gradient(&p, &w, 1e-9).is_err());
    assert!(check_gradient(&p, &w, 1e-2).is_err());
}

#[test]
fn declared_constants_hold() {
    let cases = [
        builtin(ProblemKind::RsiScalar, 0.0, 0),
        builtin(ProblemKind::LeastSquares, 0.0, 1),
        builtin(ProblemKind::LeastSquares, 1e-2, 1),
        builtin(ProblemKind::QuadraticEnsemble, 0.0, 2),
        builtin(ProblemKind::QuadraticEnsemble, 1e-2, 2),
        builtin(ProblemKind::HingeEnsemble, 0.0, 3),
        builtin(ProblemKind::TinyMlp, 0.0, 4),
    ];
    for p in &cases {
        let report = check_constants(p, 200, 11);
        assert!(report.all_passed(), "{}: {:?}", p.name(), report);
    }
}

#[test]
fn losses_are_non_negative() {
    for kind in ProblemKind::ALL {
        let p = builtin(kind, 0.0, 9);
        for w in points(&p, 20, 1) {
            for z in 0..p.num_samples() {
                assert!(evaluate_sample(&p, &w, z).unwrap().loss >= 0.0, "{kind}");
            }
        }
    }
}

fn compensated_mean(values: &[f64]) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for &v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    (sum + comp) / values.len() as f64
}

#[test]
fn full_objective_is_the_sample_mean() {
    for kind in ProblemKind::ALL {
        let p = builtin(kind, 0.0, 6);
        for w in points(&p, 5, 2) {
            let losses: Vec<f64> = (0..p.num_samples()).map(|z| evaluate_sample(&p, &w, z).unwrap().loss).collect();
            let naive = losses.iter().sum::<f64>() / losses.len() as f64;
            let f = full_objective(&p, &w).unwrap();
            assert!((f - naive).abs() <= 1e-12 * naive.max(1.0), "{kind}");
            assert!((f - compensated_mean(&losses)).abs() <= 1e-12 * naive.max(1.0), "{kind}");
        }
    }
}

#[test]
fn rsi_metadata() {
    let p = builtin(ProblemKind::RsiScalar, 0.0, 0);
    let m = p.meta();
    assert_eq!(p.num_samples(), 1);
    assert_eq!(m.rsi_alpha, Some(0.2));
    assert_eq!(m.f_star, Some(0.0));
    assert_eq!(m.minimizer.as_ref().unwrap().as_slice(), &[0.0]);
    assert!(matches!(p.domain(), FeasibleRegion::L2Ball { .. }));
}

#[test]
fn exact_quadratic_vanishes_at_minimizer() {
    let p = builtin(ProblemKind::QuadraticEnsemble, 0.0, 12);
    let w = p.meta().minimizer.clone().unwrap();
    let worst = (0..p.num_samples()).map(|z| evaluate_sample(&p, &w, z).unwrap().loss).fold(0.0, f64::max);
    assert_eq!(worst, 0.0);
}

#[test]
fn exact_least_squares_interpolates() {
    let p = make_problem(ProblemKind::LeastSquares, Dims::new(20, 10), 0.0, 13).unwrap();
    let BuiltinProblem::LeastSquares(lsq) = &p else { panic!("wrong kind") };
    let w = p.meta().minimizer.clone().unwrap();
    for (row, b) in lsq.rows().zip(lsq.targets()) {
        let r: f64 = row.iter().zip(w.iter()).map(|(a, x)| a * x).sum::<f64>() - b;
        assert!(r.abs() < 1e-12);
    }
}

#[test]
fn make_problem_rejects_bad_arguments() {
    let dims = ProblemKind::LeastSquares.default_dims();
    assert!(make_problem(ProblemKind::LeastSquares, dims, -1.0, 0).is_err());
    assert!(make_problem(ProblemKind::LeastSquares, dims, f64::NAN, 0).is_err());
    assert!(make_problem(ProblemKind::LeastSquares, Dims::new(0, 3), 0.0, 0).is_err());
    assert!(make_problem(ProblemKind::RsiScalar, Dims::new(1, 1), 0.1, 0).is_err());
    assert!(make_problem(ProblemKind::HingeEnsemble, Dims::new(10, 3), 0.1, 0).is_err());
    assert!(make_problem(ProblemKind::QuadraticEnsemble, Dims::with_hidden(4, 3, 2), 0.0, 0).is_err());
}

#[test]
fn evaluation_errors() {
    let p = builtin(ProblemKind::LeastSquares, 0.0, 0);
    let w = p.initial_point();
    assert_eq!(evaluate_sample(&p, &w, 20).unwrap_err(), Error::Index { index: 20, len: 20 });
    assert!(matches!(evaluate_batch(&p, &w, &[0, 25]), Err(Error::Index { .. })));
    assert!(evaluate_batch(&p, &w, &[]).is_err());
    let short = ParamVector::zeros(3);
    assert_eq!(evaluate_sample(&p, &short, 0).unwrap_err(), Error::Dimension { expected: 10, got: 3 });
}

#[test]
fn batch_is_the_mean_of_its_samples() {
    let p = LeastSquaresProblem::new(6, 3, 0.0, 4).unwrap();
    let w = ParamVector::new(vec![0.3, -1.0, 2.0]).unwrap();
    let batch = evaluate_batch(&p, &w, &[1, 4, 4]).unwrap();
    let a = evaluate_sample(&p, &w, 1).unwrap();
    let b = evaluate_sample(&p, &w, 4).unwrap();
    assert!((batch.loss - (a.loss + 2.0 * b.loss) / 3.0).abs() < 1e-12);
    for j in 0..3 {
        assert!((batch.gradient[j] - (a.gradient[j] + 2.0 * b.gradient[j]) / 3.0).abs() < 1e-12);
    }
}

fn any_kind() -> impl Strategy<Value = (ProblemKind, f64)> {
    prop_oneof![
        Just((ProblemKind::RsiScalar, 0.0)),
        Just((ProblemKind::LeastSquares, 0.0)),
        Just((ProblemKind::LeastSquares, 1e-2)),
        Just((ProblemKind::QuadraticEnsemble, 0.0)),
        Just((ProblemKind::QuadraticEnsemble, 1e-3)),
        Just((ProblemKind::HingeEnsemble, 0.0)),
        Just((ProblemKind::TinyMlp, 0.0)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fixture_round_trip_is_bitwise((kind, eps) in any_kind(), seed in 0u64..1000) {
        let p = builtin(kind, eps, seed);
        let text = write_fixture(&p, seed);
        let fixture = read_fixture(&text).unwrap();
        prop_assert_eq!(fixture.kind, kind);
        prop_assert_eq!(fixture.seed, seed);
        let q = fixture.problem;
        prop_assert_eq!(q.meta(), p.meta());
        for w in points(&p, 3, seed) {
            for z in 0..p.num_samples() {
                let a = evaluate_sample(&p, &w, z).unwrap();
                let b = evaluate_sample(&q, &w, z).unwrap();
                prop_assert_eq!(a.loss.to_bits(), b.loss.to_bits());
                prop_assert_eq!(a.gradient, b.gradient);
            }
        }
        prop_assert_eq!(write_fixture(&q, seed), text);
    }

    #[test]
    fn rsi_inequality_over_domain(w in -0.6f64..=0.6) {
        let p = builtin(ProblemKind::RsiScalar, 0.0, 0);
        let e = evaluate_sample(&p, &ParamVector::new(vec![w]).unwrap(), 0).unwrap();
        prop_assert!(e.gradient[0] * w >= 0.2 * w * w - 1e-15);
    }
}
