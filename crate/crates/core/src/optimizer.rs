//! Optimization loops: ALI-G (optionally with momentum), its unclipped
//! variant, full-batch Polyak gradient descent and constant-rate SGD.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::problem::{batch_mean, mean_loss, Problem};
use crate::projection::FeasibleRegion;
use crate::stepsize::{alig_step_size, polyak_step_size};
use crate::trajectory::{StepRecord, Termination, Trajectory};
use crate::types::{dist_sq, norm_sq, ParamVector};

pub const DEFAULT_DELTA: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OptimizerKind {
    Alig,
    /// ALI-G without clipping (`η = ∞`).
    AligInf,
    PolyakGd,
    Sgd,
}

impl OptimizerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            OptimizerKind::Alig => "alig",
            OptimizerKind::AligInf => "alig_inf",
            OptimizerKind::PolyakGd => "polyak_gd",
            OptimizerKind::Sgd => "sgd",
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "alig" => OptimizerKind::Alig,
            "alig_inf" | "alig-inf" => OptimizerKind::AligInf,
            "polyak_gd" | "polyak" => OptimizerKind::PolyakGd,
            "sgd" => OptimizerKind::Sgd,
            other => return Err(Error::argument(format!("unknown optimizer {other:?}"))),
        })
    }
}

/// How the velocity enters the parameter update when momentum is on.
///
/// Both variants first set `v ← μv - γ∇ℓ`. `PaperLiteral` then moves to
/// `Π(w + μv)`; `StandardNesterov` moves to `Π(w + v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MomentumVariant {
    #[default]
    PaperLiteral,
    StandardNesterov,
}

impl FromStr for MomentumVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "paper_literal" => Ok(MomentumVariant::PaperLiteral),
            "standard_nesterov" => Ok(MomentumVariant::StandardNesterov),
            other => Err(Error::argument(format!("unknown momentum variant {other:?}"))),
        }
    }
}

impl fmt::Display for MomentumVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MomentumVariant::PaperLiteral => "paper_literal",
            MomentumVariant::StandardNesterov => "standard_nesterov",
        })
    }
}

/// Steps at which the full objective is evaluated: every step up to
/// `dense_steps`, then every `every`-th step. The last step is always logged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LogSchedule {
    pub dense_steps: usize,
    pub every: usize,
}

impl LogSchedule {
    pub const EVERY_STEP: LogSchedule = LogSchedule { dense_steps: usize::MAX, every: 1 };

    pub fn should_log(&self, step: usize) -> bool {
        step <= self.dense_steps || step.is_multiple_of(self.every.max(1))
    }
}

impl Default for LogSchedule {
    fn default() -> Self {
        LogSchedule { dense_steps: 100, every: 10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    /// Maximal learning-rate `η`; also the constant rate for SGD.
    pub max_lr_eta: f64,
    pub delta: f64,
    pub momentum_mu: f64,
    pub momentum_variant: MomentumVariant,
    /// Using every sample (`batch_size == num_samples`) evaluates the full
    /// objective in index order instead of sampling.
    pub batch_size: usize,
    pub seed: u64,
    pub max_steps: usize,
    /// Stop once the full objective is at or below this value.
    pub stop_threshold: Option<f64>,
    pub log: LogSchedule,
    /// Also evaluate `f` at the running average of the iterates.
    pub track_average: bool,
    /// Target value for Polyak steps; defaults to the problem's `f⋆`, or 0.
    pub f_star: Option<f64>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            max_lr_eta: 0.1,
            delta: DEFAULT_DELTA,
            momentum_mu: 0.0,
            momentum_variant: MomentumVariant::default(),
            batch_size: 1,
            seed: 0,
            max_steps: 1000,
            stop_threshold: None,
            log: LogSchedule::default(),
            track_average: false,
            f_star: None,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self, problem: &dyn Problem, kind: OptimizerKind) -> Result<()> {
        let n = problem.num_samples();
        if kind != OptimizerKind::PolyakGd && (self.batch_size == 0 || self.batch_size > n) {
            return Err(Error::argument(format!("batch size {} not in 1..={n}", self.batch_size)));
        }
        if !(0.0..1.0).contains(&self.momentum_mu) {
            return Err(Error::argument(format!("momentum {} not in [0, 1)", self.momentum_mu)));
        }
        match kind {
            OptimizerKind::Alig | OptimizerKind::Sgd => {
                if self.max_lr_eta.is_nan() || self.max_lr_eta <= 0.0 {
                    return Err(Error::argument(format!("eta must be positive, got {}", self.max_lr_eta)));
                }
                if kind == OptimizerKind::Sgd && self.max_lr_eta.is_infinite() {
                    return Err(Error::argument("sgd needs a finite learning rate"));
                }
            }
            OptimizerKind::AligInf | OptimizerKind::PolyakGd => {}
        }
        if matches!(kind, OptimizerKind::Alig | OptimizerKind::AligInf) {
            if !(self.delta.is_finite() && self.delta >= 0.0) {
                return Err(Error::argument(format!("delta must be non-negative, got {}", self.delta)));
            }
            if self.delta == 0.0 && problem.meta().interp_tolerance_eps != Some(0.0) {
                return Err(Error::argument(
                    "delta = 0 is only allowed on problems that interpolate exactly",
                ));
            }
        }
        Ok(())
    }
}

/// Mutable state of one run.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    w: Vec<f64>,
    velocity: Vec<f64>,
    step: usize,
    rng: ChaCha8Rng,
    region: FeasibleRegion,
}

impl OptimizerState {
    /// `region` is intersected with the problem's own domain.
    pub fn new(problem: &dyn Problem, w0: &ParamVector, region: FeasibleRegion, seed: u64) -> Result<Self> {
        if w0.dim() != problem.dim() {
            return Err(Error::Dimension { expected: problem.dim(), got: w0.dim() });
        }
        let region = region.intersect(&problem.domain());
        if !region.contains(w0) {
            return Err(Error::argument(format!("initial point is outside the feasible region {region}")));
        }
        Ok(OptimizerState {
            w: w0.as_slice().to_vec(),
            velocity: vec![0.0; w0.dim()],
            step: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            region,
        })
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn params(&self) -> ParamVector {
        ParamVector::from_finite(self.w.clone())
    }

    pub fn velocity(&self) -> &[f64] {
        &self.velocity
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn region(&self) -> FeasibleRegion {
        self.region
    }

    fn draw_batch(&mut self, n: usize, batch: usize) -> Vec<usize> {
        if batch >= n {
            (0..n).collect()
        } else {
            (0..batch).map(|_| self.rng.random_range(0..n)).collect()
        }
    }

    /// Commits `next` as the new iterate after projecting it.
    fn commit(&mut self, mut next: Vec<f64>) -> Result<()> {
        self.region.project_in_place(&mut next);
        if next.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("iterate"));
        }
        self.w = next;
        self.step += 1;
        Ok(())
    }

    fn record(&self, problem: &dyn Problem, indices: Vec<usize>, loss: f64, gamma: f64, g2: f64) -> StepRecord {
        StepRecord {
            step: self.step,
            sample_indices: indices,
            loss,
            step_size: gamma,
            grad_norm_sq: g2,
            dist_to_opt_sq: problem.meta().minimizer.as_ref().map(|m| dist_sq(&self.w, m)),
            full_objective: None,
            averaged_objective: None,
        }
    }
}

fn descend(w: &[f64], gamma: f64, grad: &[f64]) -> Vec<f64> {
    w.iter().zip(grad).map(|(w, g)| w - gamma * g).collect()
}

/// One ALI-G step. Pass `max_lr_eta = f64::INFINITY` for the unclipped variant.
pub fn alig_step(state: &mut OptimizerState, problem: &dyn Problem, config: &OptimizerConfig) -> Result<StepRecord> {
    let indices = state.draw_batch(problem.num_samples(), config.batch_size);
    let (loss, grad) = batch_mean(problem, &state.w, &indices);
    if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Domain("loss"));
    }
    let g2 = norm_sq(&grad);
    let gamma = alig_step_size(loss, g2, config.delta, config.max_lr_eta)?;
    if config.momentum_mu == 0.0 {
        state.commit(descend(&state.w, gamma, &grad))?;
    } else {
        momentum_update(state, config.momentum_mu, config.momentum_variant, gamma, &grad)?;
    }
    Ok(state.record(problem, indices, loss, gamma, g2))
}

/// One ALI-G step through the momentum update even when `μ = 0`.
///
/// [`alig_step`] skips the velocity when `μ = 0`, since the literal
/// form `w + μv` would then never move.
pub fn alig_momentum_step(
    state: &mut OptimizerState,
    problem: &dyn Problem,
    config: &OptimizerConfig,
) -> Result<StepRecord> {
    let indices = state.draw_batch(problem.num_samples(), config.batch_size);
    let (loss, grad) = batch_mean(problem, &state.w, &indices);
    if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Domain("loss"));
    }
    let g2 = norm_sq(&grad);
    let gamma = alig_step_size(loss, g2, config.delta, config.max_lr_eta)?;
    momentum_update(state, config.momentum_mu, config.momentum_variant, gamma, &grad)?;
    Ok(state.record(problem, indices, loss, gamma, g2))
}

fn momentum_update(
    state: &mut OptimizerState,
    mu: f64,
    variant: MomentumVariant,
    gamma: f64,
    grad: &[f64],
) -> Result<()> {
    let velocity: Vec<f64> = state.velocity.iter().zip(grad).map(|(v, g)| mu * v - gamma * g).collect();
    let coeff = match variant {
        MomentumVariant::PaperLiteral => mu,
        MomentumVariant::StandardNesterov => 1.0,
    };
    let next = state.w.iter().zip(&velocity).map(|(w, v)| w + coeff * v).collect();
    state.commit(next)?;
    state.velocity = velocity;
    Ok(())
}

/// One full-batch Polyak step towards `f_star`. The record's sample list is
/// empty since no sampling takes place.
pub fn polyak_gd_step(state: &mut OptimizerState, problem: &dyn Problem, f_star: f64) -> Result<StepRecord> {
    let all: Vec<usize> = (0..problem.num_samples()).collect();
    let (f, grad) = batch_mean(problem, &state.w, &all);
    if !f.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Domain("objective"));
    }
    let g2 = norm_sq(&grad);
    let gamma = polyak_step_size(f, f_star, g2)?;
    state.commit(descend(&state.w, gamma, &grad))?;
    Ok(state.record(problem, Vec::new(), f, gamma, g2))
}

/// One constant-rate SGD step on a batch of `batch_size` samples.
pub fn sgd_step(state: &mut OptimizerState, problem: &dyn Problem, lr: f64, batch_size: usize) -> Result<StepRecord> {
    if !(lr.is_finite() && lr > 0.0) {
        return Err(Error::argument(format!("learning rate must be positive, got {lr}")));
    }
    let indices = state.draw_batch(problem.num_samples(), batch_size.max(1));
    let (loss, grad) = batch_mean(problem, &state.w, &indices);
    if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Domain("loss"));
    }
    let g2 = norm_sq(&grad);
    state.commit(descend(&state.w, lr, &grad))?;
    Ok(state.record(problem, indices, loss, lr, g2))
}

/// Runs `config.max_steps` steps of `kind` from `w0`.
///
/// Invalid configurations are returned as errors. A failing step ends the
/// run early; the trajectory then keeps every record before the failure and
/// its termination says why.
pub fn run(
    problem: &dyn Problem,
    config: &OptimizerConfig,
    kind: OptimizerKind,
    region: FeasibleRegion,
    w0: &ParamVector,
) -> Result<Trajectory> {
    config.validate(problem, kind)?;
    let mut state = OptimizerState::new(problem, w0, region, config.seed)?;
    let mut step_config = config.clone();
    if kind == OptimizerKind::AligInf {
        step_config.max_lr_eta = f64::INFINITY;
    }
    let f_star = config.f_star.unwrap_or_else(|| problem.meta().f_star_or_zero());
    let n = problem.num_samples();

    let all: Vec<usize> = (0..n).collect();
    let (f0, g0) = batch_mean(problem, &state.w, &all);
    if !f0.is_finite() {
        return Err(Error::Domain("initial objective"));
    }
    let mut initial = state.record(problem, Vec::new(), f0, 0.0, norm_sq(&g0));
    initial.full_objective = Some(f0);
    let mut average = config.track_average.then(|| state.w.clone());
    if average.is_some() {
        initial.averaged_objective = Some(f0);
    }

    let mut records = Vec::with_capacity(config.max_steps.min(1 << 20) + 1);
    records.push(initial);
    let mut termination = Termination::Completed;

    for t in 1..=config.max_steps {
        let outcome = match kind {
            OptimizerKind::Alig | OptimizerKind::AligInf => alig_step(&mut state, problem, &step_config),
            OptimizerKind::PolyakGd => polyak_gd_step(&mut state, problem, f_star),
            OptimizerKind::Sgd => sgd_step(&mut state, problem, config.max_lr_eta, config.batch_size),
        };
        let mut rec = match outcome {
            Ok(rec) => rec,
            Err(error) => {
                termination = Termination::Failed { step: t, error };
                break;
            }
        };
        if let Some(avg) = average.as_mut() {
            let k = (t + 1) as f64;
            avg.iter_mut().zip(&state.w).for_each(|(a, w)| *a += (w - *a) / k);
        }
        let log_now = config.log.should_log(t) || t == config.max_steps || config.stop_threshold.is_some();
        if log_now {
            let f = mean_loss(problem, &state.w);
            if !f.is_finite() {
                termination = Termination::Failed { step: t, error: Error::Domain("objective") };
                break;
            }
            rec.full_objective = Some(f);
            if let Some(avg) = average.as_ref() {
                rec.averaged_objective = Some(mean_loss(problem, avg));
            }
        }
        let reached = matches!((rec.full_objective, config.stop_threshold), (Some(f), Some(thr)) if f <= thr);
        records.push(rec);
        if reached {
            termination = Termination::ThresholdReached { step: t };
            break;
        }
    }
    Ok(Trajectory { records, termination })
}
