use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use alig::problems::{read_fixture, write_fixture};
use alig::{
    make_problem, run, BuiltinProblem, Dims, FeasibleRegion, LogSchedule, MomentumVariant, OptimizerConfig,
    OptimizerKind, Problem, ProblemKind, DEFAULT_DELTA,
};
use alig_harness::envelopes;
use alig_harness::rates::{fit_rate, RateModel};
use alig_harness::sweep::{self, DEFAULT_THRESHOLD};
use alig_harness::verify;
use clap::{Args, Parser, Subcommand};

const USAGE: u8 = 2;
const FAILURE: u8 = 1;

#[derive(Parser)]
#[command(name = "alig-bench", about = "Run and check ALI-G and Polyak step-size optimizers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one optimization and write its trajectory as CSV.
    Run(RunArgs),
    /// Run one configuration for each eta in a grid of powers of ten.
    Sweep(SweepArgs),
    /// Run the property suite and print one CHECK line per property.
    Verify,
    /// Check convergence-theorem envelopes and fit empirical rates.
    Rates(RatesArgs),
}

#[derive(Args)]
struct ProblemArgs {
    /// rsi, least_squares, quadratic, hinge or mlp.
    #[arg(long, default_value = "rsi")]
    problem: ProblemKind,
    /// Problem size as SAMPLESxDIM, or SAMPLESxDIMxHIDDEN for mlp.
    #[arg(long)]
    dims: Option<Dims>,
    /// Interpolation tolerance of the constructed problem.
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    problem_seed: u64,
    /// Load the problem from a fixture file instead of constructing it.
    #[arg(long)]
    problem_file: Option<PathBuf>,
    /// Write the problem to a fixture file.
    #[arg(long)]
    save_problem: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizerArgs {
    /// alig, alig_inf, polyak_gd or sgd.
    #[arg(long, default_value = "alig")]
    optimizer: OptimizerKind,
    /// Maximal learning-rate; the constant rate for sgd.
    #[arg(long, default_value_t = 0.1)]
    eta: f64,
    /// Defaults to 0 on single-sample problems that interpolate exactly and
    /// to 1e-5 otherwise.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    momentum: f64,
    /// paper_literal or standard_nesterov.
    #[arg(long, default_value = "paper_literal")]
    momentum_variant: MomentumVariant,
    #[arg(long, default_value_t = 1)]
    batch_size: usize,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// none or l2:<radius>.
    #[arg(long, default_value = "none")]
    region: FeasibleRegion,
    /// Log the full objective every N steps after the first 100.
    #[arg(long, default_value_t = 10)]
    log_every: usize,
    /// Target value for polyak_gd; defaults to the problem's f⋆.
    #[arg(long)]
    f_star: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    optimizer: OptimizerArgs,
    /// Stop once the full objective is at or below this value.
    #[arg(long)]
    stop_below: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    optimizer: OptimizerArgs,
    /// Smallest exponent of the eta grid.
    #[arg(long, default_value_t = -4, allow_hyphen_values = true)]
    min_exp: i32,
    /// Largest exponent of the eta grid.
    #[arg(long, default_value_t = 6)]
    max_exp: i32,
    /// Runs whose final f - f⋆ is below this count as converged.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RatesArgs {
    #[arg(long, default_value_t = envelopes::DEFAULT_SEEDS)]
    seeds: usize,
    #[arg(long, default_value_t = envelopes::DEFAULT_STEPS)]
    steps: usize,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Run(String),
}

impl From<alig::Error> for Failure {
    fn from(e: alig::Error) -> Self {
        match e {
            alig::Error::Argument(_) | alig::Error::Dimension { .. } | alig::Error::Fixture { .. } => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Run(other.to_string()),
        }
    }
}

impl From<alig_harness::HarnessError> for Failure {
    fn from(e: alig_harness::HarnessError) -> Self {
        match e {
            alig_harness::HarnessError::Core(c) => c.into(),
            other => Failure::Run(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

fn load_problem(args: &ProblemArgs) -> Result<BuiltinProblem, Failure> {
    let problem = match &args.problem_file {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            read_fixture(&text)?.problem
        }
        None => {
            let dims = args.dims.unwrap_or_else(|| args.problem.default_dims());
            make_problem(args.problem, dims, args.eps, args.problem_seed)?
        }
    };
    if let Some(path) = &args.save_problem {
        write_atomic(path, &write_fixture(&problem, args.problem_seed))?;
    }
    Ok(problem)
}

fn optimizer_config(args: &OptimizerArgs, problem: &dyn Problem, default_steps: usize) -> OptimizerConfig {
    let exact_single = problem.num_samples() == 1 && problem.meta().interp_tolerance_eps == Some(0.0);
    OptimizerConfig {
        max_lr_eta: args.eta,
        delta: args.delta.unwrap_or(if exact_single { 0.0 } else { DEFAULT_DELTA }),
        momentum_mu: args.momentum,
        momentum_variant: args.momentum_variant,
        batch_size: args.batch_size,
        seed: args.seed,
        max_steps: args.steps.unwrap_or(default_steps),
        stop_threshold: None,
        log: LogSchedule { every: args.log_every, ..LogSchedule::default() },
        track_average: false,
        f_star: args.f_star,
    }
}

/// Writes through a sibling temporary file so readers never see a partial
/// file.
fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}

fn emit(out: Option<&Path>, contents: &str) -> io::Result<()> {
    match out {
        Some(path) => write_atomic(path, contents),
        None => io::stdout().lock().write_all(contents.as_bytes()),
    }
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    if args.optimizer.log_every == 0 {
        return Err(Failure::Usage("--log-every must be positive".into()));
    }
    let problem = load_problem(&args.problem)?;
    let mut config = optimizer_config(&args.optimizer, &problem, 1000);
    config.stop_threshold = args.stop_below;
    let traj = run(&problem, &config, args.optimizer.optimizer, args.optimizer.region, &problem.initial_point())?;
    emit(args.out.as_deref(), &traj.to_csv())?;
    if let alig::Termination::Failed { step, error } = &traj.termination {
        eprintln!("run stopped at step {step}: {error}");
        return Err(Failure::Run(error.to_string()));
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    if args.min_exp > args.max_exp {
        return Err(Failure::Usage("--min-exp must not exceed --max-exp".into()));
    }
    let problem = load_problem(&args.problem)?;
    let config = optimizer_config(&args.optimizer, &problem, 100_000);
    let grid = sweep::powers_of_ten(args.min_exp, args.max_exp);
    let rows = sweep::sweep(
        &problem,
        &config,
        args.optimizer.optimizer,
        args.optimizer.region,
        &problem.initial_point(),
        &grid,
        args.threshold,
    )?;
    emit(args.out.as_deref(), &sweep::to_csv(&rows))?;
    Ok(())
}

fn cmd_verify() -> Result<(), Failure> {
    let checks = verify::verify_suite();
    print!("{}", verify::report(&checks));
    if verify::all_passed(&checks) {
        Ok(())
    } else {
        Err(Failure::Run(format!("{} checks failed", checks.iter().filter(|c| !c.passed).count())))
    }
}

fn cmd_rates(args: RatesArgs) -> Result<(), Failure> {
    if args.seeds == 0 {
        return Err(Failure::Usage("--seeds must be positive".into()));
    }
    let mut ok = true;
    println!("case,measure,seeds,steps,compared,worst_ratio,passed,model,fitted_constant,slope,residual");
    for case in envelopes::theorem_cases()? {
        let report = envelopes::check_case(&case, args.seeds, args.steps);
        ok &= report.passed();
        let model = match case.measure {
            envelopes::Measure::Averaged => RateModel::InvT,
            envelopes::Measure::LastIterate => RateModel::Exponential,
        };
        let fit = envelopes::run_case(&case, 0, args.steps)
            .map_err(Failure::from)
            .and_then(|t| Ok(fit_rate(&t, model, case.problem.meta().f_star_or_zero())?));
        let fit_cols = match fit {
            Ok(f) => format!("{},{:e},{:e},{:.4}", f.model, f.fitted_constant, f.slope, f.fit_residual),
            Err(_) => format!("{model},,,"),
        };
        println!(
            "{},{:?},{},{},{},{:.4},{},{}",
            report.name,
            case.measure,
            report.seeds,
            report.steps,
            report.compared,
            report.worst_ratio,
            report.passed(),
            fit_cols
        );
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Run("an envelope was exceeded".into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify => cmd_verify(),
        Command::Rates(a) => cmd_rates(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(USAGE)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(FAILURE)
        }
    }
}
