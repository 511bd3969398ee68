//! The `s2ml` command line.
//!
//! ```text
//! s2ml train      --data train.svm [--out model.txt]
//! s2ml benchmark  --data train.svm --test-data test.svm --solver tron --solver stron --out-dir results/
//! s2ml fstar      --data train.svm
//! s2ml plot       --data results/traces.csv --out-dir results/
//! ```
//!
//! Exit status: 0 on success, 1 on a usage error, 2 on a runtime failure
//! (I/O, bad data, a solve that does not converge).

use std::ffi::OsString;
use std::io::Write;
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, CommandFactory, Parser, Subcommand};

use crate::harness::{
    cached_f_star, load_data, read_trace_csv, render_convergence_svg, run_loaded, write_trace_csv,
    ExperimentSpec, FStar, Metric, Traces,
};
use crate::numfmt::g17;
use crate::parallel::Reduction;
use crate::problems::{linear_problem, ProblemConfig, ProblemKind};
use crate::solvers::{run_solver, Method, SolverConfig, Termination};

mod config;
mod model;

pub use model::{format_model, parse_model, read_model, write_model, ModelError, MODEL_MAGIC};

#[derive(Parser, Debug)]
#[command(
    name = "s2ml",
    version,
    about = "Second-order solvers for L2-regularized linear classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit one model and write its weights.
    Train(Flags),
    /// Time one or more solvers; write traces.csv, gap.svg and accuracy.svg.
    Benchmark(Flags),
    /// Compute (or read from cache) the reference optimum F*.
    Fstar(Flags),
    /// Redraw the plots from a traces.csv given with --data.
    Plot(Flags),
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Default, Clone, PartialEq)]
pub struct Flags {
    /// Training data (LIBSVM, optionally gzipped); a traces.csv for `plot`.
    #[arg(long, value_name = "PATH")]
    data: Option<PathBuf>,
    /// Held-out data for accuracy traces.
    #[arg(long, value_name = "PATH")]
    test_data: Option<PathBuf>,
    /// [default: logistic]
    #[arg(long, value_parser = parse_kind)]
    problem: Option<ProblemKind>,
    /// tron, stron, newton-cg or lbfgs; repeatable for `benchmark` [default: tron]
    #[arg(long, value_parser = parse_method)]
    solver: Vec<Method>,
    /// Regularization strength [default: 1/n]
    #[arg(long, allow_negative_numbers = true, value_parser = non_negative)]
    lambda: Option<f64>,
    /// Append a constant feature (not regularized).
    #[arg(long)]
    bias: bool,
    /// Relative gradient-norm tolerance [default: 1e-6]
    #[arg(long, allow_negative_numbers = true, value_parser = positive)]
    grad_tol: Option<f64>,
    /// [default: 500]
    #[arg(long, value_name = "N", allow_negative_numbers = true)]
    max_iters: Option<usize>,
    /// [default: 25]
    #[arg(long, value_name = "N", value_parser = at_least_one)]
    cg_max_iters: Option<usize>,
    /// [default: 0.1]
    #[arg(long, allow_negative_numbers = true, value_parser = open_unit)]
    cg_rtol: Option<f64>,
    /// [default: 1]
    #[arg(long, allow_negative_numbers = true, value_parser = positive)]
    tr_radius0: Option<f64>,
    /// [default: 10]
    #[arg(long, value_name = "N", value_parser = at_least_one)]
    lbfgs_memory: Option<usize>,
    /// Initial STRON Hessian sample, as a fraction of n [default: 0.1]
    #[arg(long, allow_negative_numbers = true, value_parser = unit_fraction)]
    batch0_frac: Option<f64>,
    /// [default: 1.5]
    #[arg(long, allow_negative_numbers = true, value_parser = growth)]
    batch_growth: Option<f64>,
    /// Repetitions per solver [default: 1]
    #[arg(long, value_name = "N", value_parser = at_least_one)]
    reps: Option<usize>,
    /// [default: 42]
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads [default: all cores]
    #[arg(long, value_name = "N", value_parser = at_least_one)]
    threads: Option<usize>,
    /// Fixed-shape reductions: bit-reproducible for any thread count.
    #[arg(long)]
    deterministic: bool,
    /// Model file for `train` [default: stdout]
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output directory for `benchmark` and `plot` [default: .]
    #[arg(long, value_name = "PATH")]
    out_dir: Option<PathBuf>,
    /// `key = value` file with flag defaults; command-line flags win.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
}

impl Flags {
    /// `self` where set, `base` elsewhere.
    fn over(self, base: Flags) -> Flags {
        Flags {
            data: self.data.or(base.data),
            test_data: self.test_data.or(base.test_data),
            problem: self.problem.or(base.problem),
            solver: if self.solver.is_empty() {
                base.solver
            } else {
                self.solver
            },
            lambda: self.lambda.or(base.lambda),
            bias: self.bias || base.bias,
            grad_tol: self.grad_tol.or(base.grad_tol),
            max_iters: self.max_iters.or(base.max_iters),
            cg_max_iters: self.cg_max_iters.or(base.cg_max_iters),
            cg_rtol: self.cg_rtol.or(base.cg_rtol),
            tr_radius0: self.tr_radius0.or(base.tr_radius0),
            lbfgs_memory: self.lbfgs_memory.or(base.lbfgs_memory),
            batch0_frac: self.batch0_frac.or(base.batch0_frac),
            batch_growth: self.batch_growth.or(base.batch_growth),
            reps: self.reps.or(base.reps),
            seed: self.seed.or(base.seed),
            threads: self.threads.or(base.threads),
            deterministic: self.deterministic || base.deterministic,
            out: self.out.or(base.out),
            out_dir: self.out_dir.or(base.out_dir),
            config: self.config,
        }
    }

    fn data(&self) -> Result<&Path, Usage> {
        self.data
            .as_deref()
            .ok_or_else(|| Usage("--data <PATH> is required".into()))
    }

    fn problem_config(&self, n_rows: usize) -> Result<ProblemConfig, Usage> {
        let config = ProblemConfig {
            kind: self.problem.unwrap_or(ProblemKind::Logistic),
            lambda: self
                .lambda
                .unwrap_or_else(|| ProblemConfig::default_lambda(n_rows)),
            add_bias: self.bias,
        };
        config.validate().map_err(|e| Usage(e.to_string()))?;
        Ok(config)
    }

    fn solver_config(&self, method: Method) -> Result<SolverConfig, Usage> {
        let d = SolverConfig::new(method);
        let config = SolverConfig {
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            grad_tol: self.grad_tol.unwrap_or(d.grad_tol),
            cg_max_iters: self.cg_max_iters.unwrap_or(d.cg_max_iters),
            cg_rtol: self.cg_rtol.unwrap_or(d.cg_rtol),
            tr_radius0: self.tr_radius0.unwrap_or(d.tr_radius0),
            lbfgs_memory: self.lbfgs_memory.unwrap_or(d.lbfgs_memory),
            batch0_frac: self.batch0_frac.unwrap_or(d.batch0_frac),
            batch_growth: self.batch_growth.unwrap_or(d.batch_growth),
            rng_seed: self.seed.unwrap_or(d.rng_seed),
            ..d
        };
        config.validate().map_err(|e| Usage(e.to_string()))?;
        Ok(config)
    }

    fn methods(&self) -> Vec<Method> {
        if self.solver.is_empty() {
            vec![Method::Tron]
        } else {
            self.solver.clone()
        }
    }

    fn reduction(&self) -> Reduction {
        Reduction::from_flag(self.deterministic)
    }

    fn out_dir(&self) -> anyhow::Result<PathBuf> {
        let dir = self.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(dir)
    }
}

fn parse_kind(s: &str) -> Result<ProblemKind, String> {
    s.parse()
        .map_err(|_| "expected logistic or svm-l2".to_string())
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
        .map_err(|_| "expected tron, stron, newton-cg or lbfgs".to_string())
}

fn real(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err("expected a finite number".into()),
    }
}

fn positive(s: &str) -> Result<f64, String> {
    real(s).and_then(|x| {
        if x > 0.0 {
            Ok(x)
        } else {
            Err("must be positive".into())
        }
    })
}

fn non_negative(s: &str) -> Result<f64, String> {
    real(s).and_then(|x| {
        if x >= 0.0 {
            Ok(x)
        } else {
            Err("must be non-negative".into())
        }
    })
}

fn open_unit(s: &str) -> Result<f64, String> {
    real(s).and_then(|x| {
        if x > 0.0 && x < 1.0 {
            Ok(x)
        } else {
            Err("must lie strictly between 0 and 1".into())
        }
    })
}

fn unit_fraction(s: &str) -> Result<f64, String> {
    real(s).and_then(|x| {
        if x > 0.0 && x <= 1.0 {
            Ok(x)
        } else {
            Err("must lie in (0, 1]".into())
        }
    })
}

fn growth(s: &str) -> Result<f64, String> {
    real(s).and_then(|x| {
        if x >= 1.0 {
            Ok(x)
        } else {
            Err("must be at least 1".into())
        }
    })
}

fn at_least_one(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        Ok(_) => Err("must be at least 1".into()),
        Err(_) => Err("expected a positive integer".into()),
    }
}

/// A usage error: bad flags, missing required flags, invalid combinations.
#[derive(Debug)]
struct Usage(String);

enum Failure {
    Usage(Usage),
    Runtime(anyhow::Error),
}

impl From<Usage> for Failure {
    fn from(u: Usage) -> Self {
        Failure::Usage(u)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => {
                    if !e.to_string().contains("Usage:") {
                        eprintln!("\n{}", Cli::command().render_usage());
                    }
                    1
                }
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(Failure::Usage(Usage(msg))) => {
            eprintln!("error: {msg}\n\n{}", Cli::command().render_usage());
            eprintln!("For more information, try '--help'.");
            1
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

type Handler = fn(&Flags) -> Result<(), Failure>;

fn dispatch(command: Command) -> Result<(), Failure> {
    let (run, flags): (Handler, Flags) = match command {
        Command::Train(f) => (train, f),
        Command::Benchmark(f) => (benchmark, f),
        Command::Fstar(f) => (fstar, f),
        Command::Plot(f) => (plot, f),
    };
    let flags = match &flags.config {
        Some(path) => flags.clone().over(config::read_config(path)?),
        None => flags,
    };
    with_threads(flags.threads, || run(&flags))
}

#[cfg(feature = "parallel")]
fn with_threads<R>(
    threads: Option<usize>,
    f: impl FnOnce() -> Result<R, Failure> + Send,
) -> Result<R, Failure>
where
    R: Send,
{
    let Some(n) = threads else { return f() };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .context("building the worker pool")?;
    pool.install(f)
}

#[cfg(not(feature = "parallel"))]
fn with_threads<R>(
    threads: Option<usize>,
    f: impl FnOnce() -> Result<R, Failure>,
) -> Result<R, Failure> {
    if threads.is_some_and(|n| n > 1) {
        log::warn!("built without the `parallel` feature; --threads is ignored");
    }
    f()
}

fn train(flags: &Flags) -> Result<(), Failure> {
    let methods = flags.methods();
    if methods.len() > 1 {
        return Err(Usage("train takes a single --solver".into()).into());
    }
    let data_path = flags.data()?;
    let (data, _) = load_data(data_path, None).context("loading training data")?;
    let problem_config = flags.problem_config(data.n_rows())?;
    let config = flags.solver_config(methods[0])?;
    let problem =
        linear_problem(&problem_config, &data, flags.reduction()).map_err(anyhow::Error::from)?;
    let outcome = run_solver(&*problem, &config, |s| {
        log::debug!("iter {} f {} |g| {}", s.iter, g17(s.objective), s.grad_norm);
        ControlFlow::Continue(())
    })
    .map_err(anyhow::Error::from)?;
    match &flags.out {
        Some(path) => {
            write_model(path, &outcome.w, &problem_config).map_err(anyhow::Error::from)?
        }
        None => std::io::stdout()
            .write_all(format_model(&outcome.w, &problem_config).as_bytes())
            .context("writing model")?,
    }
    eprintln!(
        "{}: {:?} after {} iterations, objective {}, gradient norm {:e}",
        config.method,
        outcome.termination,
        outcome.iterations,
        g17(outcome.objective),
        outcome.grad_norm
    );
    if outcome.termination != Termination::Converged {
        return Err(anyhow::anyhow!(
            "{} did not converge ({:?}); the model was written anyway",
            config.method,
            outcome.termination
        )
        .into());
    }
    Ok(())
}

fn benchmark(flags: &Flags) -> Result<(), Failure> {
    let data_path = flags.data()?;
    let (train, test) = load_data(data_path, flags.test_data.as_deref()).context("loading data")?;
    let problem_config = flags.problem_config(train.n_rows())?;
    let solvers = flags
        .methods()
        .into_iter()
        .map(|m| flags.solver_config(m))
        .collect::<Result<Vec<_>, _>>()?;
    let spec = ExperimentSpec {
        test: flags.test_data.clone(),
        f_star: FStar::Compute,
        repetitions: flags.reps.unwrap_or(1),
        deterministic: flags.deterministic,
        ..ExperimentSpec::new(problem_config, solvers, data_path)
    };
    let out_dir = flags.out_dir()?;
    let f_star = cached_f_star(data_path, &train, &problem_config, spec.reduction())
        .context("computing F*")?;
    let traces = run_loaded(&spec, &train, test.as_ref(), f_star).map_err(anyhow::Error::from)?;

    write_trace_csv(&traces, &out_dir.join("traces.csv")).map_err(anyhow::Error::from)?;
    write_plots(&traces, &out_dir)?;
    print_summary(&traces, f_star).context("writing summary")?;
    Ok(())
}

fn fstar(flags: &Flags) -> Result<(), Failure> {
    let data_path = flags.data()?;
    let (train, _) = load_data(data_path, None).context("loading training data")?;
    let problem_config = flags.problem_config(train.n_rows())?;
    let value = cached_f_star(data_path, &train, &problem_config, flags.reduction())
        .context("computing F*")?;
    println!("{}", g17(value));
    Ok(())
}

fn plot(flags: &Flags) -> Result<(), Failure> {
    let traces = read_trace_csv(flags.data()?).map_err(anyhow::Error::from)?;
    if traces.is_empty() {
        return Err(anyhow::anyhow!("{} holds no trace records", flags.data()?.display()).into());
    }
    write_plots(&traces, &flags.out_dir()?)?;
    Ok(())
}

fn write_plots(traces: &Traces, dir: &Path) -> anyhow::Result<()> {
    render_convergence_svg(traces, Metric::OptimalityGap, &dir.join("gap.svg"))?;
    let has_accuracy = traces
        .values()
        .flatten()
        .flatten()
        .any(|r| r.test_accuracy.is_some());
    if has_accuracy {
        render_convergence_svg(traces, Metric::TestAccuracy, &dir.join("accuracy.svg"))?;
    } else {
        log::warn!("no test accuracy recorded; accuracy.svg not written");
    }
    Ok(())
}

fn print_summary(traces: &Traces, f_star: f64) -> std::io::Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "F* = {}", g17(f_star))?;
    writeln!(
        out,
        "{:<12} {:>4} {:>6} {:>12} {:>12} {:>10} {:>14}",
        "solver", "rep", "iters", "gap", "time_s", "accuracy", "hessian_rows"
    )?;
    for (name, reps) in traces {
        for (rep, trace) in reps.iter().enumerate() {
            let Some(last) = trace.last() else { continue };
            let acc = last
                .test_accuracy
                .map_or_else(|| "-".to_string(), |a| format!("{a:.4}"));
            writeln!(
                out,
                "{name:<12} {rep:>4} {:>6} {:>12.3e} {:>12.4} {acc:>10} {:>14}",
                last.iter, last.optimality_gap, last.wall_time_s, last.rows_touched
            )?;
        }
    }
    Ok(())
}
