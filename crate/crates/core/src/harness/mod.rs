//! Timed benchmark runs.
//!
//! [`run_experiment`] trains every configured solver under a stopwatch and
//! records a [`TraceRecord`] per iteration: training time, objective, gap to
//! a reference optimum `F*`, optional test accuracy and cumulative Hessian
//! rows. The stopwatch is paused while a record is assembled, so accuracy
//! evaluation and bookkeeping do not show up as training time.
//!
//! `F*` comes from a tight TRON solve ([`compute_f_star`]) and is cached
//! beside the training file as `<sha256>.fstar`.

use std::fs;
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::data::{load_dataset, DataError, Dataset};
use crate::numfmt::g17;
use crate::parallel::Reduction;
use crate::problems::{linear_problem, predict_accuracy, Problem, ProblemConfig, ProblemError};
use crate::solvers::{run_solver, Method, SolverConfig, SolverError, Termination};

mod svg;
mod trace;

pub use svg::{convergence_svg, render_convergence_svg, Metric, GAP_FLOOR};
pub use trace::{read_trace_csv, write_trace_csv, TraceRecord, Traces, TRACE_HEADER};

/// Gradient tolerance of the reference solve.
pub const F_STAR_GRAD_TOL: f64 = 1e-12;
pub const F_STAR_MAX_ITERS: usize = 1000;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(
        "reference optimum not reached ({termination:?} after {iterations} iterations, \
         gradient norm {grad_norm:e}); try a larger lambda or a higher iteration cap"
    )]
    FStar {
        termination: Termination,
        iterations: usize,
        grad_norm: f64,
    },
    #[error("invalid experiment: {0}")]
    Spec(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("trace file: {0}")]
    Csv(String),
    #[error("cannot plot: {0}")]
    Plot(String),
}

/// Where the reference optimum comes from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FStar {
    Value(f64),
    /// Solve for it, reusing the on-disk cache when present.
    Compute,
}

#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub problem: ProblemConfig,
    pub solvers: Vec<SolverConfig>,
    pub train: PathBuf,
    pub test: Option<PathBuf>,
    pub f_star: FStar,
    pub repetitions: usize,
    pub deterministic: bool,
}

impl ExperimentSpec {
    pub fn new(
        problem: ProblemConfig,
        solvers: Vec<SolverConfig>,
        train: impl Into<PathBuf>,
    ) -> Self {
        ExperimentSpec {
            problem,
            solvers,
            train: train.into(),
            test: None,
            f_star: FStar::Compute,
            repetitions: 1,
            deterministic: false,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.repetitions == 0 {
            return Err(HarnessError::Spec("repetitions must be at least 1".into()));
        }
        if self.solvers.is_empty() {
            return Err(HarnessError::Spec("no solver configured".into()));
        }
        self.problem.validate()?;
        for s in &self.solvers {
            s.validate()?;
        }
        Ok(())
    }

    pub fn reduction(&self) -> Reduction {
        Reduction::from_flag(self.deterministic)
    }
}

/// Minimizes `problem` with TRON to a relative gradient norm of
/// [`F_STAR_GRAD_TOL`] and returns the final objective.
pub fn compute_f_star(problem: &dyn Problem) -> Result<f64, HarnessError> {
    let config = SolverConfig {
        grad_tol: F_STAR_GRAD_TOL,
        max_iters: F_STAR_MAX_ITERS,
        ..SolverConfig::new(Method::Tron)
    };
    let out = run_solver(problem, &config, |_| ControlFlow::Continue(()))?;
    if out.termination != Termination::Converged {
        return Err(HarnessError::FStar {
            termination: out.termination,
            iterations: out.iterations,
            grad_norm: out.grad_norm,
        });
    }
    Ok(out.objective)
}

/// Cache file for `F*` of `config` on the training file at `train`.
pub fn f_star_cache_path(train: &Path, config: &ProblemConfig) -> Result<PathBuf, HarnessError> {
    let bytes = fs::read(train).map_err(|source| HarnessError::Io {
        path: train.to_path_buf(),
        source,
    })?;
    let mut h = Sha256::new();
    h.update(&bytes);
    h.update(
        format!(
            "\nkind={} lambda={:016x} bias={}",
            config.kind,
            config.lambda.to_bits(),
            u8::from(config.add_bias)
        )
        .as_bytes(),
    );
    let digest: String = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
    let dir = train.parent().unwrap_or(Path::new(""));
    Ok(dir.join(format!("{digest}.fstar")))
}

/// [`compute_f_star`] behind the on-disk cache. An unreadable cache is
/// recomputed; an unwritable one only logs a warning.
pub fn cached_f_star(
    train: &Path,
    data: &Dataset,
    config: &ProblemConfig,
    reduction: Reduction,
) -> Result<f64, HarnessError> {
    let cache = f_star_cache_path(train, config)?;
    if let Ok(text) = fs::read_to_string(&cache) {
        match text.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => {
                log::debug!("F* = {v} from {}", cache.display());
                return Ok(v);
            }
            _ => log::warn!("ignoring malformed F* cache {}", cache.display()),
        }
    }
    let problem = linear_problem(config, data, reduction)?;
    let value = compute_f_star(&*problem)?;
    if let Err(e) = fs::write(&cache, format!("{}\n", g17(value))) {
        log::warn!("could not write F* cache {}: {e}", cache.display());
    }
    Ok(value)
}

/// Loads training and optional test data. The training matrix is widened
/// to the test matrix's feature count, since features that never occur in
/// training simply get zero weight.
pub fn load_data(
    train: &Path,
    test: Option<&Path>,
) -> Result<(Dataset, Option<Dataset>), HarnessError> {
    let mut train = load_dataset(train, None)?;
    let test = match test {
        Some(p) => Some(load_dataset(p, Some(train.n_cols()))?),
        None => None,
    };
    if let Some(t) = &test {
        train = train.with_n_cols(t.n_cols());
    }
    Ok((train, test))
}

/// Loads the datasets named in `spec`, resolves `F*` and runs it.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Traces, HarnessError> {
    spec.validate()?;
    let (train, test) = load_data(&spec.train, spec.test.as_deref())?;
    let f_star = match spec.f_star {
        FStar::Value(v) => v,
        FStar::Compute => cached_f_star(&spec.train, &train, &spec.problem, spec.reduction())?,
    };
    run_loaded(spec, &train, test.as_ref(), f_star)
}

/// Runs every solver and repetition of `spec` on in-memory data. The
/// paths and `f_star` field of `spec` are ignored.
///
/// Runs execute one after another so that their clocks do not compete for
/// cores; each run still uses the data-parallel kernels.
pub fn run_loaded(
    spec: &ExperimentSpec,
    train: &Dataset,
    test: Option<&Dataset>,
    f_star: f64,
) -> Result<Traces, HarnessError> {
    spec.validate()?;
    if let Some(t) = test {
        if t.n_cols() > train.n_cols() {
            return Err(HarnessError::Spec(format!(
                "test data has {} features, training data only {}",
                t.n_cols(),
                train.n_cols()
            )));
        }
    }
    let problem = linear_problem(&spec.problem, train, spec.reduction())?;
    let mut traces = Traces::new();
    for solver in &spec.solvers {
        let name = unique_name(&traces, solver.method.name());
        let mut reps = Vec::with_capacity(spec.repetitions);
        for rep in 0..spec.repetitions {
            let config = SolverConfig {
                rng_seed: solver.rng_seed.wrapping_add(rep as u64),
                ..solver.clone()
            };
            reps.push(timed_run(&*problem, &config, &spec.problem, test, f_star)?);
        }
        traces.insert(name, reps);
    }
    Ok(traces)
}

fn unique_name(traces: &Traces, base: &str) -> String {
    if !traces.contains_key(base) {
        return base.to_string();
    }
    (2..)
        .map(|k| format!("{base}#{k}"))
        .find(|n| !traces.contains_key(n))
        .expect("unbounded")
}

fn timed_run(
    problem: &dyn Problem,
    config: &SolverConfig,
    problem_config: &ProblemConfig,
    test: Option<&Dataset>,
    f_star: f64,
) -> Result<Vec<TraceRecord>, HarnessError> {
    let mut records = Vec::new();
    let mut rows = 0usize;
    let mut failure = None;
    let mut clock = Stopwatch::start();
    run_solver(problem, config, |snap| {
        clock.pause();
        let wall_time_s = clock.elapsed().as_secs_f64();
        rows += snap.rows_touched;
        let test_accuracy = match test.map(|t| predict_accuracy(problem_config, t, snap.w)) {
            Some(Err(e)) => {
                failure = Some(e);
                return ControlFlow::Break(());
            }
            acc => acc.map(Result::unwrap),
        };
        records.push(TraceRecord {
            iter: snap.iter,
            wall_time_s,
            objective: snap.objective,
            optimality_gap: snap.objective - f_star,
            test_accuracy,
            grad_norm: snap.grad_norm,
            rows_touched: rows,
        });
        clock.resume();
        ControlFlow::Continue(())
    })?;
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(records),
    }
}

/// Monotonic clock that can be paused.
struct Stopwatch {
    banked: Duration,
    running_since: Option<Instant>,
}

impl Stopwatch {
    fn start() -> Self {
        Stopwatch {
            banked: Duration::ZERO,
            running_since: Some(Instant::now()),
        }
    }

    fn pause(&mut self) {
        if let Some(t) = self.running_since.take() {
            self.banked += t.elapsed();
        }
    }

    fn resume(&mut self) {
        self.running_since.get_or_insert_with(Instant::now);
    }

    fn elapsed(&self) -> Duration {
        self.banked + self.running_since.map_or(Duration::ZERO, |t| t.elapsed())
    }
}
