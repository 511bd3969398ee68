//! Second-order methods behind one driver.
//!
//! Inexact Newton: [`tron_step`] (trust-region Newton-CG), [`stron_step`]
//! (the same with a progressively growing sub-sampled Hessian) and
//! [`newton_cg_step`] (line search). Quasi-Newton: [`lbfgs_step`].
//!
//! Every method starts from `w = 0` and is driven by [`run_solver`], which
//! hands an [`IterationSnapshot`] to a callback after every iteration.
//!
//! Objective values reported in snapshots are tracked as
//! `F(w_{k+1}) = F(w_k) − [F(w_k) − F(w_k + s)]`, where the bracket comes
//! from [`Problem::decrease`]. That difference is formed without
//! cancellation, so ratio and sufficient-decrease tests stay meaningful down
//! to gradient norms far below `sqrt(ε)·|F|`.

use std::collections::VecDeque;
use std::fmt;
use std::ops::ControlFlow;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg::norm;
use crate::problems::{Batch, Problem};

mod lbfgs;
mod newton_cg;
mod tron;
pub mod trust_region;

pub use lbfgs::{lbfgs_direction, lbfgs_step, CurvaturePair};
pub use newton_cg::{newton_cg_step, newton_direction, NewtonDirection};
pub use tron::{next_batch_size, stron_step, tron_step};
pub use trust_region::{steihaug_cg, CgStatus, SubproblemSolution};

/// Consecutive rejected steps after which a run is declared stalled.
pub const STALL_LIMIT: usize = 20;

#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("unknown solver {0:?} (expected tron, stron, newton-cg or lbfgs)")]
    UnknownMethod(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Tron,
    Stron,
    NewtonCg,
    Lbfgs,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Tron, Method::Stron, Method::NewtonCg, Method::Lbfgs];

    pub fn name(self) -> &'static str {
        match self {
            Method::Tron => "tron",
            Method::Stron => "stron",
            Method::NewtonCg => "newton-cg",
            Method::Lbfgs => "lbfgs",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| SolverError::UnknownMethod(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    pub max_iters: usize,
    /// Stop once `‖∇F‖ ≤ grad_tol · ‖∇F(w₀)‖`.
    pub grad_tol: f64,
    pub cg_max_iters: usize,
    pub cg_rtol: f64,
    pub tr_radius0: f64,
    /// Ratio thresholds (η₀, η₁, η₂).
    pub eta: [f64; 3],
    /// Radius factors (σ₁, σ₂, σ₃): shrink hard, shrink, expand.
    pub radius_factors: [f64; 3],
    pub lbfgs_memory: usize,
    pub batch0_frac: f64,
    pub batch_growth: f64,
    pub rng_seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: Method::Tron,
            max_iters: 500,
            grad_tol: 1e-6,
            cg_max_iters: 25,
            cg_rtol: 0.1,
            tr_radius0: 1.0,
            eta: [1e-4, 0.25, 0.75],
            radius_factors: [0.25, 0.5, 4.0],
            lbfgs_memory: 10,
            batch0_frac: 0.1,
            batch_growth: 1.5,
            rng_seed: 42,
        }
    }
}

impl SolverConfig {
    pub fn new(method: Method) -> Self {
        SolverConfig {
            method,
            ..SolverConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let fail = |m: &str| Err(SolverError::Config(m.to_string()));
        let [e0, e1, e2] = self.eta;
        let [s1, s2, s3] = self.radius_factors;
        if !(self.grad_tol > 0.0 && self.grad_tol.is_finite()) {
            return fail("grad_tol must be positive");
        }
        if self.cg_max_iters == 0 {
            return fail("cg_max_iters must be at least 1");
        }
        if !(self.cg_rtol > 0.0 && self.cg_rtol < 1.0) {
            return fail("cg_rtol must lie in (0, 1)");
        }
        if !(self.tr_radius0 > 0.0 && self.tr_radius0.is_finite()) {
            return fail("tr_radius0 must be positive");
        }
        if !(0.0 < e0 && e0 < e1 && e1 < e2 && e2 < 1.0) {
            return fail("eta must satisfy 0 < η₀ < η₁ < η₂ < 1");
        }
        if !(0.0 < s1 && s1 <= s2 && s2 < 1.0 && 1.0 < s3 && s3.is_finite()) {
            return fail("radius factors must satisfy 0 < σ₁ ≤ σ₂ < 1 < σ₃");
        }
        if self.lbfgs_memory == 0 {
            return fail("lbfgs_memory must be at least 1");
        }
        if !(self.batch0_frac > 0.0 && self.batch0_frac <= 1.0) {
            return fail("batch0_frac must lie in (0, 1]");
        }
        if !(self.batch_growth >= 1.0 && self.batch_growth.is_finite()) {
            return fail("batch_growth must be at least 1");
        }
        Ok(())
    }
}

/// Mutable state of one solver run. Never shared between runs.
#[derive(Clone, Debug)]
pub struct SolverState {
    pub w: Vec<f64>,
    pub iter: usize,
    /// `F(w)` on full data.
    pub objective: f64,
    /// `∇F(w)` on full data.
    pub gradient: Vec<f64>,
    pub grad_norm0: f64,
    pub tr_radius: f64,
    pub lbfgs_pairs: VecDeque<CurvaturePair>,
    pub batch_size: usize,
    pub rng: ChaCha8Rng,
    /// Rejected steps since the last accepted one.
    pub rejections: usize,
}

impl SolverState {
    /// State at `w₀ = 0`.
    pub fn new(problem: &dyn Problem, config: &SolverConfig) -> Self {
        let w = vec![0.0; problem.dim()];
        let (objective, gradient) = problem.objective_and_gradient(&w, &Batch::Full);
        let grad_norm0 = norm(&gradient);
        let n = problem.n_rows();
        SolverState {
            w,
            iter: 0,
            objective,
            gradient,
            grad_norm0,
            tr_radius: config.tr_radius0,
            lbfgs_pairs: VecDeque::with_capacity(config.lbfgs_memory),
            batch_size: tron::initial_batch_size(config.batch0_frac, n),
            rng: ChaCha8Rng::seed_from_u64(config.rng_seed),
            rejections: 0,
        }
    }

    pub fn grad_norm(&self) -> f64 {
        norm(&self.gradient)
    }

    fn snapshot(&self, step: StepReport) -> IterationSnapshot<'_> {
        IterationSnapshot {
            iter: self.iter,
            w: &self.w,
            objective: self.objective,
            grad_norm: self.grad_norm(),
            step_accepted: step.accepted,
            tr_radius_or_step: step.radius_or_step,
            cg_iters_used: step.cg_iters,
            rows_touched: step.rows_touched,
        }
    }
}

/// What one iteration did, before it is paired with the new iterate.
#[derive(Clone, Copy, Debug, Default)]
struct StepReport {
    accepted: bool,
    radius_or_step: f64,
    cg_iters: usize,
    rows_touched: usize,
}

/// Per-iteration record handed to the callback.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationSnapshot<'a> {
    pub iter: usize,
    pub w: &'a [f64],
    pub objective: f64,
    pub grad_norm: f64,
    pub step_accepted: bool,
    /// Trust-region radius after the update, or the line-search step length.
    pub tr_radius_or_step: f64,
    pub cg_iters_used: usize,
    /// Data rows processed by Hessian-vector products in this iteration.
    pub rows_touched: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIters,
    /// [`STALL_LIMIT`] consecutive rejected steps.
    Stalled,
    /// The callback asked to stop.
    Aborted,
}

#[derive(Clone, Debug)]
pub struct SolverOutcome {
    pub w: Vec<f64>,
    pub termination: Termination,
    pub iterations: usize,
    pub objective: f64,
    pub grad_norm: f64,
}

/// Runs one step of the configured method.
pub fn step<'s>(
    problem: &dyn Problem,
    state: &'s mut SolverState,
    config: &SolverConfig,
) -> IterationSnapshot<'s> {
    match config.method {
        Method::Tron => tron_step(problem, state, config),
        Method::Stron => stron_step(problem, state, config),
        Method::NewtonCg => newton_cg_step(problem, state, config),
        Method::Lbfgs => lbfgs_step(problem, state, config),
    }
}

/// Minimizes `problem` from `w₀ = 0`.
///
/// The callback sees iteration 0 (the starting point) and every iteration
/// after it, always before the stopping test. Returning
/// `ControlFlow::Break` ends the run with [`Termination::Aborted`].
pub fn run_solver<F>(
    problem: &dyn Problem,
    config: &SolverConfig,
    mut callback: F,
) -> Result<SolverOutcome, SolverError>
where
    F: FnMut(&IterationSnapshot<'_>) -> ControlFlow<()>,
{
    config.validate()?;
    let mut state = SolverState::new(problem, config);
    let initial = StepReport {
        radius_or_step: match config.method {
            Method::Tron | Method::Stron => state.tr_radius,
            _ => 0.0,
        },
        ..StepReport::default()
    };
    let mut flow = callback(&state.snapshot(initial));
    let termination = loop {
        if flow.is_break() {
            break Termination::Aborted;
        }
        if state.grad_norm() <= config.grad_tol * state.grad_norm0 {
            break Termination::Converged;
        }
        if state.iter >= config.max_iters {
            break Termination::MaxIters;
        }
        if state.rejections >= STALL_LIMIT {
            break Termination::Stalled;
        }
        let snap = step(problem, &mut state, config);
        flow = callback(&snap);
    };
    Ok(SolverOutcome {
        grad_norm: state.grad_norm(),
        objective: state.objective,
        iterations: state.iter,
        w: state.w,
        termination,
    })
}

pub(crate) const MAX_HALVINGS: usize = 50;
pub(crate) const ARMIJO_C: f64 = 1e-4;

/// Backtracking Armijo search along `dir`: tries `α = 1, ½, ¼, …` up to
/// [`MAX_HALVINGS`] halvings and returns the first `α` with
/// `F(w) − F(w + αd) ≥ c·α·(−g^T d)`, the step `αd` and that decrease.
pub(crate) fn armijo_backtrack(
    problem: &dyn Problem,
    w: &[f64],
    dir: &[f64],
    slope: f64,
) -> Option<(f64, Vec<f64>, f64)> {
    debug_assert!(slope < 0.0);
    let mut alpha = 1.0;
    for _ in 0..=MAX_HALVINGS {
        let step: Vec<f64> = dir.iter().map(|d| alpha * d).collect();
        let dec = problem.decrease(w, &step);
        if dec.is_finite() && dec >= -ARMIJO_C * alpha * slope {
            return Some((alpha, step, dec));
        }
        alpha *= 0.5;
    }
    None
}
