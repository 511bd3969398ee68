use rand::seq::index;

use super::trust_region::steihaug_cg;
use super::{IterationSnapshot, SolverConfig, SolverState, StepReport};
use crate::linalg::{axpy, norm};
use crate::problems::{Batch, Problem};

const MAX_RADIUS: f64 = 1e10;

/// `⌈x⌉`, ignoring representation error of up to a few ulps so that e.g.
/// `0.7 · 10` gives 7 rather than 8.
fn ceil_tolerant(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

pub(crate) fn initial_batch_size(batch0_frac: f64, n_rows: usize) -> usize {
    ceil_tolerant(batch0_frac * n_rows as f64).clamp(1, n_rows.max(1))
}

/// Progressive batching: `min(n, ⌈growth · current⌉)`.
pub fn next_batch_size(current: usize, growth: f64, n_rows: usize) -> usize {
    ceil_tolerant(growth * current as f64).clamp(current.min(n_rows), n_rows)
}

/// One trust-region Newton iteration with the Hessian taken over `batch`.
/// Gradient, objective and the ratio test always use full data.
fn trust_region_step<'s>(
    problem: &dyn Problem,
    state: &'s mut SolverState,
    config: &SolverConfig,
    batch: &Batch,
) -> IterationSnapshot<'s> {
    let [eta0, eta1, eta2] = config.eta;
    let [shrink_hard, shrink, expand] = config.radius_factors;
    let radius = state.tr_radius;

    let hess = problem.hessian(&state.w, batch);
    let sol = steihaug_cg(
        &*hess,
        &state.gradient,
        radius,
        config.cg_rtol,
        config.cg_max_iters,
    );
    let rows_touched = sol.iterations * hess.rows();
    drop(hess);

    let predicted = -sol.model_value;
    let step_norm = norm(&sol.step);
    let accepted;
    if !(predicted > 0.0 && predicted.is_finite()) {
        // model breakdown
        accepted = false;
        state.tr_radius = shrink * radius;
    } else {
        let actual = problem.decrease(&state.w, &sol.step);
        let rho = actual / predicted;
        accepted = rho > eta0;
        if accepted {
            axpy(1.0, &sol.step, &mut state.w);
            state.objective -= actual;
            state.gradient = problem.gradient(&state.w, &Batch::Full);
        }
        state.tr_radius = if !accepted {
            shrink * radius.min(step_norm)
        } else if rho < eta1 {
            (shrink_hard * radius).max(shrink * step_norm)
        } else if rho > eta2 && sol.on_boundary() {
            (expand * radius).min(MAX_RADIUS)
        } else {
            radius
        };
    }
    if state.tr_radius.is_nan() || state.tr_radius <= 0.0 {
        state.tr_radius = f64::MIN_POSITIVE;
    }
    state.rejections = if accepted { 0 } else { state.rejections + 1 };
    state.iter += 1;
    state.snapshot(StepReport {
        accepted,
        radius_or_step: state.tr_radius,
        cg_iters: sol.iterations,
        rows_touched,
    })
}

/// Trust-region Newton with a full-data Hessian.
pub fn tron_step<'s>(
    problem: &dyn Problem,
    state: &'s mut SolverState,
    config: &SolverConfig,
) -> IterationSnapshot<'s> {
    trust_region_step(problem, state, config, &Batch::Full)
}

/// Trust-region Newton with the Hessian sub-sampled on `state.batch_size`
/// rows drawn uniformly without replacement; the batch then grows by
/// `batch_growth`. At full batch size no rows are drawn and the step is
/// exactly [`tron_step`].
pub fn stron_step<'s>(
    problem: &dyn Problem,
    state: &'s mut SolverState,
    config: &SolverConfig,
) -> IterationSnapshot<'s> {
    let n = problem.n_rows();
    let batch = if n == 0 || state.batch_size >= n {
        Batch::Full
    } else {
        let mut rows = index::sample(&mut state.rng, n, state.batch_size).into_vec();
        rows.sort_unstable();
        Batch::Rows(rows)
    };
    state.batch_size = next_batch_size(state.batch_size, config.batch_growth, n);
    trust_region_step(problem, state, config, &batch)
}
