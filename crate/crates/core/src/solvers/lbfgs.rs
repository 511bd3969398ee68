use super::{armijo_backtrack, IterationSnapshot, SolverConfig, SolverState, StepReport};
use crate::linalg::{axpy, dot, norm};
use crate::problems::{Batch, Problem};

/// Relative curvature threshold: pairs need `s^T y > 1e-10 · ‖s‖‖y‖`.
pub const CURVATURE_EPS: f64 = 1e-10;

/// One stored `(s, y)` pair with `ρ = 1 / s^T y`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvaturePair {
    pub s: Vec<f64>,
    pub y: Vec<f64>,
    rho: f64,
}

impl CurvaturePair {
    /// `None` when the pair fails the curvature safeguard.
    pub fn new(s: Vec<f64>, y: Vec<f64>) -> Option<Self> {
        let sy = dot(&s, &y);
        if sy > CURVATURE_EPS * norm(&s) * norm(&y) {
            Some(CurvaturePair {
                rho: 1.0 / sy,
                s,
                y,
            })
        } else {
            None
        }
    }
}

/// `−H_k g` by the two-loop recursion over `pairs` (oldest first), with
/// `H₀ = γI`, `γ = s^T y / y^T y` from the newest pair. No pairs gives `−g`.
pub fn lbfgs_direction<'a, I>(pairs: I, g: &[f64]) -> Vec<f64>
where
    I: IntoIterator<Item = &'a CurvaturePair>,
    I::IntoIter: DoubleEndedIterator + Clone,
{
    let pairs = pairs.into_iter();
    let mut q = g.to_vec();
    let mut alphas = Vec::new();
    for p in pairs.clone().rev() {
        let a = p.rho * dot(&p.s, &q);
        axpy(-a, &p.y, &mut q);
        alphas.push(a);
    }
    let gamma = pairs
        .clone()
        .next_back()
        .map_or(1.0, |p| dot(&p.s, &p.y) / dot(&p.y, &p.y));
    for x in q.iter_mut() {
        *x *= gamma;
    }
    for (p, a) in pairs.zip(alphas.into_iter().rev()) {
        let b = p.rho * dot(&p.y, &q);
        axpy(a - b, &p.s, &mut q);
    }
    q.iter_mut().for_each(|x| *x = -*x);
    q
}

/// L-BFGS with Armijo backtracking.
pub fn lbfgs_step<'s>(
    problem: &dyn Problem,
    state: &'s mut SolverState,
    config: &SolverConfig,
) -> IterationSnapshot<'s> {
    let mut dir = lbfgs_direction(&state.lbfgs_pairs, &state.gradient);
    let mut slope = dot(&state.gradient, &dir);
    if slope.is_nan() || slope >= 0.0 {
        dir = state.gradient.iter().map(|x| -x).collect();
        slope = dot(&state.gradient, &dir);
    }
    let (accepted, alpha) = match armijo_backtrack(problem, &state.w, &dir, slope) {
        Some((alpha, step, dec)) => {
            axpy(1.0, &step, &mut state.w);
            state.objective -= dec;
            let g_new = problem.gradient(&state.w, &Batch::Full);
            let y: Vec<f64> = g_new
                .iter()
                .zip(&state.gradient)
                .map(|(a, b)| a - b)
                .collect();
            state.gradient = g_new;
            if let Some(pair) = CurvaturePair::new(step, y) {
                if state.lbfgs_pairs.len() == config.lbfgs_memory {
                    state.lbfgs_pairs.pop_front();
                }
                state.lbfgs_pairs.push_back(pair);
            }
            (true, alpha)
        }
        None => (false, 0.0),
    };
    state.rejections = if accepted { 0 } else { state.rejections + 1 };
    state.iter += 1;
    state.snapshot(StepReport {
        accepted,
        radius_or_step: alpha,
        cg_iters: 0,
        rows_touched: 0,
    })
}
