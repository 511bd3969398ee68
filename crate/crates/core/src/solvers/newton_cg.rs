use super::{armijo_backtrack, IterationSnapshot, SolverConfig, SolverState, StepReport};
use crate::linalg::{axpy, dot, norm};
use crate::problems::{Batch, HessianOp, Problem};

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonDirection {
    pub direction: Vec<f64>,
    /// Hessian-vector products spent.
    pub cg_iters: usize,
    /// CG did not produce a descent direction and `−g` was used instead.
    pub fell_back: bool,
}

/// Approximately solves `H d = −g` by plain CG, stopping at relative
/// residual `rtol`, after `max_iters` products, or on the first
/// non-positive curvature direction (keeping the iterate so far).
pub fn newton_direction(
    hess: &dyn HessianOp,
    g: &[f64],
    rtol: f64,
    max_iters: usize,
) -> NewtonDirection {
    let gnorm = norm(g);
    let mut d = vec![0.0; g.len()];
    let mut r: Vec<f64> = g.iter().map(|x| -x).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut cg_iters = 0;
    while cg_iters < max_iters && rr.sqrt() > rtol * gnorm {
        let hp = hess.apply(&p);
        cg_iters += 1;
        let curv = dot(&p, &hp);
        if curv.is_nan() || curv <= 0.0 {
            break;
        }
        let alpha = rr / curv;
        axpy(alpha, &p, &mut d);
        axpy(-alpha, &hp, &mut r);
        let rr_next = dot(&r, &r);
        let beta = rr_next / rr;
        rr = rr_next;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
    }
    let slope = dot(&d, g);
    let fell_back = slope.is_nan() || slope >= 0.0;
    if fell_back {
        d = g.iter().map(|x| -x).collect();
    }
    NewtonDirection {
        direction: d,
        cg_iters,
        fell_back,
    }
}

/// Inexact Newton with Armijo backtracking.
pub fn newton_cg_step<'s>(
    problem: &dyn Problem,
    state: &'s mut SolverState,
    config: &SolverConfig,
) -> IterationSnapshot<'s> {
    let hess = problem.hessian(&state.w, &Batch::Full);
    let nd = newton_direction(&*hess, &state.gradient, config.cg_rtol, config.cg_max_iters);
    let rows_touched = nd.cg_iters * hess.rows();
    drop(hess);

    let slope = dot(&state.gradient, &nd.direction);
    let (accepted, alpha) = match armijo_backtrack(problem, &state.w, &nd.direction, slope) {
        Some((alpha, step, dec)) => {
            axpy(1.0, &step, &mut state.w);
            state.objective -= dec;
            state.gradient = problem.gradient(&state.w, &Batch::Full);
            (true, alpha)
        }
        None => (false, 0.0),
    };
    state.rejections = if accepted { 0 } else { state.rejections + 1 };
    state.iter += 1;
    state.snapshot(StepReport {
        accepted,
        radius_or_step: alpha,
        cg_iters: nd.cg_iters,
        rows_touched,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::Quadratic;
    use crate::solvers::{Method, SolverState};

    #[test]
    fn exact_on_isotropic_quadratic() {
        let q = Quadratic::isotropic(2);
        let cfg = SolverConfig::new(Method::NewtonCg);
        let mut state = SolverState::new(&q, &cfg);
        state.w = vec![3.0, 4.0];
        state.gradient = vec![3.0, 4.0];
        state.objective = 12.5;
        let snap = newton_cg_step(&q, &mut state, &cfg);
        assert!(snap.step_accepted);
        assert_eq!(snap.cg_iters_used, 1);
        assert_eq!(snap.tr_radius_or_step, 1.0);
        assert_eq!(snap.w, &[0.0, 0.0]);
    }

    #[test]
    fn negative_definite_oracle_falls_back_to_steepest_descent() {
        let minus_identity = |v: &[f64]| v.iter().map(|x| -x).collect::<Vec<_>>();
        let g = [0.5, -2.0, 1.0];
        let nd = newton_direction(&minus_identity, &g, 0.1, 25);
        assert!(nd.fell_back);
        assert_eq!(nd.direction, vec![-0.5, 2.0, -1.0]);
    }

    #[test]
    fn line_search_failure_rejects() {
        // a problem whose decrease is never positive
        struct Flat;
        impl Problem for Flat {
            fn dim(&self) -> usize {
                1
            }
            fn n_rows(&self) -> usize {
                0
            }
            fn objective(&self, _: &[f64], _: &Batch) -> f64 {
                0.0
            }
            fn gradient(&self, _: &[f64], _: &Batch) -> Vec<f64> {
                vec![1.0]
            }
            fn hessian<'p>(&'p self, _: &[f64], _: &Batch) -> Box<dyn HessianOp + 'p> {
                Box::new(|v: &[f64]| v.to_vec())
            }
        }
        let cfg = SolverConfig::new(Method::NewtonCg);
        let mut state = SolverState::new(&Flat, &cfg);
        let snap = newton_cg_step(&Flat, &mut state, &cfg);
        assert!(!snap.step_accepted);
        assert_eq!(snap.w, &[0.0]);
        assert_eq!(state.rejections, 1);
    }
}
