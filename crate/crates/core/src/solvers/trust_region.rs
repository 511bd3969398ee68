//! Trust-region subproblem
//!
//! ```text
//! minimize  m(s) = g^T s + ½ s^T H s   subject to ‖s‖ ≤ Δ
//! ```
//!
//! solved by truncated conjugate gradients in its Lanczos form. While the
//! iterates stay inside the ball and the Krylov matrix is positive definite
//! this reproduces the Steihaug-Toint CG iterates exactly. Once the boundary
//! is reached or negative curvature shows up, the iteration keeps extending
//! the Krylov space and solves the small tridiagonal subproblem exactly on
//! the boundary, instead of stopping at the first crossing point. The
//! returned step is therefore the exact minimizer over `K_k(H, g) ∩ ball`,
//! which always contains the Cauchy point.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::linalg::{axpy, dot, norm, scale};
use crate::problems::HessianOp;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CgStatus {
    /// Residual `‖Hs + g‖ ≤ rtol·‖g‖` with `s` strictly inside the region.
    Interior,
    /// Solution on the boundary; the Krylov matrix was positive definite.
    Boundary,
    /// Solution on the boundary; non-positive curvature was encountered.
    NegativeCurvature,
    /// Iteration cap hit before the interior residual test passed.
    MaxIters,
}

#[derive(Clone, Debug)]
pub struct SubproblemSolution {
    pub step: Vec<f64>,
    pub status: CgStatus,
    /// `m(step)`, always ≤ 0.
    pub model_value: f64,
    /// Hessian-vector products spent.
    pub iterations: usize,
}

impl SubproblemSolution {
    pub fn on_boundary(&self) -> bool {
        matches!(
            self.status,
            CgStatus::Boundary | CgStatus::NegativeCurvature
        )
    }
}

/// Truncated CG for the trust-region subproblem. See the module docs.
///
/// Starts from `s = 0`. Stops when the residual of the current subspace
/// solution drops below `rtol·‖g‖`, when the Krylov space stops growing,
/// or after `max_iters` Hessian products.
pub fn steihaug_cg(
    hess: &dyn HessianOp,
    g: &[f64],
    radius: f64,
    rtol: f64,
    max_iters: usize,
) -> SubproblemSolution {
    assert!(radius > 0.0, "trust-region radius must be positive");
    let gamma = norm(g);
    if gamma == 0.0 || max_iters == 0 {
        return SubproblemSolution {
            step: vec![0.0; g.len()],
            status: if gamma == 0.0 {
                CgStatus::Interior
            } else {
                CgStatus::MaxIters
            },
            model_value: 0.0,
            iterations: 0,
        };
    }

    let mut basis: Vec<Vec<f64>> = vec![g.iter().map(|x| x / gamma).collect()];
    let mut diag: Vec<f64> = Vec::new();
    let mut offdiag: Vec<f64> = Vec::new();
    let mut t_scale = 0.0_f64;
    let mut iterations = 0;
    let mut solution = TridiagonalSolution::default();
    let mut finished = false;

    for k in 0..max_iters {
        let q = &basis[k];
        let mut u = hess.apply(q);
        iterations += 1;
        let alpha = dot(q, &u);
        axpy(-alpha, q, &mut u);
        if k > 0 {
            axpy(-offdiag[k - 1], &basis[k - 1], &mut u);
        }
        // full reorthogonalization, two passes
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &u);
                axpy(-c, b, &mut u);
            }
        }
        let beta = norm(&u);
        diag.push(alpha);
        t_scale = t_scale.max(alpha.abs() + beta + offdiag.last().map_or(0.0, |b: &f64| b.abs()));

        solution = solve_tridiagonal(&diag, &offdiag, gamma, radius);
        let residual = beta * solution.h.last().map_or(0.0, |h| h.abs());
        let exhausted = beta <= 1e-13 * t_scale || u.len() == basis.len();
        if residual <= rtol * gamma || exhausted {
            finished = true;
            break;
        }
        if k + 1 < max_iters {
            scale(1.0 / beta, &mut u);
            basis.push(u);
            offdiag.push(beta);
        }
    }

    let mut h = solution.h;
    if solution.on_boundary {
        let hn = norm(&h);
        if hn > 0.0 {
            scale(radius / hn, &mut h);
        }
    }
    let mut step = vec![0.0; g.len()];
    for (hj, qj) in h.iter().zip(&basis) {
        axpy(*hj, qj, &mut step);
    }
    let sn = norm(&step);
    if sn > radius || (solution.on_boundary && sn > 0.0) {
        scale(radius / sn, &mut step);
        while norm(&step) > radius {
            scale(1.0 - f64::EPSILON, &mut step);
        }
    }

    let status = if solution.on_boundary {
        if solution.min_eig <= 0.0 {
            CgStatus::NegativeCurvature
        } else {
            CgStatus::Boundary
        }
    } else if finished {
        CgStatus::Interior
    } else {
        CgStatus::MaxIters
    };
    SubproblemSolution {
        model_value: tridiagonal_model(&diag, &offdiag, gamma, &h).min(0.0),
        step,
        status,
        iterations,
    }
}

/// `γ h_0 + ½ h^T T h`.
fn tridiagonal_model(diag: &[f64], offdiag: &[f64], gamma: f64, h: &[f64]) -> f64 {
    let mut quad = 0.0;
    for (i, &hi) in h.iter().enumerate() {
        let mut th = diag[i] * hi;
        if i > 0 {
            th += offdiag[i - 1] * h[i - 1];
        }
        if i + 1 < h.len() {
            th += offdiag[i] * h[i + 1];
        }
        quad += hi * th;
    }
    gamma * h.first().copied().unwrap_or(0.0) + 0.5 * quad
}

#[derive(Clone, Debug, Default)]
struct TridiagonalSolution {
    h: Vec<f64>,
    on_boundary: bool,
    min_eig: f64,
}

/// Exact solution of `min γ e₁^T h + ½ h^T T h, ‖h‖ ≤ Δ` for a small
/// symmetric tridiagonal `T`, via its eigendecomposition and a safeguarded
/// Newton iteration on the secular equation `1/‖h(μ)‖ = 1/Δ`.
fn solve_tridiagonal(
    diag: &[f64],
    offdiag: &[f64],
    gamma: f64,
    radius: f64,
) -> TridiagonalSolution {
    let k = diag.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = diag[i];
        if i + 1 < k {
            t[(i, i + 1)] = offdiag[i];
            t[(i + 1, i)] = offdiag[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let lambdas: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let coef: Vec<f64> = (0..k).map(|j| gamma * eig.eigenvectors[(0, j)]).collect();
    let (jmin, min_eig) =
        lambdas
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |acc, (j, l)| if l < acc.1 { (j, l) } else { acc },
            );

    let assemble = |weights: &dyn Fn(usize) -> f64| -> Vec<f64> {
        let mut h = vec![0.0; k];
        for j in 0..k {
            let wj = weights(j);
            if wj != 0.0 {
                for i in 0..k {
                    h[i] += wj * eig.eigenvectors[(i, j)];
                }
            }
        }
        h
    };
    let phi = |mu: f64| -> f64 {
        coef.iter()
            .zip(&lambdas)
            .map(|(c, l)| (c / (l + mu)).powi(2))
            .sum::<f64>()
            .sqrt()
    };

    if min_eig > 0.0 && phi(0.0) <= radius {
        return TridiagonalSolution {
            h: assemble(&|j| -coef[j] / lambdas[j]),
            on_boundary: false,
            min_eig,
        };
    }

    let lam_scale = lambdas
        .iter()
        .fold(0.0_f64, |m, l| m.max(l.abs()))
        .max(f64::MIN_POSITIVE);
    let c_norm = coef.iter().map(|c| c * c).sum::<f64>().sqrt();
    let lo = (-min_eig).max(0.0);

    // Hard case: g has (numerically) no component along the lowest
    // eigenvector(s) and the shifted solution falls short of the boundary.
    if min_eig <= 0.0 {
        let in_min_group = |j: usize| lambdas[j] - min_eig <= 1e-12 * lam_scale;
        let degenerate = (0..k)
            .filter(|&j| in_min_group(j))
            .all(|j| coef[j].abs() <= 1e-12 * c_norm);
        if degenerate {
            let rest = |j: usize| {
                if in_min_group(j) {
                    0.0
                } else {
                    -coef[j] / (lambdas[j] + lo)
                }
            };
            let mut h = assemble(&rest);
            let hn = norm(&h);
            if hn <= radius {
                let tau = (radius * radius - hn * hn).max(0.0).sqrt();
                for i in 0..k {
                    h[i] += tau * eig.eigenvectors[(i, jmin)];
                }
                return TridiagonalSolution {
                    h,
                    on_boundary: true,
                    min_eig,
                };
            }
        }
    }

    // ψ(μ) = 1/φ(μ) − 1/Δ is increasing and concave on (lo, ∞).
    let mut a = lo;
    let mut b = (c_norm / radius - min_eig).max(lo) * (1.0 + 1e-12) + f64::MIN_POSITIVE;
    let mut mu = b;
    for _ in 0..200 {
        let p = phi(mu);
        let psi = 1.0 / p - 1.0 / radius;
        if psi.abs() <= 1e-15 / radius {
            break;
        }
        if psi < 0.0 {
            a = mu;
        } else {
            b = mu;
        }
        let dphi_num: f64 = coef
            .iter()
            .zip(&lambdas)
            .map(|(c, l)| c * c / (l + mu).powi(3))
            .sum();
        let dpsi = dphi_num / (p * p * p);
        let mut next = mu - psi / dpsi;
        if !(next > a && next < b) || !next.is_finite() {
            next = 0.5 * (a + b);
        }
        if next == mu || (b - a) <= 4.0 * f64::EPSILON * b.abs() {
            break;
        }
        mu = next;
    }
    TridiagonalSolution {
        h: assemble(&|j| -coef[j] / (lambdas[j] + mu)),
        on_boundary: true,
        min_eig,
    }
}
