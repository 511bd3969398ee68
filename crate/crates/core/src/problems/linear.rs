use super::{Batch, HessianOp, Loss, Problem, ProblemConfig};
use crate::data::Dataset;
use crate::parallel::{accumulate, map_collect, sum_by, Reduction};

/// Linear model `w^T x (+ b)` with loss `L` and an L2 penalty on the
/// non-bias coordinates.
pub struct LinearProblem<'a, L> {
    loss: L,
    data: &'a Dataset,
    lambda: f64,
    bias: bool,
    reduction: Reduction,
}

impl<'a, L: Loss> LinearProblem<'a, L> {
    pub fn new(loss: L, data: &'a Dataset, config: &ProblemConfig, reduction: Reduction) -> Self {
        LinearProblem {
            loss,
            data,
            lambda: config.lambda,
            bias: config.add_bias,
            reduction,
        }
    }

    pub fn data(&self) -> &Dataset {
        self.data
    }

    fn n_features(&self) -> usize {
        self.data.n_cols()
    }

    /// `x_i^T v` with the virtual bias feature.
    #[inline]
    fn ext_dot(&self, row: usize, v: &[f64]) -> f64 {
        let s = self.data.features().row_dot(row, v);
        if self.bias {
            s + v[self.n_features()]
        } else {
            s
        }
    }

    #[inline]
    fn ext_axpy(&self, row: usize, alpha: f64, out: &mut [f64]) {
        self.data.features().row_axpy(row, alpha, out);
        if self.bias {
            out[self.n_features()] += alpha;
        }
    }

    #[inline]
    fn margin(&self, row: usize, w: &[f64]) -> f64 {
        self.data.labels()[row] * self.ext_dot(row, w)
    }

    fn regularizer(&self, w: &[f64]) -> f64 {
        let sq: f64 = w[..self.n_features()].iter().map(|x| x * x).sum();
        0.5 * self.lambda * sq
    }

    fn add_regularizer_grad(&self, w: &[f64], out: &mut [f64]) {
        for (o, x) in out.iter_mut().zip(&w[..self.n_features()]) {
            *o += self.lambda * x;
        }
    }

    fn gradient_from_margins(&self, w: &[f64], batch: &Batch, margins: &[f64]) -> Vec<f64> {
        let scale = 1.0 / margins.len() as f64;
        let labels = self.data.labels();
        let mut g = accumulate(self.reduction, margins.len(), self.dim(), |k, acc| {
            let row = batch.row(k);
            let c = self.loss.derivative(margins[k]) * labels[row];
            if c != 0.0 {
                self.ext_axpy(row, c * scale, acc);
            }
        });
        self.add_regularizer_grad(w, &mut g);
        g
    }
}

impl<L: Loss> Problem for LinearProblem<'_, L> {
    fn dim(&self) -> usize {
        self.n_features() + usize::from(self.bias)
    }

    fn n_rows(&self) -> usize {
        self.data.n_rows()
    }

    fn objective(&self, w: &[f64], batch: &Batch) -> f64 {
        debug_assert_eq!(w.len(), self.dim());
        let len = batch.len(self.n_rows());
        let total = sum_by(self.reduction, len, |k| {
            self.loss.value(self.margin(batch.row(k), w))
        });
        total / len as f64 + self.regularizer(w)
    }

    fn gradient(&self, w: &[f64], batch: &Batch) -> Vec<f64> {
        self.objective_and_gradient(w, batch).1
    }

    fn objective_and_gradient(&self, w: &[f64], batch: &Batch) -> (f64, Vec<f64>) {
        debug_assert_eq!(w.len(), self.dim());
        let len = batch.len(self.n_rows());
        let margins = map_collect(self.reduction, len, |k| self.margin(batch.row(k), w));
        let total = sum_by(self.reduction, len, |k| self.loss.value(margins[k]));
        let f = total / len as f64 + self.regularizer(w);
        (f, self.gradient_from_margins(w, batch, &margins))
    }

    fn hessian<'p>(&'p self, w: &[f64], batch: &Batch) -> Box<dyn HessianOp + 'p> {
        let len = batch.len(self.n_rows());
        let scale = 1.0 / len as f64;
        let weighted = map_collect(self.reduction, len, |k| {
            let row = batch.row(k);
            (row, self.loss.curvature(self.margin(row, w)) * scale)
        });
        let (rows, coefs) = weighted.into_iter().filter(|&(_, c)| c != 0.0).unzip();
        Box::new(LinearHessian {
            problem: self,
            rows,
            coefs,
        })
    }

    fn decrease(&self, w: &[f64], step: &[f64]) -> f64 {
        let n = self.n_rows();
        let labels = self.data.labels();
        let loss_part = sum_by(self.reduction, n, |i| {
            let m = labels[i] * self.ext_dot(i, w);
            let delta = labels[i] * self.ext_dot(i, step);
            self.loss.decrease(m, delta)
        });
        let d = self.n_features();
        let ws: f64 = w[..d].iter().zip(&step[..d]).map(|(a, b)| a * b).sum();
        let ss: f64 = step[..d].iter().map(|x| x * x).sum();
        loss_part / n as f64 - self.lambda * (ws + 0.5 * ss)
    }
}

/// `v ↦ λv + Σ_k c_k (x_k^T v) x_k` over rows with non-zero curvature.
struct LinearHessian<'p, 'a, L> {
    problem: &'p LinearProblem<'a, L>,
    rows: Vec<usize>,
    coefs: Vec<f64>,
}

impl<L: Loss> HessianOp for LinearHessian<'_, '_, L> {
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let p = self.problem;
        let mut out = accumulate(p.reduction, self.rows.len(), p.dim(), |k, acc| {
            let row = self.rows[k];
            let t = self.coefs[k] * p.ext_dot(row, v);
            if t != 0.0 {
                p.ext_axpy(row, t, acc);
            }
        });
        p.add_regularizer_grad(v, &mut out);
        out
    }

    fn rows(&self) -> usize {
        self.rows.len()
    }
}
