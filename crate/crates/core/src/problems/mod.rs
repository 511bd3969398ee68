//! Objective providers for L2-regularized empirical risk minimization:
//!
//! ```text
//! F(w) = (1/|B|) Σ_{i∈B} ℓ(y_i·w^T x_i) + (λ/2)‖w‖²
//! ```
//!
//! A [`Problem`] hands out values, gradients and Hessian-vector products
//! without ever forming the Hessian. Each loss lives in its own file and
//! only has to implement [`Loss`].

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::data::Dataset;
use crate::parallel::Reduction;

mod linear;
mod logistic;
mod quadratic;
mod squared_hinge;

pub use linear::LinearProblem;
pub use logistic::Logistic;
pub use quadratic::Quadratic;
pub use squared_hinge::SquaredHinge;

#[derive(Debug, Error, PartialEq)]
pub enum ProblemError {
    #[error("lambda must be finite and non-negative, got {0}")]
    InvalidLambda(f64),
    #[error("unknown problem kind {0:?} (expected logistic or svm-l2)")]
    UnknownKind(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid batch: {0}")]
    Batch(String),
    #[error("dataset has no rows")]
    Empty,
}

/// Per-example loss as a function of the margin `m = y·w^T x`.
pub trait Loss: Send + Sync {
    fn value(&self, margin: f64) -> f64;
    /// dℓ/dm.
    fn derivative(&self, margin: f64) -> f64;
    /// d²ℓ/dm², or the generalized second derivative at a kink.
    fn curvature(&self, margin: f64) -> f64;
    /// `ℓ(m) − ℓ(m + δ)`. Override when the difference can be formed without
    /// cancellation; near an optimum both values agree to many digits.
    fn decrease(&self, margin: f64, delta: f64) -> f64 {
        self.value(margin) - self.value(margin + delta)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Logistic,
    SvmL2,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Logistic => "logistic",
            ProblemKind::SvmL2 => "svm-l2",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "logistic" => Ok(ProblemKind::Logistic),
            "svm-l2" => Ok(ProblemKind::SvmL2),
            other => Err(ProblemError::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProblemConfig {
    pub kind: ProblemKind,
    /// L2 weight λ. The bias coordinate is never regularized.
    pub lambda: f64,
    /// Append a constant-1 virtual feature.
    pub add_bias: bool,
}

impl ProblemConfig {
    pub fn new(kind: ProblemKind, lambda: f64) -> Self {
        ProblemConfig {
            kind,
            lambda,
            add_bias: false,
        }
    }

    /// λ = 1/n, the default when none is given.
    pub fn default_lambda(n_rows: usize) -> f64 {
        1.0 / n_rows.max(1) as f64
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(ProblemError::InvalidLambda(self.lambda));
        }
        Ok(())
    }

    /// Length of the weight vector for data with `n_cols` features.
    pub fn weight_dim(&self, n_cols: usize) -> usize {
        n_cols + usize::from(self.add_bias)
    }
}

/// Rows an evaluation runs over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Batch {
    Full,
    /// Sorted, distinct, non-empty row indices.
    Rows(Vec<usize>),
}

impl Batch {
    pub fn rows(indices: Vec<usize>, n_rows: usize) -> Result<Self, ProblemError> {
        if indices.is_empty() {
            return Err(ProblemError::Batch("empty batch".into()));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ProblemError::Batch(
                "indices must be sorted and distinct".into(),
            ));
        }
        if indices[indices.len() - 1] >= n_rows {
            return Err(ProblemError::Batch(format!(
                "row index out of range 0..{n_rows}"
            )));
        }
        Ok(Batch::Rows(indices))
    }

    pub fn len(&self, n_rows: usize) -> usize {
        match self {
            Batch::Full => n_rows,
            Batch::Rows(r) => r.len(),
        }
    }

    pub fn is_empty(&self, n_rows: usize) -> bool {
        self.len(n_rows) == 0
    }

    /// Data row of the `k`-th batch element.
    #[inline]
    pub fn row(&self, k: usize) -> usize {
        match self {
            Batch::Full => k,
            Batch::Rows(r) => r[k],
        }
    }
}

/// A Hessian (or generalized Hessian) frozen at one point.
pub trait HessianOp: Sync {
    fn apply(&self, v: &[f64]) -> Vec<f64>;

    /// Data rows processed by one [`apply`](HessianOp::apply). Cost proxy.
    fn rows(&self) -> usize {
        0
    }
}

impl<F> HessianOp for F
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        self(v)
    }
}

/// Objective, gradient and curvature oracle. Solvers only see this trait.
pub trait Problem: Sync {
    fn dim(&self) -> usize;

    /// Rows available for sub-sampling; 0 for problems without data.
    fn n_rows(&self) -> usize;

    fn objective(&self, w: &[f64], batch: &Batch) -> f64;

    fn gradient(&self, w: &[f64], batch: &Batch) -> Vec<f64>;

    fn objective_and_gradient(&self, w: &[f64], batch: &Batch) -> (f64, Vec<f64>) {
        (self.objective(w, batch), self.gradient(w, batch))
    }

    fn hessian<'p>(&'p self, w: &[f64], batch: &Batch) -> Box<dyn HessianOp + 'p>;

    fn hess_vec(&self, w: &[f64], batch: &Batch, v: &[f64]) -> Vec<f64> {
        self.hessian(w, batch).apply(v)
    }

    /// `F(w) − F(w + step)` on full data.
    fn decrease(&self, w: &[f64], step: &[f64]) -> f64 {
        let moved: Vec<f64> = w.iter().zip(step).map(|(a, b)| a + b).collect();
        self.objective(w, &Batch::Full) - self.objective(&moved, &Batch::Full)
    }
}

/// Builds the linear-model problem selected by `config`.
pub fn linear_problem<'a>(
    config: &ProblemConfig,
    data: &'a Dataset,
    reduction: Reduction,
) -> Result<Box<dyn Problem + 'a>, ProblemError> {
    config.validate()?;
    Ok(match config.kind {
        ProblemKind::Logistic => Box::new(LinearProblem::new(Logistic, data, config, reduction)),
        ProblemKind::SvmL2 => Box::new(LinearProblem::new(SquaredHinge, data, config, reduction)),
    })
}

/// Fraction of rows where `sign(w^T x_i + b)` equals `y_i`, with sign(0) = +1.
///
/// `w` may be longer than the data's column count (absent features are zero)
/// but not shorter.
pub fn predict_accuracy(
    config: &ProblemConfig,
    data: &Dataset,
    w: &[f64],
) -> Result<f64, ProblemError> {
    let n_features = w
        .len()
        .checked_sub(usize::from(config.add_bias))
        .ok_or_else(|| {
            ProblemError::Dimension("weight vector shorter than the bias slot".into())
        })?;
    if data.n_cols() > n_features {
        return Err(ProblemError::Dimension(format!(
            "data has {} features, model has {}",
            data.n_cols(),
            n_features
        )));
    }
    if data.n_rows() == 0 {
        return Err(ProblemError::Empty);
    }
    let bias = if config.add_bias { w[n_features] } else { 0.0 };
    let x = data.features();
    let correct = (0..data.n_rows())
        .filter(|&i| {
            let score = x.row_dot(i, w) + bias;
            let pred = if score >= 0.0 { 1.0 } else { -1.0 };
            pred == data.labels()[i]
        })
        .count();
    Ok(correct as f64 / data.n_rows() as f64)
}
