//! Second-order solvers for L2-regularized linear classification.
//!
//! * [`data`]: LIBSVM parsing into CSR matrices.
//! * [`problems`]: objective / gradient / Hessian-vector oracles.
//! * [`solvers`]: TRON, STRON, Newton-CG and L-BFGS.
//! * [`harness`]: timed benchmark runs, traces and plots.
//! * [`cli`]: the `s2ml` command-line front end.

pub mod cli;
pub mod data;
pub mod harness;
pub mod parallel;
pub mod problems;
pub mod solvers;

mod linalg;
mod numfmt;
