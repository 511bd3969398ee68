use super::{Batch, HessianOp, Problem};

/// `F(w) = ½ Σ_j a_j (w_j − c_j)²` with a positive diagonal `a`.
///
/// Data-free; batches are ignored. Useful as an analytic test problem.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadratic {
    diag: Vec<f64>,
    center: Vec<f64>,
}

impl Quadratic {
    pub fn new(diag: Vec<f64>, center: Vec<f64>) -> Self {
        assert_eq!(diag.len(), center.len(), "diag and center lengths differ");
        Quadratic { diag, center }
    }

    /// `½‖w‖²` in `dim` dimensions.
    pub fn isotropic(dim: usize) -> Self {
        Quadratic::new(vec![1.0; dim], vec![0.0; dim])
    }
}

impl Problem for Quadratic {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn n_rows(&self) -> usize {
        0
    }

    fn objective(&self, w: &[f64], _batch: &Batch) -> f64 {
        0.5 * self
            .diag
            .iter()
            .zip(&self.center)
            .zip(w)
            .map(|((a, c), x)| a * (x - c) * (x - c))
            .sum::<f64>()
    }

    fn gradient(&self, w: &[f64], _batch: &Batch) -> Vec<f64> {
        self.diag
            .iter()
            .zip(&self.center)
            .zip(w)
            .map(|((a, c), x)| a * (x - c))
            .collect()
    }

    fn hessian<'p>(&'p self, _w: &[f64], _batch: &Batch) -> Box<dyn HessianOp + 'p> {
        Box::new(move |v: &[f64]| self.diag.iter().zip(v).map(|(a, x)| a * x).collect())
    }

    fn decrease(&self, w: &[f64], step: &[f64]) -> f64 {
        -self
            .diag
            .iter()
            .zip(&self.center)
            .zip(w.iter().zip(step))
            .map(|((a, c), (x, s))| a * s * ((x - c) + 0.5 * s))
            .sum::<f64>()
    }
}
