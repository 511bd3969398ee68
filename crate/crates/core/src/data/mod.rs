//! Datasets in LIBSVM text format, held as CSR matrices.

mod libsvm;
mod sparse;
pub mod synthetic;

pub use libsvm::{load_dataset, parse_dataset, parse_libsvm_line, serialize_dataset, DataError};
pub use sparse::{CsrViolation, SparseMatrix};

/// Binary class label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Label::Negative => -1.0,
            Label::Positive => 1.0,
        }
    }

    pub fn from_sign(x: f64) -> Self {
        if x >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }
}

/// Feature matrix plus one ±1 label per row. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: SparseMatrix,
    labels: Vec<f64>,
}

impl Dataset {
    pub fn new(features: SparseMatrix, labels: Vec<Label>) -> Result<Self, DataError> {
        if labels.len() != features.n_rows() {
            return Err(DataError::Shape(format!(
                "{} labels for {} rows",
                labels.len(),
                features.n_rows()
            )));
        }
        Ok(Dataset {
            features,
            labels: labels.into_iter().map(Label::sign).collect(),
        })
    }

    pub fn features(&self) -> &SparseMatrix {
        &self.features
    }

    /// Labels as `±1.0`.
    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn label(&self, row: usize) -> Label {
        Label::from_sign(self.labels[row])
    }

    pub fn n_rows(&self) -> usize {
        self.features.n_rows()
    }

    pub fn n_cols(&self) -> usize {
        self.features.n_cols()
    }

    /// Same data with the column space widened to `n_cols` (never narrowed).
    pub fn with_n_cols(self, n_cols: usize) -> Self {
        if n_cols <= self.features.n_cols() {
            return self;
        }
        Dataset {
            features: self.features.widen(n_cols),
            labels: self.labels,
        }
    }
}
