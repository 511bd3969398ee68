//! Seeded synthetic binary classification data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Dataset, Label, SparseMatrix};

/// Sparse Gaussian features with labels drawn from a logistic model.
///
/// Each entry is present with probability `density` (every row keeps at
/// least one entry) and drawn from N(0, 1). A hidden weight vector is scaled
/// so that margins have standard deviation about 2, and `y = +1` with
/// probability `σ(margin)`, so the classes overlap and the logistic optimum
/// is finite even without regularization.
pub fn logistic_dataset(n_rows: usize, n_cols: usize, density: f64, seed: u64) -> Dataset {
    assert!(n_cols > 0, "need at least one feature");
    assert!(
        density > 0.0 && density <= 1.0,
        "density must lie in (0, 1]"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 2.0 / (density * n_cols as f64).sqrt();
    let truth: Vec<f64> = (0..n_cols)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect();

    let mut rows = Vec::with_capacity(n_rows);
    let mut labels = Vec::with_capacity(n_rows);
    for _ in 0..n_rows {
        let mut row = Vec::new();
        for j in 0..n_cols {
            if density >= 1.0 || rng.gen_bool(density) {
                row.push((j, rng.sample(StandardNormal)));
            }
        }
        if row.is_empty() {
            row.push((rng.gen_range(0..n_cols), rng.sample(StandardNormal)));
        }
        let margin: f64 = row.iter().map(|&(j, x)| truth[j] * x).sum();
        let p = 1.0 / (1.0 + (-margin).exp());
        labels.push(if rng.gen_bool(p) {
            Label::Positive
        } else {
            Label::Negative
        });
        rows.push(row);
    }
    let features = SparseMatrix::from_sorted_rows(n_cols, &rows).expect("rows are sorted");
    Dataset::new(features, labels).expect("one label per row")
}
