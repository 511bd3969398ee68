#![allow(dead_code)]

use std::path::{Path, PathBuf};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

/// Copies fixtures into a fresh directory, so that F* cache files land
/// there rather than in the source tree.
pub fn staged(names: &[&str]) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for n in names {
        std::fs::copy(fixture(n), dir.path().join(n)).unwrap();
    }
    dir
}

use rand::Rng;
use rand_distr::StandardNormal;
use s2ml::data::{Dataset, Label, SparseMatrix};
use s2ml::problems::{ProblemConfig, ProblemKind};

/// Small random problem: n ≤ 60 rows, d ≤ 12 columns, λ ∈ {0, 0.1, 1},
/// roughly 40% zero entries, optional bias.
pub fn random_instance<R: Rng>(rng: &mut R, kind: ProblemKind) -> (Dataset, ProblemConfig) {
    let n = rng.gen_range(1..=60);
    let d = rng.gen_range(1..=12);
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let mut row = Vec::new();
        for j in 0..d {
            if rng.gen_bool(0.6) {
                row.push((j, rng.sample::<f64, _>(StandardNormal)));
            }
        }
        rows.push(row);
    }
    let labels = (0..n)
        .map(|_| {
            if rng.gen_bool(0.5) {
                Label::Positive
            } else {
                Label::Negative
            }
        })
        .collect();
    let ds = Dataset::new(SparseMatrix::from_sorted_rows(d, &rows).unwrap(), labels).unwrap();
    let lambda = [0.0, 0.1, 1.0][rng.gen_range(0..3)];
    let config = ProblemConfig {
        add_bias: rng.gen_bool(0.3),
        ..ProblemConfig::new(kind, lambda)
    };
    (ds, config)
}

pub fn normal_vec<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}
