//! Row-reduction kernels shared by the problem oracles.
//!
//! Every data pass in this crate is a reduction over row indices: a scalar
//! sum (objective), a dense accumulation (gradient, Hessian-vector product)
//! or an order-preserving map (margins). The [`Reduction`] mode picks how
//! the work is split:
//!
//! * [`Reduction::Sequential`]: one left-to-right loop on the calling thread.
//! * [`Reduction::Parallel`]: rayon work stealing. Fastest, but the shape of
//!   the summation tree depends on scheduling, so results can differ in the
//!   last bits between runs.
//! * [`Reduction::Deterministic`]: a fixed-shape pairwise tree with leaves of
//!   [`LEAF_ROWS`] rows. Halves run under `rayon::join` when the `parallel`
//!   feature is on, sequentially otherwise; the bits are the same either way
//!   and independent of the worker count.
//!
//! Without the `parallel` feature, `Parallel` behaves like `Sequential`.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Rows per leaf of the deterministic reduction tree.
pub const LEAF_ROWS: usize = 256;

#[cfg(feature = "parallel")]
const PAR_MIN_ROWS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Reduction {
    Sequential,
    Parallel,
    Deterministic,
}

impl Default for Reduction {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Reduction::Parallel
        } else {
            Reduction::Sequential
        }
    }
}

impl Reduction {
    pub fn from_flag(deterministic: bool) -> Self {
        if deterministic {
            Reduction::Deterministic
        } else {
            Reduction::default()
        }
    }
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(mut self, other: CompensatedSum) -> Self {
        self.add(other.sum);
        self.add(other.carry);
        self
    }

    pub fn value(self) -> f64 {
        self.sum + self.carry
    }
}

fn compensated_range<F: Fn(usize) -> f64>(lo: usize, hi: usize, f: &F) -> CompensatedSum {
    let mut acc = CompensatedSum::default();
    for i in lo..hi {
        acc.add(f(i));
    }
    acc
}

/// `Σ_{i < len} f(i)`, compensated so that averaging `len` equal terms
/// returns the term to within a couple of ulps.
pub fn sum_by<F>(mode: Reduction, len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    match mode {
        Reduction::Sequential => compensated_range(0, len, &f).value(),
        #[cfg(feature = "parallel")]
        Reduction::Parallel => (0..len)
            .into_par_iter()
            .with_min_len(PAR_MIN_ROWS)
            .fold(CompensatedSum::default, |mut acc, i| {
                acc.add(f(i));
                acc
            })
            .reduce(CompensatedSum::default, CompensatedSum::merge)
            .value(),
        #[cfg(not(feature = "parallel"))]
        Reduction::Parallel => compensated_range(0, len, &f).value(),
        Reduction::Deterministic => tree_sum(0, len, &f).value(),
    }
}

fn tree_sum<F>(lo: usize, hi: usize, f: &F) -> CompensatedSum
where
    F: Fn(usize) -> f64 + Sync,
{
    if hi - lo <= LEAF_ROWS {
        return compensated_range(lo, hi, f);
    }
    let mid = lo + (hi - lo) / 2;
    let (a, b) = join(|| tree_sum(lo, mid, f), || tree_sum(mid, hi, f));
    a.merge(b)
}

/// Dense accumulation: starts from `dim` zeros and lets `f(i, acc)` add row
/// `i`'s contribution into `acc`.
pub fn accumulate<F>(mode: Reduction, len: usize, dim: usize, f: F) -> Vec<f64>
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    match mode {
        Reduction::Sequential => {
            let mut acc = vec![0.0; dim];
            for i in 0..len {
                f(i, &mut acc);
            }
            acc
        }
        #[cfg(feature = "parallel")]
        Reduction::Parallel => (0..len)
            .into_par_iter()
            .with_min_len(PAR_MIN_ROWS)
            .fold(
                || vec![0.0; dim],
                |mut acc, i| {
                    f(i, &mut acc);
                    acc
                },
            )
            .reduce_with(|mut a, b| {
                add_into(&mut a, &b);
                a
            })
            .unwrap_or_else(|| vec![0.0; dim]),
        #[cfg(not(feature = "parallel"))]
        Reduction::Parallel => accumulate(Reduction::Sequential, len, dim, f),
        Reduction::Deterministic => tree_accumulate(0, len, dim, &f),
    }
}

fn tree_accumulate<F>(lo: usize, hi: usize, dim: usize, f: &F) -> Vec<f64>
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    if hi - lo <= LEAF_ROWS {
        let mut acc = vec![0.0; dim];
        for i in lo..hi {
            f(i, &mut acc);
        }
        return acc;
    }
    let mid = lo + (hi - lo) / 2;
    let (mut a, b) = join(
        || tree_accumulate(lo, mid, dim, f),
        || tree_accumulate(mid, hi, dim, f),
    );
    add_into(&mut a, &b);
    a
}

/// Order-preserving `(0..len).map(f).collect()`. Deterministic in every mode.
pub fn map_collect<T, F>(mode: Reduction, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    match mode {
        Reduction::Sequential => (0..len).map(f).collect(),
        #[cfg(feature = "parallel")]
        _ => (0..len)
            .into_par_iter()
            .with_min_len(PAR_MIN_ROWS)
            .map(&f)
            .collect(),
        #[cfg(not(feature = "parallel"))]
        _ => (0..len).map(f).collect(),
    }
}

fn add_into(a: &mut [f64], b: &[f64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

#[cfg(feature = "parallel")]
fn join<A, B, RA, RB>(a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    rayon::join(a, b)
}

#[cfg(not(feature = "parallel"))]
fn join<A, B, RA, RB>(a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    (a(), b())
}
