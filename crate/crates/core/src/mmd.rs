//! Two-sample maximum mean discrepancy estimators.
//!
//! All double sums are evaluated row by row (rows in parallel) and the row
//! totals are combined with a fixed-shape pairwise reduction, so the result
//! does not depend on the number of worker threads.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::matrix::Points;

/// Radicands above this (negative) value are treated as rounding noise.
pub const NEGATIVE_RADICAND_TOLERANCE: f64 = -1e-12;

/// Pairwise (tree) summation in index order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 8;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

fn check_dims(xs: &Points, ys: &Points) -> Result<()> {
    if xs.dim() != ys.dim() {
        return Err(Error::DimensionMismatch { expected: xs.dim(), actual: ys.dim() });
    }
    Ok(())
}

/// Σ_i Σ_j k(a_i, b_j).
pub fn cross_sum<K: Kernel + ?Sized>(kernel: &K, a: &Points, b: &Points) -> f64 {
    let rows: Vec<f64> = (0..a.len())
        .into_par_iter()
        .map(|i| {
            let ai = a.row(i);
            b.rows().map(|bj| kernel.eval(ai, bj)).sum::<f64>()
        })
        .collect();
    pairwise_sum(&rows)
}

/// Σ_{i≠j} k(a_i, a_j), using symmetry of the kernel.
pub fn off_diagonal_sum<K: Kernel + ?Sized>(kernel: &K, a: &Points) -> f64 {
    let rows: Vec<f64> = (0..a.len())
        .into_par_iter()
        .map(|i| {
            let ai = a.row(i);
            (i + 1..a.len()).map(|j| kernel.eval(ai, a.row(j))).sum::<f64>()
        })
        .collect();
    2.0 * pairwise_sum(&rows)
}

/// Squared biased MMD between the empirical measures of `xs` and `ys`,
/// before clamping. May be slightly negative through rounding.
pub fn mmd_biased_sq<K: Kernel + ?Sized>(kernel: &K, xs: &Points, ys: &Points) -> Result<f64> {
    check_dims(xs, ys)?;
    BiasedReference::new(kernel, ys)?.biased_sq(xs)
}

/// A fixed second sample for repeated biased MMD computations; its
/// self-similarity term is computed once. Results are bitwise equal to
/// [`mmd_biased_sq`] / [`mmd_biased`].
pub struct BiasedReference<'a, K: ?Sized> {
    kernel: &'a K,
    ys: &'a Points,
    yy: f64,
}

impl<'a, K: Kernel + ?Sized> BiasedReference<'a, K> {
    pub fn new(kernel: &'a K, ys: &'a Points) -> Result<Self> {
        if ys.is_empty() {
            return Err(Error::TooFewObservations { required: 1, actual: 0 });
        }
        let n = ys.len() as f64;
        Ok(Self { kernel, ys, yy: cross_sum(kernel, ys, ys) / (n * n) })
    }

    pub fn biased_sq(&self, xs: &Points) -> Result<f64> {
        check_dims(xs, self.ys)?;
        if xs.is_empty() {
            return Err(Error::TooFewObservations { required: 1, actual: 0 });
        }
        let (m, n) = (xs.len() as f64, self.ys.len() as f64);
        let xx = cross_sum(self.kernel, xs, xs) / (m * m);
        let xy = cross_sum(self.kernel, xs, self.ys) / (m * n);
        Ok(xx + self.yy - 2.0 * xy)
    }

    pub fn biased(&self, xs: &Points) -> Result<f64> {
        sqrt_radicand(self.biased_sq(xs)?)
    }
}

/// Biased MMD (square-root form).
///
/// Radicands in `(-1e-12, 0)` are clamped to zero; anything more negative
/// indicates a kernel that is not positive definite and is reported as
/// [`Error::Numerical`].
pub fn mmd_biased<K: Kernel + ?Sized>(kernel: &K, xs: &Points, ys: &Points) -> Result<f64> {
    let radicand = mmd_biased_sq(kernel, xs, ys)?;
    sqrt_radicand(radicand)
}

pub(crate) fn sqrt_radicand(radicand: f64) -> Result<f64> {
    if radicand.is_nan() || radicand < NEGATIVE_RADICAND_TOLERANCE {
        return Err(Error::Numerical(format!("negative MMD radicand {radicand:e}")));
    }
    Ok(radicand.max(0.0).sqrt())
}

/// Equal-size samples paired by index: Λ_i = (x_i, y_i).
#[derive(Clone, Copy, Debug)]
pub struct PairedSample<'a> {
    xs: &'a Points,
    ys: &'a Points,
}

impl<'a> PairedSample<'a> {
    pub fn new(xs: &'a Points, ys: &'a Points) -> Result<Self> {
        check_dims(xs, ys)?;
        if xs.len() != ys.len() {
            return Err(Error::SampleSizeMismatch { expected: xs.len(), actual: ys.len() });
        }
        Ok(Self { xs, ys })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// h(Λ_i, Λ_j) = k(x_i,x_j) + k(y_i,y_j) - k(x_i,y_j) - k(x_j,y_i).
    #[inline]
    pub fn h<K: Kernel + ?Sized>(&self, kernel: &K, i: usize, j: usize) -> f64 {
        let (xi, yi, xj, yj) = (self.xs.row(i), self.ys.row(i), self.xs.row(j), self.ys.row(j));
        kernel.eval(xi, xj) + kernel.eval(yi, yj) - kernel.eval(xi, yj) - kernel.eval(xj, yi)
    }
}

/// Unbiased U-statistic estimate of the squared MMD:
/// `1/(m(m-1)) Σ_{i≠j} h(Λ_i, Λ_j)`. Can be negative.
pub fn mmd_unbiased_sq<K: Kernel + ?Sized>(kernel: &K, paired: &PairedSample<'_>) -> Result<f64> {
    let m = paired.len();
    if m < 2 {
        return Err(Error::TooFewObservations { required: 2, actual: m });
    }
    let rows: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|i| (i + 1..m).map(|j| paired.h(kernel, i, j)).sum::<f64>())
        .collect();
    let total = 2.0 * pairwise_sum(&rows);
    Ok(total / (m as f64 * (m as f64 - 1.0)))
}

/// max(0, value): distance-like view of a possibly negative estimate.
pub fn clamped(value: f64) -> f64 {
    value.max(0.0)
}
