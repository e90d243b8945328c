//! Empirical copula transform.
//!
//! Each coordinate is replaced by its within-column rank divided by `m`,
//! where the rank of `x` is the number of column entries `<= x`. Tied values
//! therefore all receive the largest rank of their tie block.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{Points, SampleMatrix};
use crate::rng;

/// Number of elements of `column` that are `<= x`.
pub fn rank(x: f64, column: &[f64]) -> usize {
    column.iter().filter(|&&v| v <= x).count()
}

/// Ranks of every entry of `column` under the `<=` convention, in O(m log m).
pub fn column_ranks(column: &[f64]) -> Vec<usize> {
    let m = column.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| column[a].total_cmp(&column[b]));
    let mut ranks = vec![0; m];
    let mut start = 0;
    while start < m {
        let value = column[order[start]];
        let mut end = start + 1;
        while end < m && column[order[end]] == value {
            end += 1;
        }
        for &i in &order[start..end] {
            ranks[i] = end;
        }
        start = end;
    }
    ranks
}

/// Seeded tie-breaking noise added before ranking.
///
/// Each column receives `magnitude * gap * u` with `u ~ U[0,1)`, where `gap`
/// is the smallest positive difference between distinct values of the column.
/// With `magnitude <= 1` only ties are reordered.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jitter {
    pub magnitude: f64,
    pub seed: u64,
}

impl Jitter {
    pub fn new(magnitude: f64, seed: u64) -> Result<Self> {
        if !(magnitude.is_finite() && magnitude > 0.0) {
            return Err(Error::InvalidArgument(format!("jitter magnitude must be positive, got {magnitude}")));
        }
        Ok(Self { magnitude, seed })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CopulaOptions {
    pub jitter: Option<Jitter>,
}

/// The empirical copula of a sample: an `m x d` grid with entries in
/// `{1/m, ..., 1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CopulaSample {
    points: Points,
}

impl CopulaSample {
    pub fn m(&self) -> usize {
        self.points.len()
    }

    pub fn d(&self) -> usize {
        self.points.dim()
    }

    pub fn points(&self) -> &Points {
        &self.points
    }

    pub fn into_points(self) -> Points {
        self.points
    }
}

pub fn empirical_copula_transform(sample: &SampleMatrix) -> Result<CopulaSample> {
    empirical_copula_transform_with(sample, &CopulaOptions::default())
}

pub fn empirical_copula_transform_with(sample: &SampleMatrix, options: &CopulaOptions) -> Result<CopulaSample> {
    let (m, d) = (sample.m(), sample.d());
    if m < 2 {
        return Err(Error::TooFewObservations { required: 2, actual: m });
    }
    let mut columns: Vec<Vec<f64>> = (0..d).map(|j| sample.column(j)).collect();
    if let Some(jitter) = options.jitter {
        apply_jitter(&mut columns, jitter);
    }
    let ranked: Vec<Vec<usize>> = columns.par_iter().map(|c| column_ranks(c)).collect();
    let scale = m as f64;
    let mut data = Vec::with_capacity(m * d);
    for i in 0..m {
        data.extend(ranked.iter().map(|r| r[i] as f64 / scale));
    }
    Ok(CopulaSample { points: Points::new(data, d)? })
}

/// Applies `jitter` to every column of `sample` once, as preprocessing.
///
/// Prefer this over [`CopulaOptions::jitter`] when many submatrices of one
/// table are estimated: a column then carries the same noise wherever it
/// appears, so a column paired with itself stays comonotone.
pub fn jitter_sample(sample: &SampleMatrix, jitter: Jitter) -> Result<SampleMatrix> {
    let mut columns: Vec<Vec<f64>> = (0..sample.d()).map(|j| sample.column(j)).collect();
    apply_jitter(&mut columns, jitter);
    SampleMatrix::with_names(Points::from_columns(&columns)?, sample.column_names().map(<[String]>::to_vec))
}

fn apply_jitter(columns: &mut [Vec<f64>], jitter: Jitter) {
    let mut rng = rng::stream(jitter.seed, rng::STREAM_JITTER);
    for column in columns.iter_mut() {
        let mut sorted = column.clone();
        sorted.sort_by(f64::total_cmp);
        let gap = sorted
            .windows(2)
            .map(|w| w[1] - w[0])
            .filter(|&g| g > 0.0)
            .fold(f64::INFINITY, f64::min);
        let gap = if gap.is_finite() { gap } else { 1.0 };
        for v in column.iter_mut() {
            *v += jitter.magnitude * gap * rng.gen::<f64>();
        }
    }
}

/// Inverts the tail bound `2d exp(-2 m ε² / d) = delta` for ε.
pub fn dkw_epsilon(m: usize, d: usize, delta: f64) -> Result<f64> {
    if m == 0 || d == 0 {
        return Err(Error::InvalidArgument("m and d must be positive".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0,1), got {delta}")));
    }
    let (m, d) = (m as f64, d as f64);
    Ok((d / (2.0 * m) * (2.0 * d / delta).ln()).sqrt())
}

/// `2d exp(-2 m ε² / d)`: probability bound on the sup-norm deviation of the
/// empirical copula transform exceeding ε.
pub fn dkw_tail_bound(m: usize, d: usize, epsilon: f64) -> f64 {
    let (m, d) = (m as f64, d as f64);
    2.0 * d * (-2.0 * m * epsilon * epsilon / d).exp()
}

/// Kolmogorov distance between the empirical cdf of `column` and `cdf`.
pub fn ks_deviation(column: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = column.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    let mut sup = 0.0f64;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let f = cdf(x);
        // left limit of the ecdf is i/m, value at x is j/m
        sup = sup.max((j as f64 / m - f).abs()).max((f - i as f64 / m).abs());
        i = j;
    }
    sup
}

/// sup_x ||F(x) - F̂(x)||₂ for a sample with known marginal cdfs.
///
/// The supremum separates over coordinates, so this is the Euclidean norm of
/// the per-column Kolmogorov distances.
pub fn sup_deviation(sample: &SampleMatrix, cdfs: &[&dyn Fn(f64) -> f64]) -> Result<f64> {
    if cdfs.len() != sample.d() {
        return Err(Error::DimensionMismatch { expected: sample.d(), actual: cdfs.len() });
    }
    Ok(cdfs
        .iter()
        .enumerate()
        .map(|(j, f)| ks_deviation(&sample.column(j), f).powi(2))
        .sum::<f64>()
        .sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rank_examples() {
        assert_eq!(rank(3.2, &[3.2, -1.0, 7.0]), 2);
        assert_eq!(rank(-5.0, &[3.2, -1.0, 7.0]), 0);
        assert_eq!(rank(4.0, &[4.0, 4.0, 1.0]), 3);
    }

    #[test]
    fn transform_examples() {
        let x = SampleMatrix::from_rows(&[[3.2], [-1.0], [7.0]]).unwrap();
        let z = empirical_copula_transform(&x).unwrap();
        assert_eq!(z.points().as_slice(), &[2.0 / 3.0, 1.0 / 3.0, 1.0]);

        let sorted = SampleMatrix::from_columns(&[vec![-2.0, 0.5, 1.0, 9.0]]).unwrap();
        let z = empirical_copula_transform(&sorted).unwrap();
        assert_eq!(z.points().as_slice(), &[0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn ties_take_the_maximal_rank() {
        let x = SampleMatrix::from_columns(&[vec![4.0, 4.0, 1.0, 4.0]]).unwrap();
        let z = empirical_copula_transform(&x).unwrap();
        assert_eq!(z.points().as_slice(), &[1.0, 1.0, 0.25, 1.0]);
    }

    #[test]
    fn jitter_breaks_ties_only() {
        let x = SampleMatrix::from_columns(&[vec![4.0, 4.0, 1.0, 4.0, 2.5, 1.0]]).unwrap();
        let opts = CopulaOptions { jitter: Some(Jitter::new(0.5, 3).unwrap()) };
        let z = empirical_copula_transform_with(&x, &opts).unwrap();
        let mut col = z.points().column(0);
        // the untied value keeps its rank, tied blocks keep their rank ranges
        assert_eq!(col[4], 3.0 / 6.0);
        assert!(col[2] <= 2.0 / 6.0 && col[5] <= 2.0 / 6.0);
        assert!([0, 1, 3].iter().all(|&i| col[i] >= 4.0 / 6.0));
        col.sort_by(f64::total_cmp);
        assert_eq!(col, (1..=6).map(|i| i as f64 / 6.0).collect::<Vec<_>>());
        assert_eq!(z, empirical_copula_transform_with(&x, &opts).unwrap());
        assert!(Jitter::new(0.0, 1).is_err());
    }

    #[test]
    fn transform_requires_two_rows() {
        // SampleMatrix already refuses m < 2; the transform re-checks for
        // hand-built inputs.
        assert!(SampleMatrix::from_rows(&[[1.0]]).is_err());
    }

    #[test]
    fn dkw_epsilon_examples() {
        let eps = dkw_epsilon(1000, 1, 0.05).unwrap();
        assert!((eps - (40f64.ln() / 2000.0).sqrt()).abs() < 1e-15);
        assert!((eps - 0.042_948).abs() < 1e-5);
        assert!((dkw_tail_bound(1000, 1, eps) - 0.05).abs() < 1e-14);
        assert!(dkw_epsilon(10, 1, 1.0).is_err());
        assert!(dkw_epsilon(10, 1, 0.0).is_err());
        let near_one = dkw_epsilon(100, 3, 1.0 - 1e-12).unwrap();
        assert!((near_one - (3.0 / 200.0 * 6f64.ln()).sqrt()).abs() < 1e-9);
        for d in 1..10 {
            assert!(dkw_epsilon(500, d + 1, 0.1).unwrap() > dkw_epsilon(500, d, 0.1).unwrap());
        }
    }

    #[test]
    fn ks_deviation_of_grid() {
        // ecdf of {0.25, 0.5, 0.75, 1} against U[0,1] deviates by 1/4 at each step
        let d = ks_deviation(&[0.25, 0.5, 0.75, 1.0], |x| x.clamp(0.0, 1.0));
        assert!((d - 0.25).abs() < 1e-15);
    }

    fn tie_free(values: Vec<f64>) -> Vec<f64> {
        let mut v = values;
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    proptest! {
        #[test]
        fn monotone_maps_preserve_the_transform(
            raw in proptest::collection::vec(-50.0f64..50.0, 2..60),
            shift in -5.0f64..5.0,
        ) {
            let mut col = tie_free(raw);
            prop_assume!(col.len() >= 2);
            // scramble deterministically so the column is not sorted
            let n = col.len();
            col.rotate_left(n / 3);
            let a = SampleMatrix::from_columns(&[col.clone()]).unwrap();
            let b = SampleMatrix::from_columns(&[col.iter().map(|x| (x / 20.0 + shift).exp()).collect::<Vec<_>>()]).unwrap();
            let za = empirical_copula_transform(&a).unwrap();
            let zb = empirical_copula_transform(&b).unwrap();
            prop_assert_eq!(za, zb);
        }

        #[test]
        fn tie_free_columns_are_grid_permutations(raw in proptest::collection::vec(-1e6f64..1e6, 2..80)) {
            let mut col = tie_free(raw);
            prop_assume!(col.len() >= 2);
            col.reverse();
            let m = col.len();
            let z = empirical_copula_transform(&SampleMatrix::from_columns(&[col]).unwrap()).unwrap();
            let mut out = z.points().column(0);
            out.sort_by(f64::total_cmp);
            let grid: Vec<f64> = (1..=m).map(|i| i as f64 / m as f64).collect();
            prop_assert_eq!(out, grid);
        }

        #[test]
        fn sorted_ranks_match_counting(raw in proptest::collection::vec(-3i32..3, 1..40)) {
            let col: Vec<f64> = raw.into_iter().map(f64::from).collect();
            let fast = column_ranks(&col);
            let slow: Vec<usize> = col.iter().map(|&x| rank(x, &col)).collect();
            prop_assert_eq!(fast, slow);
        }
    }
}
