//! Embedding features with dependence as proximity.
//!
//! Dissimilarities are `exp(-I(X^i, X^j))`, which need not satisfy the
//! triangle inequality; classical (Torgerson) scaling therefore keeps only
//! the positive part of the spectrum.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mmd;
use crate::select::DependenceProfile;

/// Symmetric, nonnegative, zero-diagonal dissimilarities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DissimilarityMatrix {
    entries: Vec<Vec<f64>>,
    labels: Vec<String>,
}

impl DissimilarityMatrix {
    pub fn new(entries: Vec<Vec<f64>>, labels: Option<Vec<String>>) -> Result<Self> {
        let n = entries.len();
        if n == 0 || entries.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("dissimilarity matrix must be square and non-empty".into()));
        }
        for i in 0..n {
            if entries[i][i] != 0.0 {
                return Err(Error::InvalidArgument(format!("diagonal entry {i} is not zero")));
            }
            for j in 0..n {
                let v = entries[i][j];
                if !(v.is_finite() && v >= 0.0) || v.to_bits() != entries[j][i].to_bits() {
                    return Err(Error::InvalidArgument(format!("entry ({i},{j}) is negative or asymmetric")));
                }
            }
        }
        let labels = labels.unwrap_or_else(|| (0..n).map(|i| format!("x{i}")).collect());
        if labels.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: labels.len() });
        }
        Ok(Self { entries, labels })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// `exp(-max(0, pairwise[i][j]))` off the diagonal, zero on it.
pub fn dependence_distances(profile: &DependenceProfile) -> Result<DissimilarityMatrix> {
    distances_from_pairwise(&profile.pairwise, Some(profile.feature_names.clone()))
}

/// Same as [`dependence_distances`] for a bare pairwise matrix.
pub fn distances_from_pairwise(pairwise: &[Vec<f64>], labels: Option<Vec<String>>) -> Result<DissimilarityMatrix> {
    let d = pairwise.len();
    let entries = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| if i == j { 0.0 } else { (-mmd::clamped(pairwise[i][j])).exp() })
                .collect()
        })
        .collect();
    DissimilarityMatrix::new(entries, labels)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingResult {
    /// One row per item, one column per retained dimension.
    pub coordinates: Vec<Vec<f64>>,
    pub labels: Vec<String>,
    /// Retained eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// Discarded positive eigenvalue mass over total positive mass.
    pub stress: f64,
    pub requested_dims: usize,
    /// Set when fewer than `requested_dims` positive eigenvalues exist.
    pub truncated: bool,
}

impl EmbeddingResult {
    pub fn dims(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Double-centered Gram matrix `-1/2 J (D∘D) J`.
pub fn double_centered_gram(dissimilarities: &DissimilarityMatrix) -> DMatrix<f64> {
    let n = dissimilarities.len();
    let sq = DMatrix::from_fn(n, n, |i, j| dissimilarities.get(i, j).powi(2));
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let col_means: Vec<f64> = (0..n).map(|j| sq.column(j).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    DMatrix::from_fn(n, n, |i, j| -0.5 * (sq[(i, j)] - row_means[i] - col_means[j] + grand))
}

/// Classical multidimensional scaling into `k` dimensions.
///
/// Each axis is oriented so that its largest-magnitude coordinate is
/// positive. When the Gram matrix has fewer than `k` positive eigenvalues
/// the result has fewer dimensions and `truncated` is set.
pub fn classical_mds(dissimilarities: &DissimilarityMatrix, k: usize) -> Result<EmbeddingResult> {
    let n = dissimilarities.len();
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!("embedding dimension must lie in 1..={}, got {k}", n.saturating_sub(1))));
    }
    let gram = double_centered_gram(dissimilarities);
    let eigen = SymmetricEigen::new(gram);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]).then(a.cmp(&b)));
    let scale = eigen.eigenvalues.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let tolerance = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let positive: Vec<usize> = order.iter().copied().filter(|&c| eigen.eigenvalues[c] > tolerance).collect();
    let retained = &positive[..positive.len().min(k)];

    let mut coordinates = vec![vec![0.0; retained.len()]; n];
    for (axis, &c) in retained.iter().enumerate() {
        let root = eigen.eigenvalues[c].sqrt();
        let vector = eigen.eigenvectors.column(c);
        let pivot = (0..n).fold(0, |best, i| if vector[i].abs() > vector[best].abs() { i } else { best });
        let sign = if vector[pivot] < 0.0 { -1.0 } else { 1.0 };
        for (i, row) in coordinates.iter_mut().enumerate() {
            row[axis] = sign * vector[i] * root;
        }
    }

    let total: f64 = positive.iter().map(|&c| eigen.eigenvalues[c]).sum();
    let kept: f64 = retained.iter().map(|&c| eigen.eigenvalues[c]).sum();
    let stress = if total > 0.0 { (total - kept) / total } else { 0.0 };
    Ok(EmbeddingResult {
        coordinates,
        labels: dissimilarities.labels().to_vec(),
        eigenvalues: retained.iter().map(|&c| eigen.eigenvalues[c]).collect(),
        stress,
        requested_dims: k,
        truncated: retained.len() < k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(points: &[[f64; 2]]) -> DissimilarityMatrix {
        let e = points
            .iter()
            .map(|a| points.iter().map(|b| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()).collect())
            .collect();
        DissimilarityMatrix::new(e, None).unwrap()
    }

    #[test]
    fn two_points_in_one_dimension() {
        let d = DissimilarityMatrix::new(vec![vec![0.0, 0.8], vec![0.8, 0.0]], None).unwrap();
        let e = classical_mds(&d, 1).unwrap();
        assert!((e.coordinates[0][0].abs() - 0.4).abs() < 1e-12);
        assert!((e.coordinates[0][0] + e.coordinates[1][0]).abs() < 1e-12);
        assert!(classical_mds(&d, 2).is_err());
    }

    #[test]
    fn planar_points_are_recovered() {
        let pts = [[0.0, 0.0], [3.0, 1.0], [-1.0, 2.0], [0.5, -2.5], [2.0, 2.0]];
        let d = dist(&pts);
        let e = classical_mds(&d, 2).unwrap();
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                let a = &e.coordinates[i];
                let b = &e.coordinates[j];
                let got = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                assert!((got - d.get(i, j)).abs() < 1e-9);
            }
        }
        for axis in 0..2 {
            let s: f64 = e.coordinates.iter().map(|r| r[axis]).sum();
            assert!(s.abs() < 1e-9);
        }
        assert!(e.stress.abs() < 1e-12);
    }

    #[test]
    fn sign_convention_makes_largest_entry_positive() {
        let pts = [[0.0, 0.0], [5.0, 0.1], [1.0, -0.2], [2.0, 0.3]];
        let e = classical_mds(&dist(&pts), 2).unwrap();
        for axis in 0..2 {
            let col: Vec<f64> = e.coordinates.iter().map(|r| r[axis]).collect();
            let max = col.iter().copied().fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
            assert!(max > 0.0);
        }
    }

    #[test]
    fn truncation_is_flagged_not_an_error() {
        // collinear points: one positive eigenvalue
        let e = classical_mds(&dist(&[[0.0, 0.0], [1.0, 0.0], [3.0, 0.0], [4.0, 0.0]]), 2).unwrap();
        assert!(e.truncated);
        assert_eq!(e.dims(), 1);
    }

    #[test]
    fn rejects_invalid_matrices() {
        assert!(DissimilarityMatrix::new(vec![vec![0.0, 1.0], vec![2.0, 0.0]], None).is_err());
        assert!(DissimilarityMatrix::new(vec![vec![1.0, 1.0], vec![1.0, 0.0]], None).is_err());
        assert!(DissimilarityMatrix::new(vec![vec![0.0, -1.0], vec![-1.0, 0.0]], None).is_err());
    }

    #[test]
    fn distances_from_profile() {
        let p = DependenceProfile::from_values(vec![0.0; 3], vec![vec![0.3, 0.0, 0.2], vec![0.0, 0.3, -0.01], vec![0.2, -0.01, 0.3]]).unwrap();
        let d = dependence_distances(&p).unwrap();
        assert_eq!(d.get(0, 0), 0.0);
        assert_eq!(d.get(0, 1), 1.0);
        assert_eq!(d.get(1, 2), 1.0);
        assert!((d.get(0, 2) - (-0.2f64).exp()).abs() < 1e-15);
        assert!(d.get(0, 2) < d.get(0, 1));
    }
}
