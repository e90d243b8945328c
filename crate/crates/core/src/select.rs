//! Dependence-based feature selection.
//!
//! Both objectives work on a [`DependenceProfile`]: the estimated dependence
//! of every feature with the target, and of every pair of features.
//!
//! * max-relevance maximizes the mean target dependence of the chosen set,
//!   which is solved exactly by taking the top-h features;
//! * mRMR subtracts the mean pairwise dependence (diagonal included) of the
//!   chosen set and is optimized greedily by forward selection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dependence::EstimatorConfig;
use crate::error::{Error, Result};
use crate::matrix::SampleMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DependenceProfile {
    pub target_index: usize,
    /// Column index (in the source sample) of each profiled feature.
    pub feature_indices: Vec<usize>,
    pub feature_names: Vec<String>,
    /// `target_deps[i]`: dependence between feature `i` and the target.
    pub target_deps: Vec<f64>,
    /// `pairwise[i][j]`: dependence between features `i` and `j`.
    pub pairwise: Vec<Vec<f64>>,
    pub estimator: Option<EstimatorConfig>,
}

impl DependenceProfile {
    /// Profile from precomputed values; features are numbered `0..d`.
    pub fn from_values(target_deps: Vec<f64>, pairwise: Vec<Vec<f64>>) -> Result<Self> {
        let d = target_deps.len();
        if pairwise.len() != d || pairwise.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, actual: pairwise.len() });
        }
        for i in 0..d {
            for j in 0..i {
                if pairwise[i][j].to_bits() != pairwise[j][i].to_bits() {
                    return Err(Error::InvalidArgument(format!("pairwise matrix not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self {
            target_index: d,
            feature_indices: (0..d).collect(),
            feature_names: (0..d).map(|i| format!("x{i}")).collect(),
            target_deps,
            pairwise,
            estimator: None,
        })
    }

    pub fn num_features(&self) -> usize {
        self.target_deps.len()
    }
}

/// Estimates every feature-target and feature-feature dependence.
///
/// All columns other than `target` are features. Each unordered pair is
/// estimated once, on the two-column submatrix `(X^i, X^j)`; target
/// dependencies use `(Y, X^i)`. Every estimate uses the same seed.
pub fn build_profile(config: &EstimatorConfig, x: &SampleMatrix, target: usize) -> Result<DependenceProfile> {
    if x.d() < 2 {
        return Err(Error::InvalidArgument("feature selection needs at least one feature and a target".into()));
    }
    if target >= x.d() {
        return Err(Error::InvalidArgument(format!("target index {target} out of range for {} columns", x.d())));
    }
    let features: Vec<usize> = (0..x.d()).filter(|&j| j != target).collect();
    let target_deps: Vec<f64> = features
        .par_iter()
        .map(|&f| Ok(config.estimate(&x.select_columns(&[target, f])?)?.value))
        .collect::<Result<_>>()?;

    let pairwise = pairwise_dependence(config, x, &features)?;
    Ok(DependenceProfile {
        target_index: target,
        feature_names: features.iter().map(|&f| x.column_name(f)).collect(),
        feature_indices: features,
        target_deps,
        pairwise,
        estimator: Some(*config),
    })
}

/// Symmetric matrix of two-column dependencies between `columns` of `x`,
/// diagonal included. Each unordered pair is estimated once.
pub fn pairwise_dependence(config: &EstimatorConfig, x: &SampleMatrix, columns: &[usize]) -> Result<Vec<Vec<f64>>> {
    let d = columns.len();
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|i| (i..d).map(move |j| (i, j))).collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| Ok(config.estimate(&x.select_columns(&[columns[i], columns[j]])?)?.value))
        .collect::<Result<_>>()?;
    let mut pairwise = vec![vec![0.0; d]; d];
    for (&(i, j), &v) in pairs.iter().zip(&values) {
        pairwise[i][j] = v;
        pairwise[j][i] = v;
    }
    Ok(pairwise)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionObjective {
    MaxRelevance,
    Mrmr,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Source column indices, in selection order.
    pub selected: Vec<usize>,
    pub selected_names: Vec<String>,
    /// Objective value of the selected prefix after each step.
    pub scores: Vec<f64>,
    pub objective: SelectionObjective,
    pub h: usize,
}

fn check_h(profile: &DependenceProfile, h: usize) -> Result<()> {
    if h == 0 || h > profile.num_features() {
        return Err(Error::InvalidArgument(format!(
            "subset size must lie in 1..={}, got {h}",
            profile.num_features()
        )));
    }
    Ok(())
}

fn finish(profile: &DependenceProfile, positions: Vec<usize>, scores: Vec<f64>, objective: SelectionObjective, h: usize) -> SelectionResult {
    SelectionResult {
        selected: positions.iter().map(|&p| profile.feature_indices[p]).collect(),
        selected_names: positions.iter().map(|&p| profile.feature_names[p].clone()).collect(),
        scores,
        objective,
        h,
    }
}

/// Mean-relevance objective of a set of profile positions.
pub fn relevance_objective(profile: &DependenceProfile, set: &[usize]) -> f64 {
    set.iter().map(|&i| profile.target_deps[i]).sum::<f64>() / set.len() as f64
}

/// Relevance minus redundancy, with the redundancy double sum over all
/// ordered pairs of the set including `i = j`.
pub fn mrmr_objective(profile: &DependenceProfile, set: &[usize]) -> f64 {
    let s = set.len() as f64;
    let redundancy: f64 = set.iter().flat_map(|&i| set.iter().map(move |&j| (i, j))).map(|(i, j)| profile.pairwise[i][j]).sum();
    relevance_objective(profile, set) - redundancy / (s * s)
}

/// Top-`h` features by target dependence, ties broken by lower index.
pub fn max_relevance(profile: &DependenceProfile, h: usize) -> Result<SelectionResult> {
    check_h(profile, h)?;
    let mut order: Vec<usize> = (0..profile.num_features()).collect();
    order.sort_by(|&a, &b| profile.target_deps[b].total_cmp(&profile.target_deps[a]).then(a.cmp(&b)));
    order.truncate(h);
    let scores = (1..=h).map(|k| relevance_objective(profile, &order[..k])).collect();
    Ok(finish(profile, order, scores, SelectionObjective::MaxRelevance, h))
}

/// Greedy forward selection on the mRMR objective.
///
/// Each step adds the feature whose inclusion gives the largest objective
/// for the augmented set; ties go to the lower index.
pub fn mrmr_select(profile: &DependenceProfile, h: usize) -> Result<SelectionResult> {
    check_h(profile, h)?;
    let d = profile.num_features();
    let mut chosen: Vec<usize> = Vec::with_capacity(h);
    let mut scores = Vec::with_capacity(h);
    let mut candidate = Vec::with_capacity(h);
    while chosen.len() < h {
        let mut best: Option<(usize, f64)> = None;
        for c in (0..d).filter(|c| !chosen.contains(c)) {
            candidate.clear();
            candidate.extend_from_slice(&chosen);
            candidate.push(c);
            let value = mrmr_objective(profile, &candidate);
            if best.is_none_or(|(_, v)| value > v) {
                best = Some((c, value));
            }
        }
        let (c, value) = best.expect("candidates remain while chosen.len() < h <= d");
        chosen.push(c);
        scores.push(value);
    }
    Ok(finish(profile, chosen, scores, SelectionObjective::Mrmr, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dependence::EstimatorKind;
    use crate::kernel::KernelSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn profile(rel: &[f64], pair: &[&[f64]]) -> DependenceProfile {
        DependenceProfile::from_values(rel.to_vec(), pair.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn max_relevance_orders_and_breaks_ties() {
        let p = profile(&[0.1, 0.5, 0.3], &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let r = max_relevance(&p, 3).unwrap();
        assert_eq!(r.selected, vec![1, 2, 0]);
        assert!((r.scores[1] - 0.4).abs() < 1e-15);
        let flat = profile(&[0.2, 0.2, 0.2], &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        assert_eq!(max_relevance(&flat, 2).unwrap().selected, vec![0, 1]);
        assert!(max_relevance(&flat, 0).is_err());
        assert!(max_relevance(&flat, 4).is_err());
    }

    #[test]
    fn mrmr_avoids_redundant_features() {
        // feature 1 duplicates feature 0; feature 2 is less relevant but independent
        let c = 0.9;
        let p = profile(&[0.6, 0.6, 0.4], &[&[c, c, 0.0], &[c, c, 0.0], &[0.0, 0.0, c]]);
        let r = mrmr_select(&p, 2).unwrap();
        assert_eq!(r.selected, vec![0, 2]);
        assert_eq!(max_relevance(&p, 2).unwrap().selected, vec![0, 1]);
    }

    #[test]
    fn mrmr_two_of_two_selects_both() {
        let p = profile(&[-0.3, 0.1], &[&[0.5, 0.4], &[0.4, 0.5]]);
        let mut s = mrmr_select(&p, 2).unwrap().selected;
        s.sort();
        assert_eq!(s, vec![0, 1]);
    }

    #[test]
    fn rejects_asymmetric_profiles() {
        assert!(DependenceProfile::from_values(vec![0.0, 0.0], vec![vec![1.0, 0.2], vec![0.3, 1.0]]).is_err());
    }

    #[test]
    fn max_relevance_is_optimal_by_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let d = rng.gen_range(2..=9);
            let rel: Vec<f64> = (0..d).map(|_| (rng.gen::<f64>() * 10.0).round() / 10.0).collect();
            let p = DependenceProfile::from_values(rel.clone(), vec![vec![0.0; d]; d]).unwrap();
            let h = rng.gen_range(1..=d);
            let got = relevance_objective(&p, &max_relevance(&p, h).unwrap().selected);
            let best = (0u32..1 << d)
                .filter(|mask| mask.count_ones() as usize == h)
                .map(|mask| (0..d).filter(|i| mask >> i & 1 == 1).map(|i| rel[i]).sum::<f64>() / h as f64)
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((got - best).abs() < 1e-12);
        }
    }

    fn uniform_column(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
        (0..m).map(|_| rng.gen::<f64>()).collect()
    }

    #[test]
    fn profile_is_symmetric_with_constant_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = 150;
        let a = uniform_column(&mut rng, m);
        let b: Vec<f64> = a.iter().map(|v| v.powi(3) + 2.0).collect();
        let c = uniform_column(&mut rng, m);
        let y: Vec<f64> = a.iter().zip(&c).map(|(u, v)| u + 0.1 * v).collect();
        let x = SampleMatrix::from_columns(&[a, b, c, y]).unwrap();
        let cfg = EstimatorConfig::new(EstimatorKind::B, KernelSpec::gaussian(0.5).unwrap(), 9);
        let p = build_profile(&cfg, &x, 3).unwrap();
        assert_eq!(p.feature_indices, vec![0, 1, 2]);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(p.pairwise[i][j].to_bits(), p.pairwise[j][i].to_bits());
            }
            assert_eq!(p.pairwise[i][i].to_bits(), p.pairwise[0][0].to_bits());
        }
        // b is a strictly increasing function of a: comonotone, same as the diagonal
        assert_eq!(p.pairwise[0][1].to_bits(), p.pairwise[0][0].to_bits());
        assert!(p.pairwise[0][2] < p.pairwise[0][0]);
        assert!(build_profile(&cfg, &x, 4).is_err());
    }
}
