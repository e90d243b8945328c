//! Independence tests on top of the dependence estimators.
//!
//! The primary test is a permutation test: the null distribution is sampled
//! by re-running the whole pipeline (copula transform included) on
//! column-shuffled copies of the data. The convergence-rate expression in
//! [`bound_threshold`] is exposed as an advisory, uncalibrated threshold.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dependence::{shuffle_product, EstimatorConfig, EstimatorKind};
use crate::error::{Error, Result};
use crate::kernel::{Kernel, KernelSpec};
use crate::matrix::SampleMatrix;
use crate::rng;

/// Smallest permutation count for which p <= 0.05 is attainable.
pub const MIN_PERMUTATIONS: usize = 19;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    Permutation,
    Bound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: TestMethod,
    pub estimator: EstimatorKind,
    pub statistic: f64,
    /// Permutation p-value; `None` for the bound variant.
    pub p_value: Option<f64>,
    pub reject: bool,
    pub alpha: f64,
    pub num_permutations: usize,
    pub threshold: Option<f64>,
    pub seed: u64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0,1), got {alpha}")));
    }
    Ok(())
}

/// Statistic used by the permutation test for `kernel`: the deterministic
/// semi-analytic Î_u² when available, otherwise Î_u² against uniforms drawn
/// from `seed` (the same uniforms for the observed and every null sample).
pub fn permutation_statistic(kernel: &KernelSpec, seed: u64) -> EstimatorConfig {
    let kind = match kernel.uniform_self_expectation(1) {
        Ok(_) => EstimatorKind::SemiAnalyticUSquared,
        Err(_) => EstimatorKind::USquared,
    };
    EstimatorConfig::new(kind, *kernel, seed)
}

/// Permutation test of mutual independence of the columns of `x`.
///
/// `p = (1 + #{null >= observed}) / (B + 1)`; reject when `p <= alpha`.
pub fn independence_test_permutation(
    kernel: &KernelSpec,
    x: &SampleMatrix,
    permutations: usize,
    alpha: f64,
    seed: u64,
) -> Result<TestResult> {
    independence_test_with(&permutation_statistic(kernel, seed), x, permutations, alpha)
}

/// Permutation test with an explicit statistic.
pub fn independence_test_with(
    statistic: &EstimatorConfig,
    x: &SampleMatrix,
    permutations: usize,
    alpha: f64,
) -> Result<TestResult> {
    if permutations < MIN_PERMUTATIONS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_PERMUTATIONS} permutations to reach alpha = 0.05, got {permutations}"
        )));
    }
    check_alpha(alpha)?;
    let observed = statistic.estimate(x)?.value;
    let seed = statistic.seed;
    let exceed: Vec<bool> = (1..=permutations as u64)
        .into_par_iter()
        .map(|b| -> Result<bool> {
            let shuffled = shuffle_product(x, rng::child_seed(seed, b))?;
            Ok(statistic.estimate(&shuffled)?.value >= observed)
        })
        .collect::<Result<_>>()?;
    let count = exceed.iter().filter(|&&e| e).count();
    let p_value = (1 + count) as f64 / (permutations + 1) as f64;
    let threshold = advisory_threshold(&statistic.kernel, x.m(), x.m(), x.d()).ok();
    Ok(TestResult {
        method: TestMethod::Permutation,
        estimator: statistic.kind,
        statistic: observed,
        p_value: Some(p_value),
        reject: p_value <= alpha,
        alpha,
        num_permutations: permutations,
        threshold,
        seed,
    })
}

/// Explicit expression inside the O(·) of the Î_b convergence rate, with
/// unit constant:
///
/// `max{(8dL²/m · log(4dm²))^{1/4}, (2K(m+n)/(mn) · log(4m²))^{1/2}} + (K/m)^{1/2} + (K/n)^{1/2}`
///
/// The true constant is unknown, so this is conservative guidance only.
/// `delta` is validated and recorded but does not enter the expression.
pub fn bound_threshold(m: usize, n: usize, d: usize, bound: f64, lipschitz: f64, delta: f64) -> Result<f64> {
    if m == 0 || n == 0 || d == 0 {
        return Err(Error::InvalidArgument("m, n and d must be positive".into()));
    }
    if !(bound > 0.0 && lipschitz > 0.0 && delta > 0.0) || !(bound.is_finite() && lipschitz.is_finite()) {
        return Err(Error::InvalidArgument("K, L and delta must be positive".into()));
    }
    Ok(bound_expression(m as f64, n as f64, d as f64, bound, lipschitz))
}

fn bound_expression(m: f64, n: f64, d: f64, k: f64, l: f64) -> f64 {
    let lipschitz_part = (8.0 * d * l * l / m * (4.0 * d * m * m).ln()).powf(0.25);
    let bound_part = (2.0 * k * (m + n) / (m * n) * (4.0 * m * m).ln()).sqrt();
    lipschitz_part.max(bound_part) + (k / m).sqrt() + (k / n).sqrt()
}

fn advisory_threshold(kernel: &KernelSpec, m: usize, n: usize, d: usize) -> Result<f64> {
    bound_threshold(m, n, d, kernel.bound(), kernel.lipschitz_constant()?, 0.05)
}

/// Bound-based variant: reject when Î_b exceeds [`bound_threshold`].
pub fn independence_test_bound(
    kernel: &KernelSpec,
    x: &SampleMatrix,
    n_uniform: usize,
    delta: f64,
    seed: u64,
) -> Result<TestResult> {
    check_alpha(delta)?;
    let estimate = EstimatorConfig::new(EstimatorKind::B, *kernel, seed).with_n_uniform(n_uniform).estimate(x)?;
    let threshold = bound_threshold(x.m(), n_uniform, x.d(), kernel.bound(), kernel.lipschitz_constant()?, delta)?;
    Ok(TestResult {
        method: TestMethod::Bound,
        estimator: EstimatorKind::B,
        statistic: estimate.value,
        p_value: None,
        reject: estimate.value > threshold,
        alpha: delta,
        num_permutations: 0,
        threshold: Some(threshold),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gauss() -> KernelSpec {
        KernelSpec::gaussian(1.0).unwrap()
    }

    fn independent(seed: u64, m: usize) -> SampleMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<f64> = (0..m).map(|_| rng.gen()).collect();
        let b: Vec<f64> = (0..m).map(|_| rng.gen()).collect();
        SampleMatrix::from_columns(&[a, b]).unwrap()
    }

    #[test]
    fn too_few_permutations_is_an_error() {
        let x = independent(1, 30);
        assert!(independence_test_permutation(&gauss(), &x, 18, 0.05, 0).is_err());
        assert!(independence_test_permutation(&gauss(), &x, 19, 0.0, 0).is_err());
    }

    #[test]
    fn identical_columns_reach_the_minimal_p_value() {
        let x = independent(2, 200);
        let col = x.column(0);
        let dup = SampleMatrix::from_columns(&[col.clone(), col]).unwrap();
        let r = independence_test_permutation(&gauss(), &dup, 199, 0.05, 3).unwrap();
        assert_eq!(r.p_value, Some(1.0 / 200.0));
        assert!(r.reject);
        assert_eq!(r.estimator, EstimatorKind::SemiAnalyticUSquared);
    }

    #[test]
    fn nineteen_permutations_reject_only_at_the_extreme() {
        let x = independent(4, 60);
        let r = independence_test_permutation(&gauss(), &x, 19, 0.05, 5).unwrap();
        let p = r.p_value.unwrap();
        assert!((0.05..=1.0).contains(&p));
        assert_eq!(r.reject, p <= 0.05 + 1e-15);
        assert_eq!((p * 20.0).round(), p * 20.0);
    }

    #[test]
    fn test_is_deterministic() {
        let x = independent(6, 80);
        let a = independence_test_permutation(&gauss(), &x, 39, 0.05, 7).unwrap();
        let b = independence_test_permutation(&gauss(), &x, 39, 0.05, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn laplacian_falls_back_to_sampled_uniforms() {
        let x = independent(8, 40);
        let k = KernelSpec::laplacian(0.5).unwrap();
        let r = independence_test_permutation(&k, &x, 19, 0.05, 9).unwrap();
        assert_eq!(r.estimator, EstimatorKind::USquared);
    }

    #[test]
    fn bound_threshold_properties() {
        let l = (-0.5f64).exp();
        for &(m, n, d) in &[(100, 100, 1), (300, 300, 2), (50, 400, 5), (1000, 2000, 3)] {
            let t = bound_threshold(m, n, d, 1.0, l, 0.05).unwrap();
            let t2 = bound_threshold(2 * m, n, d, 1.0, l, 0.05).unwrap();
            assert!(t2 < t, "({m},{n},{d})");
        }
        // with n small and fixed, the (m+n)/(mn) · log(4m²) term grows like log(m)/n
        let small_n = |m| bound_threshold(m, 10, 3, 1.0, l, 0.05).unwrap();
        assert!(small_n(2000) > small_n(1000));
        // K → 0: only the Lipschitz term survives
        let m = 300.0;
        let tiny = bound_threshold(300, 300, 2, 1e-300, l, 0.05).unwrap();
        let expected = (8.0 * 2.0 * l * l / m * (4.0 * 2.0 * m * m).ln()).powf(0.25);
        assert!((tiny - expected).abs() < 1e-12);
        assert!(bound_threshold(0, 1, 1, 1.0, 1.0, 0.1).is_err());
        assert!(bound_threshold(1, 1, 1, -1.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn bound_threshold_regression_value() {
        // m = n = 300, d = 2, K = 1, L = e^{-1/2}:
        // lipschitz part (16 e^{-1} / 300 · ln 720000)^{1/4} = 0.71722...,
        // bound part (2·600/90000 · ln 360000)^{1/2} = 0.41302...,
        // plus 2·(1/300)^{1/2} = 0.11547...
        let t = bound_threshold(300, 300, 2, 1.0, (-0.5f64).exp(), 0.05).unwrap();
        assert!((t - 0.832_694_284_203_835_6).abs() < 1e-12, "{t:.15}");
    }

    #[test]
    fn bound_variant_reports_threshold() {
        let x = independent(10, 100);
        let r = independence_test_bound(&gauss(), &x, 100, 0.05, 1).unwrap();
        assert_eq!(r.method, TestMethod::Bound);
        assert!(r.threshold.unwrap() > r.statistic);
        assert!(!r.reject);
        assert!(r.p_value.is_none());
    }
}
