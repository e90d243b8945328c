//! Copula-based dependence estimators and the raw-MMD baseline.
//!
//! The dependence of a random vector is the MMD between its copula and the
//! uniform distribution on the unit cube. Three estimators are provided:
//!
//! * [`dep_unbiased_sq`]: U-statistic between the empirical copula and `m`
//!   uniform points paired by index.
//! * [`dep_biased`]: biased (square-root) MMD against `n` uniform points.
//! * [`dep_semi_analytic_sq`]: the U-statistic with the uniform expectations
//!   integrated in closed form (Gaussian kernel only), hence deterministic.
//!
//! [`dep_raw_mmd`] is the baseline that skips the copula transform and
//! compares the raw sample with a column-shuffled copy of itself.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::copula::{empirical_copula_transform_with, CopulaOptions, CopulaSample};
use crate::error::{Error, Result};
use crate::kernel::{Kernel, KernelSpec};
use crate::matrix::{Points, SampleMatrix};
use crate::mmd::{self, PairedSample};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    /// Î_u²: U-statistic against a paired uniform sample.
    USquared,
    /// Î_b: biased square-root MMD against `n` uniforms.
    B,
    /// Î_u² with closed-form uniform expectations.
    SemiAnalyticUSquared,
    /// Biased MMD between the raw sample and its column-shuffled copy.
    RawMmdB,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 4] =
        [EstimatorKind::USquared, EstimatorKind::B, EstimatorKind::SemiAnalyticUSquared, EstimatorKind::RawMmdB];

    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorKind::USquared => "u_squared",
            EstimatorKind::B => "b",
            EstimatorKind::SemiAnalyticUSquared => "semi_analytic_u_squared",
            EstimatorKind::RawMmdB => "raw_mmd_b",
        }
    }

    /// Whether the estimator only sees ranks (and is therefore invariant to
    /// strictly increasing transforms of the marginals).
    pub fn is_copula_based(&self) -> bool {
        !matches!(self, EstimatorKind::RawMmdB)
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown estimator `{s}`")))
    }
}

/// An estimator value together with everything needed to replay it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DependenceEstimate {
    pub value: f64,
    pub estimator: EstimatorKind,
    pub m: usize,
    /// Size of the uniform (or shuffled) reference sample; 0 when none is drawn.
    pub n: usize,
    pub kernel: KernelSpec,
    pub seed: u64,
    pub generator: String,
}

impl DependenceEstimate {
    /// max(0, value), for callers that need a distance-like quantity.
    pub fn clamped(&self) -> f64 {
        mmd::clamped(self.value)
    }
}

/// `n` i.i.d. points from U[0,1)^d, regenerable from `(seed, n, d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct UniformSample {
    points: Points,
    seed: u64,
}

impl UniformSample {
    pub fn generate(n: usize, d: usize, seed: u64) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidArgument("uniform sample needs n >= 1 and d >= 1".into()));
        }
        let mut rng = rng::stream(seed, rng::STREAM_UNIFORM);
        let data = (0..n * d).map(|_| rng.gen::<f64>()).collect();
        Ok(Self { points: Points::new(data, d)?, seed })
    }

    pub fn points(&self) -> &Points {
        &self.points
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn d(&self) -> usize {
        self.points.dim()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn generator(&self) -> &'static str {
        rng::GENERATOR
    }
}

fn check_dimension(z: &CopulaSample, uniforms: &UniformSample) -> Result<()> {
    if z.d() != uniforms.d() {
        return Err(Error::DimensionMismatch { expected: z.d(), actual: uniforms.d() });
    }
    Ok(())
}

fn wrap(value: f64, estimator: EstimatorKind, m: usize, n: usize, kernel: &KernelSpec, seed: u64) -> DependenceEstimate {
    DependenceEstimate { value, estimator, m, n, kernel: *kernel, seed, generator: rng::GENERATOR.to_string() }
}

/// Î_u² on an already transformed sample.
pub fn unbiased_sq_from_copula<K: Kernel + ?Sized>(kernel: &K, z: &CopulaSample, uniforms: &UniformSample) -> Result<f64> {
    check_dimension(z, uniforms)?;
    if uniforms.n() != z.m() {
        return Err(Error::SampleSizeMismatch { expected: z.m(), actual: uniforms.n() });
    }
    let paired = PairedSample::new(z.points(), uniforms.points())?;
    mmd::mmd_unbiased_sq(kernel, &paired)
}

/// Î_b on an already transformed sample.
pub fn biased_from_copula<K: Kernel + ?Sized>(kernel: &K, z: &CopulaSample, uniforms: &UniformSample) -> Result<f64> {
    check_dimension(z, uniforms)?;
    mmd::mmd_biased(kernel, z.points(), uniforms.points())
}

/// Semi-analytic Î_u² on an already transformed sample:
/// `1/(m(m-1)) Σ_{i≠j} k(Z_i,Z_j) - 2/m Σ_i E k(Z_i,U) + E k(U,U')`.
pub fn semi_analytic_sq_from_copula<K: Kernel + ?Sized>(kernel: &K, z: &CopulaSample) -> Result<f64> {
    let m = z.m();
    if m < 2 {
        return Err(Error::TooFewObservations { required: 2, actual: m });
    }
    let self_term = kernel.uniform_self_expectation(z.d())?;
    let cross: Vec<f64> = z.points().rows().map(|r| kernel.uniform_cross_expectation(r)).collect::<Result<_>>()?;
    let mf = m as f64;
    let pair_term = mmd::off_diagonal_sum(kernel, z.points()) / (mf * (mf - 1.0));
    let cross_term = 2.0 * mmd::pairwise_sum(&cross) / mf;
    Ok(pair_term - cross_term + self_term)
}

fn transform(x: &SampleMatrix) -> Result<CopulaSample> {
    empirical_copula_transform_with(x, &CopulaOptions::default())
}

/// Î_u²(X): U-statistic MMD² between the empirical copula of `x` and
/// `uniforms` (which must have exactly `m` points), paired by index.
pub fn dep_unbiased_sq(kernel: &KernelSpec, x: &SampleMatrix, uniforms: &UniformSample) -> Result<DependenceEstimate> {
    let value = unbiased_sq_from_copula(kernel, &transform(x)?, uniforms)?;
    Ok(wrap(value, EstimatorKind::USquared, x.m(), uniforms.n(), kernel, uniforms.seed()))
}

/// Î_b(X): biased MMD between the empirical copula of `x` and `uniforms`.
pub fn dep_biased(kernel: &KernelSpec, x: &SampleMatrix, uniforms: &UniformSample) -> Result<DependenceEstimate> {
    let value = biased_from_copula(kernel, &transform(x)?, uniforms)?;
    Ok(wrap(value, EstimatorKind::B, x.m(), uniforms.n(), kernel, uniforms.seed()))
}

/// Î_u²(X) with the uniform expectations in closed form. Deterministic.
pub fn dep_semi_analytic_sq(kernel: &KernelSpec, x: &SampleMatrix) -> Result<DependenceEstimate> {
    let value = semi_analytic_sq_from_copula(kernel, &transform(x)?)?;
    Ok(wrap(value, EstimatorKind::SemiAnalyticUSquared, x.m(), 0, kernel, 0))
}

/// Permutes every column independently, breaking all cross-column
/// dependence while keeping each column's multiset of values.
pub fn shuffle_product(x: &SampleMatrix, seed: u64) -> Result<SampleMatrix> {
    let mut rng = rng::stream(seed, rng::STREAM_SHUFFLE);
    let mut columns: Vec<Vec<f64>> = (0..x.d()).map(|j| x.column(j)).collect();
    for column in &mut columns {
        column.shuffle(&mut rng);
    }
    SampleMatrix::with_names(Points::from_columns(&columns)?, x.column_names().map(<[String]>::to_vec))
}

/// Raw-data MMD dependence: biased MMD between `x` and
/// [`shuffle_product`]`(x, seed)`, on the original scale.
pub fn dep_raw_mmd(kernel: &KernelSpec, x: &SampleMatrix, seed: u64) -> Result<DependenceEstimate> {
    let shuffled = shuffle_product(x, seed)?;
    let value = mmd::mmd_biased(kernel, x.points(), shuffled.points())?;
    Ok(wrap(value, EstimatorKind::RawMmdB, x.m(), x.m(), kernel, seed))
}

/// One fully specified estimator: kind, kernel, seed and sample sizes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub kind: EstimatorKind,
    pub kernel: KernelSpec,
    pub seed: u64,
    /// Uniform sample size for [`EstimatorKind::B`]; `None` means `n = m`.
    pub n_uniform: Option<usize>,
    #[serde(default)]
    pub copula: CopulaOptions,
}

impl EstimatorConfig {
    pub fn new(kind: EstimatorKind, kernel: KernelSpec, seed: u64) -> Self {
        Self { kind, kernel, seed, n_uniform: None, copula: CopulaOptions::default() }
    }

    pub fn with_n_uniform(mut self, n: usize) -> Self {
        self.n_uniform = Some(n);
        self
    }

    pub fn with_copula(mut self, copula: CopulaOptions) -> Self {
        self.copula = copula;
        self
    }

    /// Runs the configured estimator on `x`.
    pub fn estimate(&self, x: &SampleMatrix) -> Result<DependenceEstimate> {
        let (m, d, kernel) = (x.m(), x.d(), &self.kernel);
        let copula = || empirical_copula_transform_with(x, &self.copula);
        match self.kind {
            EstimatorKind::USquared => {
                let uniforms = UniformSample::generate(m, d, self.seed)?;
                let value = unbiased_sq_from_copula(kernel, &copula()?, &uniforms)?;
                Ok(wrap(value, self.kind, m, m, kernel, self.seed))
            }
            EstimatorKind::B => {
                let n = self.n_uniform.unwrap_or(m);
                let uniforms = UniformSample::generate(n, d, self.seed)?;
                let value = biased_from_copula(kernel, &copula()?, &uniforms)?;
                Ok(wrap(value, self.kind, m, n, kernel, self.seed))
            }
            EstimatorKind::SemiAnalyticUSquared => {
                let value = semi_analytic_sq_from_copula(kernel, &copula()?)?;
                Ok(wrap(value, self.kind, m, 0, kernel, self.seed))
            }
            EstimatorKind::RawMmdB => dep_raw_mmd(kernel, x, self.seed),
        }
    }
}
