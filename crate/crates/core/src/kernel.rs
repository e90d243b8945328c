//! Bounded, uniformly Lipschitz kernels on the unit cube.
//!
//! The Gaussian kernel additionally has closed-form expectations against the
//! uniform distribution on `[0,1]^d`, which is what the semi-analytic
//! dependence estimator relies on. Kernels without closed forms return
//! [`Error::SemiAnalyticUnsupported`] and callers fall back to sampling
//! (see [`monte_carlo_cross_expectation`]).

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Default Gaussian bandwidth: σ² = 1/12, the variance of U[0,1].
pub const DEFAULT_SIGMA: f64 = 0.288_675_134_594_812_9;

pub trait Kernel: Sync {
    fn name(&self) -> &'static str;

    /// Kernel value. Both slices must have the same length.
    fn eval(&self, a: &[f64], b: &[f64]) -> f64;

    /// Upper bound K on the kernel over the unit cube.
    fn bound(&self) -> f64;

    /// L such that |k(z1, z) - k(z2, z)| <= L ||z1 - z2|| on the unit cube.
    fn lipschitz_constant(&self) -> Result<f64>;

    /// E[k(z, U)] for U ~ U[0,1]^d.
    fn uniform_cross_expectation(&self, _z: &[f64]) -> Result<f64> {
        Err(Error::SemiAnalyticUnsupported(self.name()))
    }

    /// E[k(U, U')] for independent U, U' ~ U[0,1]^d.
    fn uniform_self_expectation(&self, _d: usize) -> Result<f64> {
        Err(Error::SemiAnalyticUnsupported(self.name()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    Gaussian,
    Laplacian,
}

impl KernelFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            KernelFamily::Gaussian => "gaussian",
            KernelFamily::Laplacian => "laplacian",
        }
    }
}

impl std::str::FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(KernelFamily::Gaussian),
            "laplacian" => Ok(KernelFamily::Laplacian),
            other => Err(Error::Config(format!("unknown kernel family `{other}`"))),
        }
    }
}

/// A kernel family together with its bandwidth.
///
/// Gaussian: `exp(-||a-b||² / (2σ²))`. Laplacian: `exp(-||a-b|| / σ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKernelSpec")]
pub struct KernelSpec {
    family: KernelFamily,
    sigma: f64,
}

#[derive(Deserialize)]
struct RawKernelSpec {
    family: KernelFamily,
    sigma: f64,
}

impl TryFrom<RawKernelSpec> for KernelSpec {
    type Error = Error;

    fn try_from(raw: RawKernelSpec) -> Result<Self> {
        KernelSpec::new(raw.family, raw.sigma)
    }
}

impl KernelSpec {
    pub fn new(family: KernelFamily, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidArgument(format!("bandwidth must be positive and finite, got {sigma}")));
        }
        Ok(Self { family, sigma })
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::new(KernelFamily::Gaussian, sigma)
    }

    pub fn laplacian(sigma: f64) -> Result<Self> {
        Self::new(KernelFamily::Laplacian, sigma)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Dimension-checked evaluation.
    pub fn try_eval(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch { expected: a.len(), actual: b.len() });
        }
        if a.is_empty() {
            return Err(Error::InvalidArgument("kernel arguments must have dimension >= 1".into()));
        }
        Ok(self.eval(a, b))
    }
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self { family: KernelFamily::Gaussian, sigma: DEFAULT_SIGMA }
    }
}

#[inline]
fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl Kernel for KernelSpec {
    fn name(&self) -> &'static str {
        self.family.as_str()
    }

    #[inline]
    fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        let sq = squared_distance(a, b);
        match self.family {
            KernelFamily::Gaussian => (-sq / (2.0 * self.sigma * self.sigma)).exp(),
            KernelFamily::Laplacian => (-sq.sqrt() / self.sigma).exp(),
        }
    }

    fn bound(&self) -> f64 {
        1.0
    }

    fn lipschitz_constant(&self) -> Result<f64> {
        Ok(match self.family {
            // max_t (t/σ²) exp(-t²/(2σ²)) is attained at t = σ
            KernelFamily::Gaussian => (-0.5f64).exp() / self.sigma,
            KernelFamily::Laplacian => 1.0 / self.sigma,
        })
    }

    fn uniform_cross_expectation(&self, z: &[f64]) -> Result<f64> {
        match self.family {
            KernelFamily::Gaussian => Ok(gaussian_cross_expectation(self.sigma, z)),
            KernelFamily::Laplacian => Err(Error::SemiAnalyticUnsupported(self.name())),
        }
    }

    fn uniform_self_expectation(&self, d: usize) -> Result<f64> {
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        match self.family {
            KernelFamily::Gaussian => Ok(gaussian_self_expectation_1d(self.sigma).powi(d as i32)),
            KernelFamily::Laplacian => Err(Error::SemiAnalyticUnsupported(self.name())),
        }
    }
}

/// ∏_j ∫_0^1 exp(-(z_j - u)² / (2σ²)) du, in terms of erf.
fn gaussian_cross_expectation(sigma: f64, z: &[f64]) -> f64 {
    let scale = sigma * (PI / 2.0).sqrt();
    let inv = FRAC_1_SQRT_2 / sigma;
    z.iter()
        .map(|&zj| scale * (libm::erf((1.0 - zj) * inv) + libm::erf(zj * inv)))
        .product()
}

/// ∫_0^1 ∫_0^1 exp(-(u - u')² / (2σ²)) du du'.
fn gaussian_self_expectation_1d(sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    sigma * (2.0 * PI).sqrt() * libm::erf(FRAC_1_SQRT_2 / sigma) + 2.0 * s2 * (-0.5 / s2).exp_m1()
}

/// Sampling estimate of E[k(z, U)] for kernels without a closed form.
pub fn monte_carlo_cross_expectation<K: Kernel + ?Sized>(kernel: &K, z: &[f64], n: usize, seed: u64) -> f64 {
    let mut rng = rng::stream(seed, rng::STREAM_UNIFORM);
    let mut u = vec![0.0; z.len()];
    let mut total = 0.0;
    for _ in 0..n {
        u.iter_mut().for_each(|x| *x = rng.gen::<f64>());
        total += kernel.eval(z, &u);
    }
    total / n as f64
}

/// Sampling estimate of E[k(U, U')] for kernels without a closed form.
pub fn monte_carlo_self_expectation<K: Kernel + ?Sized>(kernel: &K, d: usize, n: usize, seed: u64) -> f64 {
    let mut rng = rng::stream(seed, rng::STREAM_UNIFORM);
    let mut u = vec![0.0; d];
    let mut v = vec![0.0; d];
    let mut total = 0.0;
    for _ in 0..n {
        u.iter_mut().for_each(|x| *x = rng.gen::<f64>());
        v.iter_mut().for_each(|x| *x = rng.gen::<f64>());
        total += kernel.eval(&u, &v);
    }
    total / n as f64
}
