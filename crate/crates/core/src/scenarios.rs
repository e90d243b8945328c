//! Built-in benchmark experiments.
//!
//! * `synthetic61`: `X¹ ~ U[0,1]`, `X² ~ U[0,500]`, `Y = 500 sin(4πX¹)`.
//!   `X¹` determines `Y` but the raw-scale MMD favours the wide `X²`.
//! * `synthetic62`: `X¹ = std(1/U²)`, `X² = std(V)`, `Y = std(sin(4πX¹))`,
//!   all standardized. Standardizing does not remove the heavy tail of `X¹`.
//! * `housing63`: the vendored Boston housing data; the single best
//!   predictor of the median value (`MEDV`) over seeded train/test splits.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::copula::{empirical_copula_transform_with, jitter_sample, CopulaOptions, Jitter};
use crate::dependence::{dep_raw_mmd, EstimatorConfig, EstimatorKind, UniformSample};
use crate::embed::{classical_mds, distances_from_pairwise, EmbeddingResult};
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::matrix::SampleMatrix;
use crate::mmd::BiasedReference;
use crate::rng;
use crate::select::{build_profile, max_relevance, mrmr_select, pairwise_dependence};

const HOUSING_CSV: &str = include_str!("../data/housing.csv");

/// SHA-256 of the vendored housing file.
pub const HOUSING_SHA256: &str = "cc5aa43090ed76813ab7346cb7363150fab7569cb6f2f8f08c09bd9ca9c255fa";

/// Column index of `MEDV`, the housing target.
pub const HOUSING_TARGET: usize = 13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Synthetic61,
    Synthetic62,
    Housing63,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::Synthetic61, Scenario::Synthetic62, Scenario::Housing63];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::Synthetic61 => "synthetic61",
            Scenario::Synthetic62 => "synthetic62",
            Scenario::Housing63 => "housing63",
        }
    }

    pub fn settings(&self) -> ScenarioSettings {
        match self {
            // n_uniform = 10m: with n = m the uniform sampling noise in Î_b
            // is comparable to the gap between the two features
            Scenario::Synthetic61 => ScenarioSettings { m: 300, sigma: 1.0, n_uniform: 3000, train_size: None, jitter: None },
            Scenario::Synthetic62 => ScenarioSettings { m: 4000, sigma: 1.0, n_uniform: 4000, train_size: None, jitter: None },
            Scenario::Housing63 => ScenarioSettings {
                m: 506,
                sigma: (1.0f64 / 12.0).sqrt(),
                n_uniform: 300,
                train_size: Some(300),
                jitter: Some(0.5),
            },
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL.into_iter().find(|c| c.as_str() == s).ok_or_else(|| {
            let names: Vec<&str> = Scenario::ALL.iter().map(Scenario::as_str).collect();
            Error::Config(format!("unknown scenario `{s}`; available: {}", names.join(", ")))
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSettings {
    /// Sample size (for housing, the number of rows in the file).
    pub m: usize,
    pub sigma: f64,
    pub n_uniform: usize,
    pub train_size: Option<usize>,
    /// Tie-breaking jitter used by the copula estimator.
    pub jitter: Option<f64>,
}

fn standardize(column: &mut [f64]) {
    let n = column.len() as f64;
    let mean = column.iter().sum::<f64>() / n;
    let sd = (column.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    for v in column.iter_mut() {
        *v = (*v - mean) / sd;
    }
}

/// Columns `[Y, X¹, X²]` of the first synthetic scenario.
pub fn synthetic61_data(m: usize, seed: u64) -> Result<SampleMatrix> {
    let mut rng = rng::stream(seed, rng::STREAM_SCENARIO);
    let x1: Vec<f64> = (0..m).map(|_| rng.gen::<f64>()).collect();
    let x2: Vec<f64> = (0..m).map(|_| 500.0 * rng.gen::<f64>()).collect();
    let y: Vec<f64> = x1.iter().map(|v| 500.0 * (4.0 * std::f64::consts::PI * v).sin()).collect();
    named(&[y, x1, x2])
}

/// Columns `[Y, X¹, X²]` of the standardized scenario (population standard
/// deviation).
pub fn synthetic62_data(m: usize, seed: u64) -> Result<SampleMatrix> {
    let mut rng = rng::stream(seed, rng::STREAM_SCENARIO);
    let mut x1: Vec<f64> = (0..m).map(|_| 1.0 / (1.0 - rng.gen::<f64>()).powi(2)).collect();
    let mut x2: Vec<f64> = (0..m).map(|_| rng.gen::<f64>()).collect();
    standardize(&mut x1);
    standardize(&mut x2);
    let mut y: Vec<f64> = x1.iter().map(|v| (4.0 * std::f64::consts::PI * v).sin()).collect();
    standardize(&mut y);
    named(&[y, x1, x2])
}

fn named(columns: &[Vec<f64>]) -> Result<SampleMatrix> {
    let sample = SampleMatrix::from_columns(columns)?;
    SampleMatrix::with_names(sample.into_points(), Some(vec!["Y".into(), "X1".into(), "X2".into()]))
}

/// The four bars of one synthetic run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureBars {
    pub seed: u64,
    pub raw_y_x1: f64,
    pub raw_y_x2: f64,
    pub copula_y_x1: f64,
    pub copula_y_x2: f64,
}

impl FeatureBars {
    pub fn copula_prefers_x1(&self) -> bool {
        self.copula_y_x1 > self.copula_y_x2
    }

    pub fn raw_prefers_x2(&self) -> bool {
        self.raw_y_x1 < self.raw_y_x2
    }
}

/// Raw-MMD and copula Î_b dependence of `Y` with each feature. Both copula
/// values use the same `n_uniform` uniforms.
pub fn feature_bars(x: &SampleMatrix, kernel: &KernelSpec, n_uniform: usize, seed: u64) -> Result<FeatureBars> {
    let y_x1 = x.select_columns(&[0, 1])?;
    let y_x2 = x.select_columns(&[0, 2])?;
    let uniforms = UniformSample::generate(n_uniform, 2, seed)?;
    let reference = BiasedReference::new(kernel, uniforms.points())?;
    let copula = |s: &SampleMatrix| -> Result<f64> {
        reference.biased(empirical_copula_transform_with(s, &CopulaOptions::default())?.points())
    };
    Ok(FeatureBars {
        seed,
        raw_y_x1: dep_raw_mmd(kernel, &y_x1, seed)?.value,
        raw_y_x2: dep_raw_mmd(kernel, &y_x2, seed)?.value,
        copula_y_x1: copula(&y_x1)?,
        copula_y_x2: copula(&y_x2)?,
    })
}

/// Loads the vendored 506 x 14 housing table.
pub fn housing_dataset() -> Result<SampleMatrix> {
    Ok(crate::io::parse_csv(HOUSING_CSV.as_bytes(), true, &[])?.sample)
}

/// Row partition into training and test sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl Split {
    /// First `train_size` rows of a seeded shuffle for training, the rest for testing.
    pub fn seeded(m: usize, train_size: usize, seed: u64) -> Result<Self> {
        if train_size < 2 || train_size + 1 > m {
            return Err(Error::InvalidArgument(format!("train size must lie in 2..{m}, got {train_size}")));
        }
        let mut rows: Vec<usize> = (0..m).collect();
        rows.shuffle(&mut rng::stream(seed, rng::STREAM_SPLIT));
        let test = rows.split_off(train_size);
        Ok(Self { train: rows, test })
    }
}

/// Test-set mean squared error of the least-squares line `y = a x + b`
/// fitted on the training rows.
pub fn housing_regression_eval(x: &SampleMatrix, target: usize, feature: usize, split: &Split) -> Result<f64> {
    if target >= x.d() || feature >= x.d() {
        return Err(Error::InvalidArgument(format!("column index out of range for {} columns", x.d())));
    }
    if split.train.len() < 2 || split.test.is_empty() || split.train.iter().chain(&split.test).any(|&r| r >= x.m()) {
        return Err(Error::InvalidArgument("invalid split".into()));
    }
    let pts = x.points();
    let n = split.train.len() as f64;
    let mx = split.train.iter().map(|&r| pts.get(r, feature)).sum::<f64>() / n;
    let my = split.train.iter().map(|&r| pts.get(r, target)).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &r in &split.train {
        let dx = pts.get(r, feature) - mx;
        sxx += dx * dx;
        sxy += dx * (pts.get(r, target) - my);
    }
    if sxx == 0.0 {
        return Err(Error::Data(format!("feature `{}` is constant on the training rows", x.column_name(feature))));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = split.test.iter().map(|&r| (pts.get(r, target) - slope * pts.get(r, feature) - intercept).powi(2)).sum();
    Ok(sse / split.test.len() as f64)
}

/// One housing split: relevances, picks, regression errors and, optionally,
/// the two feature embeddings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HousingSplit {
    pub seed: u64,
    pub feature_names: Vec<String>,
    pub copula_relevance: Vec<f64>,
    pub raw_relevance: Vec<f64>,
    /// Column index of the max-relevance pick with the copula estimator.
    pub copula_best: usize,
    /// Column index of the greedy mRMR pick (h = 1) with the copula estimator.
    pub copula_mrmr_best: usize,
    pub raw_best: usize,
    /// Test MSE of the univariate regression on each feature.
    pub regression_errors: Vec<f64>,
    pub copula_embedding: Option<EmbeddingResult>,
    pub raw_embedding: Option<EmbeddingResult>,
}

/// Runs the housing experiment on one split. Feature columns are `0..13`.
pub fn housing_split(data: &SampleMatrix, seed: u64, with_embedding: bool) -> Result<HousingSplit> {
    let settings = Scenario::Housing63.settings();
    let train_size = settings.train_size.unwrap_or(300);
    let split = Split::seeded(data.m(), train_size, seed)?;
    let train = data.select_rows(&split.train)?;
    let kernel = KernelSpec::gaussian(settings.sigma)?;

    // ties broken once for the whole table; the raw baseline sees the data as is
    let jittered = match settings.jitter {
        Some(j) => jitter_sample(&train, Jitter::new(j, seed)?)?,
        None => train.clone(),
    };
    let copula = EstimatorConfig::new(EstimatorKind::B, kernel, seed).with_n_uniform(settings.n_uniform);
    let raw = EstimatorConfig::new(EstimatorKind::RawMmdB, kernel, seed);

    let copula_profile = build_profile(&copula, &jittered, HOUSING_TARGET)?;
    let raw_profile = build_profile(&raw, &train, HOUSING_TARGET)?;
    let copula_best = max_relevance(&copula_profile, 1)?.selected[0];
    let copula_mrmr_best = mrmr_select(&copula_profile, 1)?.selected[0];
    let raw_best = max_relevance(&raw_profile, 1)?.selected[0];

    let regression_errors = copula_profile
        .feature_indices
        .iter()
        .map(|&f| housing_regression_eval(data, HOUSING_TARGET, f, &split))
        .collect::<Result<_>>()?;

    let (copula_embedding, raw_embedding) = if with_embedding {
        let all: Vec<usize> = (0..data.d()).collect();
        let labels: Vec<String> = all.iter().map(|&j| data.column_name(j)).collect();
        let embed = |cfg: &EstimatorConfig, x: &SampleMatrix| -> Result<EmbeddingResult> {
            let d = distances_from_pairwise(&pairwise_dependence(cfg, x, &all)?, Some(labels.clone()))?;
            classical_mds(&d, 2)
        };
        (Some(embed(&copula, &jittered)?), Some(embed(&raw, &train)?))
    } else {
        (None, None)
    };

    Ok(HousingSplit {
        seed,
        feature_names: copula_profile.feature_names.clone(),
        copula_relevance: copula_profile.target_deps,
        raw_relevance: raw_profile.target_deps,
        copula_best,
        copula_mrmr_best,
        raw_best,
        regression_errors,
        copula_embedding,
        raw_embedding,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "runs", rename_all = "snake_case")]
pub enum BenchRuns {
    Synthetic(Vec<FeatureBars>),
    Housing(Vec<HousingSplit>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub scenario: Scenario,
    pub settings: ScenarioSettings,
    pub seeds: Vec<u64>,
    pub runs: BenchRuns,
}

/// Runs `scenario` for seeds `first_seed .. first_seed + repeats`. Housing
/// embeddings are computed for the first seed only.
pub fn run_scenario(scenario: Scenario, first_seed: u64, repeats: usize) -> Result<BenchReport> {
    if repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be at least 1".into()));
    }
    let settings = scenario.settings();
    let seeds: Vec<u64> = (0..repeats as u64).map(|i| first_seed.wrapping_add(i)).collect();
    let runs = match scenario {
        Scenario::Synthetic61 | Scenario::Synthetic62 => {
            let kernel = KernelSpec::gaussian(settings.sigma)?;
            let bars = seeds
                .iter()
                .map(|&s| {
                    let x = match scenario {
                        Scenario::Synthetic61 => synthetic61_data(settings.m, s)?,
                        _ => synthetic62_data(settings.m, s)?,
                    };
                    feature_bars(&x, &kernel, settings.n_uniform, s)
                })
                .collect::<Result<_>>()?;
            BenchRuns::Synthetic(bars)
        }
        Scenario::Housing63 => {
            let data = housing_dataset()?;
            let splits = seeds.iter().enumerate().map(|(i, &s)| housing_split(&data, s, i == 0)).collect::<Result<_>>()?;
            BenchRuns::Housing(splits)
        }
    };
    Ok(BenchReport { scenario, settings, seeds, runs })
}

/// Writes plot-ready CSV series for `report` into `dir` and returns the
/// paths written.
pub fn write_plot_series(report: &BenchReport, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut table = |name: String, header: &[&str], rows: Vec<Vec<String>>| -> Result<()> {
        let path = dir.join(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| Error::Data(e.to_string()))?;
        w.write_record(header).map_err(|e| Error::Data(e.to_string()))?;
        for row in rows {
            w.write_record(&row).map_err(|e| Error::Data(e.to_string()))?;
        }
        w.flush()?;
        written.push(path);
        Ok(())
    };
    let prefix = report.scenario.as_str();
    match &report.runs {
        BenchRuns::Synthetic(bars) => {
            let rows = bars
                .iter()
                .map(|b| {
                    vec![b.seed.to_string(), b.raw_y_x1.to_string(), b.raw_y_x2.to_string(), b.copula_y_x1.to_string(), b.copula_y_x2.to_string()]
                })
                .collect();
            table(format!("{prefix}_bars.csv"), &["seed", "raw_y_x1", "raw_y_x2", "copula_y_x1", "copula_y_x2"], rows)?;
        }
        BenchRuns::Housing(splits) => {
            let mut relevance = Vec::new();
            for s in splits {
                for (i, name) in s.feature_names.iter().enumerate() {
                    relevance.push(vec![
                        s.seed.to_string(),
                        (i + 1).to_string(),
                        name.clone(),
                        s.copula_relevance[i].to_string(),
                        s.raw_relevance[i].to_string(),
                        s.regression_errors[i].to_string(),
                    ]);
                }
            }
            table(format!("{prefix}_features.csv"), &["seed", "feature", "name", "copula", "raw_mmd", "regression_mse"], relevance)?;
            if let Some(first) = splits.first() {
                for (tag, emb) in [("copula", &first.copula_embedding), ("raw_mmd", &first.raw_embedding)] {
                    if let Some(e) = emb {
                        let rows = e
                            .labels
                            .iter()
                            .zip(&e.coordinates)
                            .map(|(l, c)| {
                                let mut row = vec![l.clone()];
                                row.extend(c.iter().map(f64::to_string));
                                row.resize(3, "0".into());
                                row
                            })
                            .collect();
                        table(format!("{prefix}_embedding_{tag}.csv"), &["label", "x", "y"], rows)?;
                    }
                }
            }
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(s.as_str().parse::<Scenario>().unwrap(), s);
        }
        let err = "synthetic99".parse::<Scenario>().unwrap_err().to_string();
        assert!(err.contains("synthetic61") && err.contains("housing63"), "{err}");
    }

    #[test]
    fn synthetic_data_shapes_and_scales() {
        let x = synthetic61_data(200, 3).unwrap();
        assert_eq!((x.m(), x.d()), (200, 3));
        assert!(x.column(2).iter().all(|&v| (0.0..500.0).contains(&v)));
        let z = synthetic62_data(500, 3).unwrap();
        for j in 0..3 {
            let c = z.column(j);
            let mean = c.iter().sum::<f64>() / 500.0;
            let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 500.0;
            assert!(mean.abs() < 1e-12 && (var - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn housing_table_has_expected_shape() {
        let x = housing_dataset().unwrap();
        assert_eq!((x.m(), x.d()), (506, 14));
        assert_eq!(x.column_name(12), "LSTAT");
        assert_eq!(x.column_name(HOUSING_TARGET), "MEDV");
    }

    #[test]
    fn split_partitions_rows() {
        let s = Split::seeded(50, 30, 1).unwrap();
        let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
        all.sort();
        assert_eq!(all, (0..50).collect::<Vec<_>>());
        assert_eq!(s, Split::seeded(50, 30, 1).unwrap());
        assert_ne!(s, Split::seeded(50, 30, 2).unwrap());
        assert!(Split::seeded(50, 50, 1).is_err());
    }

    #[test]
    fn regression_on_exact_line_is_exact() {
        let xs: Vec<f64> = (0..40).map(|i| i as f64 * 0.25).collect();
        let ys: Vec<f64> = xs.iter().map(|v| 2.0 * v + 1.0).collect();
        let x = SampleMatrix::from_columns(&[xs, ys]).unwrap();
        let split = Split::seeded(40, 25, 0).unwrap();
        assert!(housing_regression_eval(&x, 1, 0, &split).unwrap() <= 1e-18);
        let flat = SampleMatrix::from_columns(&[vec![3.0; 40], (0..40).map(f64::from).collect()]).unwrap();
        assert!(matches!(housing_regression_eval(&flat, 1, 0, &split), Err(Error::Data(_))));
    }

    #[test]
    fn biased_reference_matches_direct_computation() {
        let x = synthetic61_data(60, 5).unwrap();
        let k = KernelSpec::gaussian(1.0).unwrap();
        let bars = feature_bars(&x, &k, 90, 5).unwrap();
        let u = UniformSample::generate(90, 2, 5).unwrap();
        let direct = crate::dependence::dep_biased(&k, &x.select_columns(&[0, 1]).unwrap(), &u).unwrap().value;
        assert_eq!(bars.copula_y_x1.to_bits(), direct.to_bits());
    }
}
