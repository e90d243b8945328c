//! Dataset ingestion, run configuration and result documents.

use std::fmt;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dependence::{DependenceEstimate, EstimatorKind};
use crate::embed::{DissimilarityMatrix, EmbeddingResult};
use crate::error::{Error, Result};
use crate::inference::TestResult;
use crate::kernel::{KernelFamily, KernelSpec};
use crate::matrix::{Points, SampleMatrix};
use crate::scenarios::BenchReport;
use crate::select::{DependenceProfile, SelectionResult};

pub const SCHEMA_VERSION: u32 = 1;

/// A column chosen by header name or by zero-based position.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnSelector {
    Index(usize),
    Name(String),
}

impl ColumnSelector {
    /// Digits select by position, anything else by name.
    pub fn parse(s: &str) -> Self {
        let s = s.trim();
        match s.parse::<usize>() {
            Ok(i) => ColumnSelector::Index(i),
            Err(_) => ColumnSelector::Name(s.to_string()),
        }
    }

    pub fn resolve(&self, names: &[String]) -> Result<usize> {
        match self {
            ColumnSelector::Index(i) if *i < names.len() => Ok(*i),
            ColumnSelector::Index(i) => {
                Err(Error::Config(format!("column index {i} out of range ({} columns)", names.len())))
            }
            ColumnSelector::Name(n) => names
                .iter()
                .position(|c| c == n)
                .ok_or_else(|| Error::Config(format!("no column named `{n}`"))),
        }
    }
}

impl fmt::Display for ColumnSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnSelector::Index(i) => write!(f, "{i}"),
            ColumnSelector::Name(n) => f.write_str(n),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoadedCsv {
    pub sample: SampleMatrix,
    pub rows_read: usize,
    /// Non-fatal notes, e.g. skipped blank lines.
    pub diagnostics: Vec<String>,
}

/// Reads a numeric CSV file. See [`parse_csv`].
pub fn load_csv(path: impl AsRef<Path>, has_header: bool, columns: &[ColumnSelector]) -> Result<LoadedCsv> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;
    parse_csv(file, has_header, columns)
}

/// Parses comma-separated reals. An empty `columns` selects every column.
///
/// Rows are numbered from 1 counting data rows only; the error message also
/// gives the physical line number.
pub fn parse_csv<R: Read>(reader: R, has_header: bool, columns: &[ColumnSelector]) -> Result<LoadedCsv> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();
    let mut diagnostics = Vec::new();

    let header: Option<Vec<String>> = if has_header {
        match records.next() {
            Some(rec) => Some(rec.map_err(csv_error)?.iter().map(str::to_string).collect()),
            None => return Err(Error::Data("empty file".into())),
        }
    } else {
        None
    };

    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut lines: Vec<u64> = Vec::new();
    for rec in records {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.iter().all(str::is_empty) {
            diagnostics.push(format!("skipped blank line {line}"));
            continue;
        }
        rows.push(rec.iter().map(str::to_string).collect());
        lines.push(line);
    }
    let width = header.as_ref().map(Vec::len).or_else(|| rows.first().map(Vec::len)).unwrap_or(0);
    let names: Vec<String> = header.clone().unwrap_or_else(|| (0..width).map(|j| format!("x{j}")).collect());

    let selected: Vec<usize> = if columns.is_empty() {
        (0..width).collect()
    } else {
        columns.iter().map(|c| c.resolve(&names)).collect::<Result<_>>()?
    };

    let mut data = Vec::with_capacity(rows.len() * selected.len());
    for (r, (row, line)) in rows.iter().zip(&lines).enumerate() {
        if row.len() != width {
            return Err(Error::Data(format!("row {} (line {line}) has {} fields, expected {width}", r + 1, row.len())));
        }
        for &j in &selected {
            let cell = &row[j];
            let value: f64 = cell.parse().map_err(|_| {
                Error::Data(format!("row {} (line {line}), column `{}`: cannot parse `{cell}` as a number", r + 1, names[j]))
            })?;
            if !value.is_finite() {
                return Err(Error::Data(format!("row {} (line {line}), column `{}`: non-finite value `{cell}`", r + 1, names[j])));
            }
            data.push(value);
        }
    }
    if rows.len() < 2 {
        return Err(Error::TooFewObservations { required: 2, actual: rows.len() });
    }
    let points = Points::new(data, selected.len())?;
    let selected_names = selected.iter().map(|&j| names[j].clone()).collect();
    Ok(LoadedCsv { sample: SampleMatrix::with_names(points, Some(selected_names))?, rows_read: rows.len(), diagnostics })
}

fn csv_error(e: csv::Error) -> Error {
    Error::Data(format!("malformed CSV: {e}"))
}

/// Writes `sample` as CSV with a header row. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_csv(path: impl AsRef<Path>, sample: &SampleMatrix) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    let names: Vec<String> = (0..sample.d()).map(|j| sample.column_name(j)).collect();
    w.write_record(&names).map_err(csv_error)?;
    for row in sample.points().rows() {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Hex-encoded SHA-256 of a file, for checking local copies of datasets.
pub fn sha256_file(path: impl AsRef<Path>) -> Result<String> {
    let bytes = std::fs::read(path)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Everything a CLI run needs; every field has a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub kernel: KernelSpec,
    /// `None` lets each command pick its default.
    pub estimator: Option<EstimatorKind>,
    pub seed: u64,
    /// Uniform sample size for the biased estimator (default: m).
    pub n_uniform: Option<usize>,
    pub permutations: usize,
    pub alpha: f64,
    pub h: usize,
    pub dims: usize,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub has_header: bool,
    pub columns: Vec<ColumnSelector>,
    pub target: Option<ColumnSelector>,
    pub scenario: Option<String>,
    /// Number of consecutive seeds a bench scenario is repeated for.
    pub repeats: usize,
    pub train_size: usize,
    /// Tie-breaking jitter magnitude (in units of the column's smallest gap).
    pub jitter: Option<f64>,
    /// Directory for plot-ready CSV series written by `bench`.
    pub plot_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            kernel: KernelSpec::default(),
            estimator: None,
            seed: 0,
            n_uniform: None,
            permutations: 199,
            alpha: 0.05,
            h: 1,
            dims: 2,
            input: None,
            output: None,
            has_header: true,
            columns: Vec::new(),
            target: None,
            scenario: None,
            repeats: 1,
            train_size: 300,
            jitter: None,
            plot_dir: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.as_ref().display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_uniform == Some(0) {
            return bad("n_uniform must be positive".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0,1), got {}", self.alpha));
        }
        if self.permutations < crate::inference::MIN_PERMUTATIONS {
            return bad(format!("permutations must be at least {}", crate::inference::MIN_PERMUTATIONS));
        }
        if self.h == 0 {
            return bad("h must be at least 1".into());
        }
        if self.dims == 0 {
            return bad("dims must be at least 1".into());
        }
        if self.repeats == 0 {
            return bad("repeats must be at least 1".into());
        }
        if self.train_size < 2 {
            return bad("train_size must be at least 2".into());
        }
        if let Some(j) = self.jitter {
            if !(j.is_finite() && j > 0.0) {
                return bad(format!("jitter must be positive, got {j}"));
            }
        }
        if self.kernel.family() == KernelFamily::Laplacian && self.estimator == Some(EstimatorKind::SemiAnalyticUSquared) {
            return bad("the semi-analytic estimator requires the gaussian kernel".into());
        }
        Ok(())
    }

    pub fn with_sigma(mut self, sigma: f64) -> Result<Self> {
        self.kernel = KernelSpec::new(self.kernel.family(), sigma)?;
        Ok(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Estimate,
    Test,
    Select,
    Embed,
    Bench,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Estimate { estimate: DependenceEstimate, columns: Vec<String> },
    Test { result: TestResult, columns: Vec<String> },
    Select { profile: DependenceProfile, max_relevance: SelectionResult, mrmr: SelectionResult },
    Embed { dissimilarities: DissimilarityMatrix, embedding: EmbeddingResult },
    Bench(BenchReport),
}

/// Output of one CLI command. Numbers are written in shortest round-trip
/// decimal form, so parsing the document recovers every `f64` exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub schema_version: u32,
    pub command: CommandKind,
    pub config: RunConfig,
    pub payload: Payload,
    pub warnings: Vec<String>,
    pub duration_secs: f64,
}

impl ResultDocument {
    pub fn new(command: CommandKind, config: RunConfig, payload: Payload) -> Self {
        Self { schema_version: SCHEMA_VERSION, command, config, payload, warnings: Vec::new(), duration_secs: 0.0 }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Numerical(format!("cannot serialize result: {e}")))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Data(format!("invalid result document: {e}")))
    }

    /// The payload alone; identical across repeated runs of one config.
    pub fn payload_json(&self) -> Result<String> {
        serde_json::to_string(&self.payload).map_err(|e| Error::Numerical(format!("cannot serialize payload: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SMALL: &str = "a,b\n1.5,2\n-3,4e2\n0.25,7\n";

    #[test]
    fn parses_header_and_values() {
        let loaded = parse_csv(SMALL.as_bytes(), true, &[]).unwrap();
        assert_eq!(loaded.sample.m(), 3);
        assert_eq!(loaded.sample.d(), 2);
        assert_eq!(loaded.sample.column_names().unwrap(), &["a".to_string(), "b".to_string()]);
        assert_eq!(loaded.sample.column(1), vec![2.0, 400.0, 7.0]);
    }

    #[test]
    fn selects_columns_by_name_or_index() {
        let loaded = parse_csv(SMALL.as_bytes(), true, &[ColumnSelector::parse("b"), ColumnSelector::parse("0")]).unwrap();
        assert_eq!(loaded.sample.points().row(0), &[2.0, 1.5]);
        assert!(parse_csv(SMALL.as_bytes(), true, &[ColumnSelector::parse("zzz")]).is_err());
        assert!(parse_csv(SMALL.as_bytes(), true, &[ColumnSelector::Index(5)]).is_err());
    }

    #[test]
    fn bad_cell_names_row_and_column() {
        let text = "a,b\n1,2\n3,4\n5,6\n7,8\n9,abc\n";
        let err = parse_csv(text.as_bytes(), true, &[]).unwrap_err().to_string();
        assert!(err.contains("row 5"), "{err}");
        assert!(err.contains("`b`"), "{err}");
        let err = parse_csv("a\n1\nNaN\n".as_bytes(), true, &[]).unwrap_err().to_string();
        assert!(err.contains("non-finite"), "{err}");
        assert!(matches!(parse_csv("a\n1\n".as_bytes(), true, &[]), Err(Error::TooFewObservations { .. })));
    }

    #[test]
    fn headerless_files_get_synthesized_names() {
        let loaded = parse_csv("1,2\n3,4\n\n5,6\n".as_bytes(), false, &[]).unwrap();
        assert_eq!(loaded.sample.column_name(1), "x1");
        assert_eq!(loaded.rows_read, 3);
    }

    #[test]
    fn config_round_trips_through_toml() {
        let mut cfg = RunConfig::default().with_sigma(0.75).unwrap();
        cfg.columns = vec![ColumnSelector::Name("LSTAT".into()), ColumnSelector::Index(3)];
        cfg.target = Some(ColumnSelector::Name("MEDV".into()));
        cfg.n_uniform = Some(1234);
        cfg.jitter = Some(0.5);
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn config_validation() {
        assert!(RunConfig::from_toml_str("alpha = 1.5").is_err());
        assert!(RunConfig::from_toml_str("permutations = 5").is_err());
        assert!(RunConfig::from_toml_str("bogus = 1").is_err());
        assert!(RunConfig::from_toml_str("[kernel]\nfamily = \"gaussian\"\nsigma = -1.0").is_err());
        let cfg = RunConfig::from_toml_str("seed = 7\n[kernel]\nfamily = \"gaussian\"\nsigma = 1.0").unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.kernel.sigma(), 1.0);
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_bitwise(values in proptest::collection::vec(proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO, 6..60)) {
            let n = values.len() / 3 * 3;
            let points = Points::new(values[..n].to_vec(), 3).unwrap();
            let sample = SampleMatrix::with_names(points, Some(vec!["p".into(), "q".into(), "r".into()])).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("x.csv");
            write_csv(&path, &sample).unwrap();
            let back = load_csv(&path, true, &[]).unwrap().sample;
            let a: Vec<u64> = sample.points().as_slice().iter().map(|v| v.to_bits()).collect();
            let b: Vec<u64> = back.points().as_slice().iter().map(|v| v.to_bits()).collect();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn result_numbers_round_trip(value in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL, seed in any::<u64>()) {
            let estimate = DependenceEstimate {
                value,
                estimator: EstimatorKind::B,
                m: 10,
                n: 10,
                kernel: KernelSpec::default(),
                seed,
                generator: "chacha8".into(),
            };
            let doc = ResultDocument::new(CommandKind::Estimate, RunConfig::default(), Payload::Estimate { estimate, columns: vec![] });
            let back = ResultDocument::from_json(&doc.to_json().unwrap()).unwrap();
            prop_assert_eq!(back, doc);
        }
    }
}
