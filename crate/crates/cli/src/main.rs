//! `copdep` command-line front end.
//!
//! Every command reads a [`RunConfig`] (from `--config` and/or flags), runs
//! one pipeline and writes a JSON [`ResultDocument`] to `--output` or stdout.
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
//! inconsistency.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use copdep::copula::{jitter_sample, Jitter};
use copdep::dependence::{EstimatorConfig, EstimatorKind};
use copdep::embed::{classical_mds, distances_from_pairwise};
use copdep::inference::{independence_test_with, permutation_statistic};
use copdep::io::{load_csv, ColumnSelector, CommandKind, Payload, ResultDocument, RunConfig};
use copdep::kernel::{KernelFamily, KernelSpec};
use copdep::scenarios::{run_scenario, write_plot_series, Scenario};
use copdep::select::{build_profile, max_relevance, mrmr_select, pairwise_dependence};
use copdep::{Error, ErrorClass, Result, SampleMatrix};

#[derive(Parser, Debug)]
#[command(name = "copdep", version, about = "Copula-based kernel dependence measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate the dependence among the selected columns.
    Estimate(Opts),
    /// Permutation test of mutual independence.
    Test(Opts),
    /// Rank features by dependence with a target (max-relevance and mRMR).
    Select(Opts),
    /// Embed columns in the plane with exp(-dependence) as dissimilarity.
    Embed(Opts),
    /// Run a built-in benchmark scenario.
    Bench(Opts),
}

#[derive(Args, Debug, Default)]
struct Opts {
    /// TOML run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input CSV file.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Input has no header row.
    #[arg(long)]
    no_header: bool,
    /// Comma-separated column names or zero-based indices.
    #[arg(long, value_delimiter = ',')]
    columns: Vec<String>,
    /// Target column (name or zero-based index) for `select`.
    #[arg(long)]
    target: Option<String>,
    /// u_squared, b, semi_analytic_u_squared or raw_mmd_b.
    #[arg(long)]
    estimator: Option<EstimatorKind>,
    /// Kernel family: gaussian or laplacian.
    #[arg(long)]
    kernel: Option<KernelFamily>,
    /// Kernel bandwidth (default sqrt(1/12)).
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of uniform points for the biased estimator (default m).
    #[arg(long)]
    n_uniform: Option<usize>,
    #[arg(long)]
    permutations: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Subset size for `select`.
    #[arg(long)]
    h: Option<usize>,
    /// Embedding dimension for `embed`.
    #[arg(long)]
    dims: Option<usize>,
    /// Scenario for `bench`: synthetic61, synthetic62 or housing63.
    #[arg(long)]
    scenario: Option<String>,
    /// Number of consecutive seeds for `bench`.
    #[arg(long)]
    repeats: Option<usize>,
    /// Tie-breaking jitter magnitude, in units of each column's smallest gap.
    #[arg(long)]
    jitter: Option<f64>,
    /// Directory for plot-ready CSV series from `bench`.
    #[arg(long)]
    plot_dir: Option<PathBuf>,
    /// Output file for the result document (default stdout).
    #[arg(long)]
    output: Option<PathBuf>,
}

impl Opts {
    fn into_config(self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if self.kernel.is_some() || self.sigma.is_some() {
            let family = self.kernel.unwrap_or(cfg.kernel.family());
            cfg.kernel = KernelSpec::new(family, self.sigma.unwrap_or(cfg.kernel.sigma()))?;
        }
        macro_rules! set {
            ($($field:ident),*) => { $(if let Some(v) = self.$field { cfg.$field = v; })* };
        }
        macro_rules! set_opt {
            ($($field:ident),*) => { $(if self.$field.is_some() { cfg.$field = self.$field; })* };
        }
        set!(seed, permutations, alpha, h, dims, repeats);
        set_opt!(estimator, n_uniform, input, output, scenario, jitter, plot_dir);
        if self.no_header {
            cfg.has_header = false;
        }
        if !self.columns.is_empty() {
            cfg.columns = self.columns.iter().map(|c| ColumnSelector::parse(c)).collect();
        }
        if let Some(t) = &self.target {
            cfg.target = Some(ColumnSelector::parse(t));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

struct Run {
    payload: Payload,
    warnings: Vec<String>,
}

fn load(cfg: &RunConfig) -> Result<(SampleMatrix, Vec<String>)> {
    let path = cfg.input.as_ref().ok_or_else(|| Error::Config("--input is required".into()))?;
    let loaded = load_csv(path, cfg.has_header, &cfg.columns)?;
    let mut sample = loaded.sample;
    if let Some(j) = cfg.jitter {
        sample = jitter_sample(&sample, Jitter::new(j, cfg.seed)?)?;
    }
    Ok((sample, loaded.diagnostics))
}

fn estimator(cfg: &RunConfig, default: EstimatorKind) -> EstimatorConfig {
    let mut e = EstimatorConfig::new(cfg.estimator.unwrap_or(default), cfg.kernel, cfg.seed);
    e.n_uniform = cfg.n_uniform;
    e
}

fn columns_of(x: &SampleMatrix) -> Vec<String> {
    (0..x.d()).map(|j| x.column_name(j)).collect()
}

fn estimate(cfg: &RunConfig) -> Result<Run> {
    let (x, mut warnings) = load(cfg)?;
    if x.d() == 1 {
        warnings.push("a single column carries no dependence; the estimate only reflects sampling noise".into());
    }
    let estimate = estimator(cfg, EstimatorKind::B).estimate(&x)?;
    Ok(Run { payload: Payload::Estimate { estimate, columns: columns_of(&x) }, warnings })
}

fn test(cfg: &RunConfig) -> Result<Run> {
    let (x, warnings) = load(cfg)?;
    if x.d() < 2 {
        return Err(Error::Config("an independence test needs at least two columns".into()));
    }
    let statistic = match cfg.estimator {
        Some(_) => estimator(cfg, EstimatorKind::B),
        None => permutation_statistic(&cfg.kernel, cfg.seed),
    };
    let result = independence_test_with(&statistic, &x, cfg.permutations, cfg.alpha)?;
    Ok(Run { payload: Payload::Test { result, columns: columns_of(&x) }, warnings })
}

fn select(cfg: &RunConfig) -> Result<Run> {
    let target = cfg.target.clone().ok_or_else(|| Error::Config("--target is required".into()))?;
    let mut with_target = cfg.clone();
    if !cfg.columns.is_empty() && !cfg.columns.contains(&target) {
        with_target.columns.push(target.clone());
    }
    let (x, warnings) = load(&with_target)?;
    let target_index = if cfg.columns.is_empty() {
        target.resolve(&columns_of(&x))?
    } else {
        with_target.columns.iter().position(|c| c == &target).expect("target was appended above")
    };
    let profile = build_profile(&estimator(cfg, EstimatorKind::B), &x, target_index)?;
    let max_relevance = max_relevance(&profile, cfg.h)?;
    let mrmr = mrmr_select(&profile, cfg.h)?;
    Ok(Run { payload: Payload::Select { profile, max_relevance, mrmr }, warnings })
}

fn embed(cfg: &RunConfig) -> Result<Run> {
    let (x, warnings) = load(cfg)?;
    let all: Vec<usize> = (0..x.d()).collect();
    let pairwise = pairwise_dependence(&estimator(cfg, EstimatorKind::B), &x, &all)?;
    let dissimilarities = distances_from_pairwise(&pairwise, Some(columns_of(&x)))?;
    let embedding = classical_mds(&dissimilarities, cfg.dims)?;
    let mut warnings = warnings;
    if embedding.truncated {
        warnings.push(format!("only {} positive eigenvalues; embedding truncated", embedding.dims()));
    }
    Ok(Run { payload: Payload::Embed { dissimilarities, embedding }, warnings })
}

fn bench(cfg: &RunConfig) -> Result<Run> {
    let name = cfg.scenario.as_deref().ok_or_else(|| Error::Config("--scenario is required".into()))?;
    let scenario: Scenario = name.parse()?;
    let report = run_scenario(scenario, cfg.seed, cfg.repeats)?;
    let mut warnings = Vec::new();
    if let Some(dir) = &cfg.plot_dir {
        for path in write_plot_series(&report, dir)? {
            warnings.push(format!("wrote {}", path.display()));
        }
    }
    Ok(Run { payload: Payload::Bench(report), warnings })
}

fn run(cli: Cli) -> Result<()> {
    let started = Instant::now();
    let (kind, opts) = match cli.command {
        Command::Estimate(o) => (CommandKind::Estimate, o),
        Command::Test(o) => (CommandKind::Test, o),
        Command::Select(o) => (CommandKind::Select, o),
        Command::Embed(o) => (CommandKind::Embed, o),
        Command::Bench(o) => (CommandKind::Bench, o),
    };
    let cfg = opts.into_config()?;
    let outcome = match kind {
        CommandKind::Estimate => estimate(&cfg)?,
        CommandKind::Test => test(&cfg)?,
        CommandKind::Select => select(&cfg)?,
        CommandKind::Embed => embed(&cfg)?,
        CommandKind::Bench => bench(&cfg)?,
    };
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    let output = cfg.output.clone();
    let mut doc = ResultDocument::new(kind, cfg, outcome.payload);
    doc.warnings = outcome.warnings;
    doc.duration_secs = started.elapsed().as_secs_f64();
    let json = doc.to_json()?;
    match output {
        Some(path) => std::fs::write(path, json + "\n")?,
        None => println!("{json}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Config => 2,
                ErrorClass::Data => 3,
                ErrorClass::Numerical => 4,
            })
        }
    }
}
