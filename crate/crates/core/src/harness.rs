//! Seeded multi-dataset, multi-algorithm experiments and swarm-size sweeps.
//!
//! An experiment is a grid of cells (dataset × algorithm × replicate). Cell
//! `r` always runs with seed `base_seed + r`, cells are independent, and
//! results are collected in grid order, so the outputs do not depend on the
//! worker count or completion order. A failing cell produces an error record
//! and never stops the others.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{generate_blobs, load_csv, normalize_minmax, Dataset, LabelColumn};
use crate::error::{ConfigError, HarnessError};
use crate::kmeans::{kmeans_fit, KMeansConfig, KMeansInit};
use crate::pso_cluster::{fit, run_result, Algorithm, ClusterRunConfig, RunResult};
use crate::pso_core::{CogVariant, Inertia, PsoConfig, VelocityClamp};

pub const SUMMARY_FILE: &str = "summary.csv";
pub const RUNS_FILE: &str = "runs.jsonl";

/// Every clustering method the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Kmeans,
    Psoc,
    Lpso,
    Lcpso,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Kmeans, Method::Psoc, Method::Lpso, Method::Lcpso];

    pub fn name(self) -> &'static str {
        match self {
            Method::Kmeans => "kmeans",
            Method::Psoc => "psoc",
            Method::Lpso => "lpso",
            Method::Lcpso => "lcpso",
        }
    }

    fn swarm(self) -> Option<Algorithm> {
        match self {
            Method::Kmeans => None,
            Method::Psoc => Some(Algorithm::Psoc),
            Method::Lpso => Some(Algorithm::Lpso),
            Method::Lcpso => Some(Algorithm::Lcpso),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown algorithm {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum DatasetSource {
    Csv {
        /// Relative paths resolve against the config file's directory.
        path: PathBuf,
        /// `null` means the file has no label column.
        #[serde(default = "default_label_column")]
        label_column: Option<LabelColumn>,
        #[serde(default = "default_true")]
        has_header: bool,
    },
    Blobs {
        k: usize,
        per_cluster: usize,
        dim: usize,
        spread: f64,
        #[serde(default)]
        seed: u64,
    },
}

fn default_label_column() -> Option<LabelColumn> {
    Some(LabelColumn::last())
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    #[serde(flatten)]
    pub source: DatasetSource,
    /// Overrides the name derived from the source.
    #[serde(default)]
    pub name: Option<String>,
    /// Cluster count; defaults to the number of label classes.
    #[serde(default)]
    pub n_clusters: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KMeansParams {
    pub max_iters: usize,
    pub tol: f64,
    pub init: KMeansInit,
}

impl Default for KMeansParams {
    fn default() -> Self {
        Self {
            max_iters: 1000,
            tol: 1e-4,
            init: KMeansInit::RandomPoints,
        }
    }
}

/// Swarm parameters for one algorithm. An unset `swarm_size` means 30 for
/// PSOC/LPSO and `10·k` for LCPSO.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SwarmParams {
    pub swarm_size: Option<usize>,
    pub inertia: Inertia,
    pub ac1: f64,
    pub ac2: f64,
    pub max_iters: usize,
    pub v_max: VelocityClamp,
    pub cog_variant: CogVariant,
    /// LPSO only.
    pub neighborhood_size: usize,
}

impl Default for SwarmParams {
    fn default() -> Self {
        let pso = PsoConfig::default();
        Self {
            swarm_size: None,
            inertia: pso.inertia,
            ac1: pso.ac1,
            ac2: pso.ac2,
            max_iters: pso.max_iters,
            v_max: pso.v_max,
            cog_variant: pso.cog_variant,
            neighborhood_size: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParam {
    SwarmSize,
}

impl std::str::FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "swarm-size" | "swarm_size" => Ok(SweepParam::SwarmSize),
            _ => Err(format!("unsupported sweep parameter {s:?} (only swarm-size)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub param: SweepParam,
    pub values: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetSpec>,
    pub algorithms: Vec<Method>,
    pub replicates: usize,
    pub base_seed: u64,
    /// Min-max scale every dataset to [0, 1] before clustering.
    pub normalize: bool,
    pub workers: usize,
    /// Fill `runtime_ms_median` in the summary. Wall-clock times differ
    /// between runs, so this makes the summary non-reproducible.
    pub record_runtime: bool,
    pub kmeans: KMeansParams,
    pub psoc: SwarmParams,
    pub lpso: SwarmParams,
    pub lcpso: SwarmParams,
    pub sweep: Option<SweepConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            datasets: Vec::new(),
            algorithms: Method::ALL.to_vec(),
            replicates: 10,
            base_seed: 0,
            normalize: true,
            workers: 1,
            record_runtime: false,
            kmeans: KMeansParams::default(),
            psoc: SwarmParams::default(),
            lpso: SwarmParams::default(),
            lcpso: SwarmParams::default(),
            sweep: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Parse(e.to_string()))
    }

    /// Reads a JSON config. Relative dataset paths are rewritten against the
    /// file's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        for spec in &mut cfg.datasets {
            if let DatasetSource::Csv { path, .. } = &mut spec.source {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.replicates == 0 {
            return Err(ConfigError::Invalid("replicates must be >= 1".into()));
        }
        if self.workers == 0 {
            return Err(ConfigError::Invalid("workers must be >= 1".into()));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(ConfigError::Invalid("sweep needs at least one value".into()));
            }
            if !sweep.values.windows(2).all(|w| w[0] < w[1]) {
                return Err(ConfigError::Invalid("sweep values must be strictly increasing".into()));
            }
            if let Some(m) = self.algorithms.iter().find(|m| m.swarm().is_none()) {
                return Err(ConfigError::Invalid(format!("cannot sweep swarm size for {m}")));
            }
        }
        Ok(())
    }

    fn swarm_params(&self, algorithm: Algorithm) -> &SwarmParams {
        match algorithm {
            Algorithm::Psoc => &self.psoc,
            Algorithm::Lpso => &self.lpso,
            Algorithm::Lcpso => &self.lcpso,
        }
    }

    fn cluster_config(&self, algorithm: Algorithm, k: usize, seed: u64) -> ClusterRunConfig {
        let p = self.swarm_params(algorithm);
        let default_size = match algorithm {
            Algorithm::Lcpso => 10 * k,
            _ => 30,
        };
        let pso = PsoConfig {
            swarm_size: p.swarm_size.unwrap_or(default_size),
            inertia: p.inertia,
            ac1: p.ac1,
            ac2: p.ac2,
            max_iters: p.max_iters,
            v_max: p.v_max,
            seed,
            cog_variant: p.cog_variant,
        };
        ClusterRunConfig {
            lpso_neighborhood_size: p.neighborhood_size,
            ..ClusterRunConfig::new(algorithm, k, pso)
        }
    }
}

/// Loads (or generates) a dataset and applies normalization if asked.
/// Returns the dataset and its cluster count.
pub fn resolve_dataset(spec: &DatasetSpec, normalize: bool) -> Result<(Dataset, usize), HarnessError> {
    let ds = match &spec.source {
        DatasetSource::Csv {
            path,
            label_column,
            has_header,
        } => load_csv(path, label_column.as_ref(), *has_header)?,
        DatasetSource::Blobs {
            k,
            per_cluster,
            dim,
            spread,
            seed,
        } => generate_blobs(*k, *per_cluster, *dim, *spread, *seed)?,
    };
    let ds = match &spec.name {
        Some(name) => ds.with_name(name.clone()),
        None => ds,
    };
    let ds = if normalize { normalize_minmax(&ds).0 } else { ds };
    let k = match (spec.n_clusters, ds.num_classes()) {
        (Some(k), _) => k,
        (None, Some(c)) => c,
        (None, None) => {
            return Err(ConfigError::Invalid(format!(
                "dataset {} has no labels; set n_clusters explicitly",
                ds.name()
            ))
            .into())
        }
    };
    Ok((ds, k))
}

/// Outcome of one (dataset, algorithm, replicate) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub dataset: String,
    pub algorithm: Method,
    pub replicate: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub result: Option<RunResult>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

/// One summary line per (dataset, algorithm). Statistics cover the
/// `replicates` runs that succeeded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub dataset: String,
    pub algorithm: Method,
    pub ari_median: Option<f64>,
    pub ari_mean: Option<f64>,
    pub ari_std: Option<f64>,
    /// Median final quantization error.
    pub fitness_median: Option<f64>,
    pub runtime_ms_median: Option<f64>,
    pub replicates: usize,
    pub seed_base: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<SummaryRow>,
    pub runs: Vec<RunRecord>,
}

impl ExperimentReport {
    pub fn failed_cells(&self) -> usize {
        self.runs.iter().filter(|r| r.error.is_some()).count()
    }

    pub fn row(&self, dataset: &str, algorithm: Method) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.dataset == dataset && r.algorithm == algorithm)
    }

    pub fn write_summary_csv(&self, path: impl AsRef<Path>) -> Result<(), HarnessError> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
        for row in &self.rows {
            w.serialize(row).map_err(|e| csv_io(path, e))?;
        }
        w.flush().map_err(|source| io(path, source))
    }

    pub fn write_runs_jsonl(&self, path: impl AsRef<Path>) -> Result<(), HarnessError> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|source| io(path, source))?;
        let mut out = BufWriter::new(file);
        for run in &self.runs {
            let line = serde_json::to_string(run).map_err(|e| HarnessError::Parse(e.to_string()))?;
            writeln!(out, "{line}").map_err(|source| io(path, source))?;
        }
        out.flush().map_err(|source| io(path, source))
    }

    /// Writes `summary.csv` and `runs.jsonl` into `dir`, creating it.
    pub fn write_outputs(&self, dir: impl AsRef<Path>) -> Result<(), HarnessError> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|source| io(dir, source))?;
        self.write_summary_csv(dir.join(SUMMARY_FILE))?;
        self.write_runs_jsonl(dir.join(RUNS_FILE))
    }
}

pub fn read_summary_csv(path: impl AsRef<Path>) -> Result<Vec<SummaryRow>, HarnessError> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_io(path, e))?;
    r.deserialize()
        .collect::<Result<Vec<SummaryRow>, _>>()
        .map_err(|e| csv_io(path, e))
}

fn io(path: &Path, source: std::io::Error) -> HarnessError {
    HarnessError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_io(path: &Path, e: csv::Error) -> HarnessError {
    HarnessError::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e.to_string()),
    }
}

fn run_cell(ds: &Dataset, k: usize, method: Method, seed: u64, cfg: &ExperimentConfig) -> Result<RunResult, HarnessError> {
    let result = match method.swarm() {
        None => {
            let started = Instant::now();
            let kcfg = KMeansConfig {
                k,
                max_iters: cfg.kmeans.max_iters,
                tol: cfg.kmeans.tol,
                seed,
                init: cfg.kmeans.init,
            };
            let fitted = kmeans_fit(ds, &kcfg)?;
            fitted.partition.validate(ds.len())?;
            let elapsed = started.elapsed().as_secs_f64() * 1e3;
            run_result(
                ds,
                method.name(),
                seed,
                fitted.centroids.view(),
                &fitted.partition,
                fitted.sse_trace,
                elapsed,
                serde_json::to_value(&kcfg).expect("config serializes"),
            )
        }
        Some(algorithm) => {
            let ccfg = cfg.cluster_config(algorithm, k, seed);
            let fitted = fit(ds, &ccfg)?;
            fitted.partition.validate(ds.len())?;
            fitted.result
        }
    };
    Ok(result)
}

fn median(sorted: &[f64]) -> Option<f64> {
    let n = sorted.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(sorted[n / 2]),
        _ => Some((sorted[n / 2 - 1] + sorted[n / 2]) / 2.0),
    }
}

/// Median, mean and sample standard deviation.
pub fn describe(values: &[f64]) -> Option<(f64, f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Some((median(&sorted)?, mean, std))
}

fn summarize(dataset: &str, method: Method, runs: &[&RunRecord], cfg: &ExperimentConfig) -> SummaryRow {
    let ok: Vec<&RunResult> = runs.iter().filter_map(|r| r.result.as_ref()).collect();
    let aris: Vec<f64> = ok.iter().filter_map(|r| r.ari).collect();
    let ari = describe(&aris);
    let mut fitness: Vec<f64> = ok.iter().map(|r| r.quantization_error).collect();
    fitness.sort_by(f64::total_cmp);
    let mut runtimes: Vec<f64> = ok.iter().map(|r| r.runtime_ms).collect();
    runtimes.sort_by(f64::total_cmp);
    SummaryRow {
        dataset: dataset.to_string(),
        algorithm: method,
        ari_median: ari.map(|s| s.0),
        ari_mean: ari.map(|s| s.1),
        ari_std: ari.map(|s| s.2),
        fitness_median: median(&fitness),
        runtime_ms_median: if cfg.record_runtime { median(&runtimes) } else { None },
        replicates: ok.len(),
        seed_base: cfg.base_seed,
    }
}

/// Runs every (dataset, algorithm, replicate) cell and aggregates one
/// summary row per (dataset, algorithm).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    cfg.validate()?;
    let datasets: Vec<(String, Result<(Dataset, usize), String>)> = cfg
        .datasets
        .iter()
        .enumerate()
        .map(|(i, spec)| match resolve_dataset(spec, cfg.normalize) {
            Ok((ds, k)) => (ds.name().to_string(), Ok((ds, k))),
            Err(e) => (
                spec.name.clone().unwrap_or_else(|| format!("dataset-{i}")),
                Err(e.to_string()),
            ),
        })
        .collect();

    let cells: Vec<(usize, Method, usize)> = (0..datasets.len())
        .flat_map(|d| {
            cfg.algorithms
                .iter()
                .flat_map(move |&m| (0..cfg.replicates).map(move |r| (d, m, r)))
        })
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| ConfigError::Invalid(format!("thread pool: {e}")))?;
    let runs: Vec<RunRecord> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(d, method, replicate)| {
                let seed = cfg.base_seed.wrapping_add(replicate as u64);
                let (name, loaded) = &datasets[d];
                let outcome = match loaded {
                    Ok((ds, k)) => run_cell(ds, *k, method, seed, cfg).map_err(|e| e.to_string()),
                    Err(e) => Err(e.clone()),
                };
                let (result, error) = match outcome {
                    Ok(r) => (Some(r), None),
                    Err(e) => (None, Some(e)),
                };
                RunRecord {
                    dataset: name.clone(),
                    algorithm: method,
                    replicate,
                    seed,
                    result,
                    error,
                }
            })
            .collect()
    });

    let mut rows = Vec::new();
    for (d, (name, _)) in datasets.iter().enumerate() {
        for &method in &cfg.algorithms {
            let cell_runs: Vec<&RunRecord> = cells
                .iter()
                .zip(&runs)
                .filter(|((cd, cm, _), _)| *cd == d && *cm == method)
                .map(|(_, r)| r)
                .collect();
            rows.push(summarize(name, method, &cell_runs, cfg));
        }
    }
    Ok(ExperimentReport { rows, runs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub dataset: String,
    pub algorithm: Method,
    pub swarm_size: usize,
    pub ari_median: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
    /// One experiment per sweep value, in sweep order.
    pub experiments: Vec<(usize, ExperimentReport)>,
}

impl SweepReport {
    pub fn failed_cells(&self) -> usize {
        self.experiments.iter().map(|(_, e)| e.failed_cells()).sum()
    }

    /// Writes one `sweep_<dataset>_<algorithm>.csv` per pair with columns
    /// `swarm_size,ari_median`, plus every run in `runs.jsonl`.
    pub fn write_outputs(&self, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>, HarnessError> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|source| io(dir, source))?;
        let mut written = Vec::new();
        let mut pairs: Vec<(String, Method)> = Vec::new();
        for p in &self.points {
            if !pairs.contains(&(p.dataset.clone(), p.algorithm)) {
                pairs.push((p.dataset.clone(), p.algorithm));
            }
        }
        for (dataset, method) in pairs {
            let path = dir.join(format!("sweep_{}_{}.csv", sanitize(&dataset), method));
            let mut w = csv::Writer::from_path(&path).map_err(|e| csv_io(&path, e))?;
            w.write_record(["swarm_size", "ari_median"]).map_err(|e| csv_io(&path, e))?;
            for p in self.points.iter().filter(|p| p.dataset == dataset && p.algorithm == method) {
                let ari = p.ari_median.map(|a| a.to_string()).unwrap_or_default();
                w.write_record([p.swarm_size.to_string(), ari]).map_err(|e| csv_io(&path, e))?;
            }
            w.flush().map_err(|source| io(&path, source))?;
            written.push(path);
        }
        let runs = ExperimentReport {
            rows: Vec::new(),
            runs: self.experiments.iter().flat_map(|(_, e)| e.runs.clone()).collect(),
        };
        runs.write_runs_jsonl(dir.join(RUNS_FILE))?;
        Ok(written)
    }
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Repeats the experiment once per swarm size in `cfg.sweep`, overriding the
/// swarm size of every listed algorithm.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepReport, HarnessError> {
    cfg.validate()?;
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| ConfigError::Invalid("config has no sweep section".into()))?;
    let mut points = Vec::new();
    let mut experiments = Vec::new();
    for &size in &sweep.values {
        let mut one = cfg.clone();
        one.sweep = None;
        for p in [&mut one.psoc, &mut one.lpso, &mut one.lcpso] {
            p.swarm_size = Some(size);
        }
        let report = run_experiment(&one)?;
        points.extend(report.rows.iter().map(|r| SweepPoint {
            dataset: r.dataset.clone(),
            algorithm: r.algorithm,
            swarm_size: size,
            ari_median: r.ari_median,
        }));
        experiments.push((size, report));
    }
    Ok(SweepReport { points, experiments })
}
