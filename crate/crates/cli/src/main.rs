use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use lcpso::generate_blobs;
use lcpso::harness::{run_experiment, run_sweep, ExperimentConfig, SweepConfig, SweepParam, SUMMARY_FILE};

/// Seeded clustering experiments: k-means and three PSO clustering variants.
#[derive(Parser)]
#[command(name = "lcpso", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (dataset, algorithm, replicate) cell of a config.
    Run {
        #[command(flatten)]
        common: Common,
        /// Overrides `base_seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Repeat the experiment for several swarm sizes.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, requires = "values")]
        param: Option<SweepParam>,
        /// Comma-separated, strictly increasing.
        #[arg(long, value_delimiter = ',', requires = "param")]
        values: Option<Vec<usize>>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write a labelled Gaussian blob dataset as CSV.
    GenBlobs {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        per_cluster: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 0.05)]
        spread: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "results")]
    out_dir: PathBuf,
    /// Overrides `workers`.
    #[arg(long)]
    workers: Option<usize>,
}

fn load(common: &Common, seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_file(&common.config)
        .with_context(|| format!("reading {}", common.config.display()))?;
    if let Some(w) = common.workers {
        cfg.workers = w;
    }
    if let Some(s) = seed {
        cfg.base_seed = s;
    }
    Ok(cfg)
}

fn report_failures(failed: usize) -> ExitCode {
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        eprintln!("{failed} cell(s) failed; see runs.jsonl");
        ExitCode::FAILURE
    }
}

fn main() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Run { common, seed } => {
            let mut cfg = load(&common, seed)?;
            cfg.sweep = None;
            let report = run_experiment(&cfg)?;
            report.write_outputs(&common.out_dir)?;
            for row in &report.rows {
                let ari = row.ari_median.map_or("-".to_string(), |a| format!("{a:.4}"));
                println!("{:<24} {:<7} ari_median={ari} n={}", row.dataset, row.algorithm, row.replicates);
            }
            println!("wrote {}", common.out_dir.join(SUMMARY_FILE).display());
            Ok(report_failures(report.failed_cells()))
        }
        Command::Sweep {
            common,
            param,
            values,
            seed,
        } => {
            let mut cfg = load(&common, seed)?;
            if let (Some(param), Some(values)) = (param, values) {
                cfg.sweep = Some(SweepConfig { param, values });
            }
            if cfg.sweep.is_none() {
                bail!("no sweep given: pass --param and --values or add a sweep section to the config");
            }
            let report = run_sweep(&cfg)?;
            for path in report.write_outputs(&common.out_dir)? {
                println!("wrote {}", path.display());
            }
            Ok(report_failures(report.failed_cells()))
        }
        Command::GenBlobs {
            k,
            per_cluster,
            dim,
            spread,
            seed,
            out,
        } => {
            let ds = generate_blobs(k, per_cluster, dim, spread, seed)?;
            ds.write_csv(&out)?;
            println!("wrote {} points to {}", ds.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}
