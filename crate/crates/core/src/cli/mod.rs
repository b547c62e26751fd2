//! Command-line experiment runner.
//!
//! Experiments are described by flat `key=value` configs (see
//! [`config::parse_key_values`]) or by named presets, and write CSV traces,
//! autocorrelation files and a `summary.csv` into an output directory.

pub mod config;
pub mod experiment;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use config::{parse_config, ExperimentConfig, Overrides};
pub use experiment::{execute_experiment, init_pump_chain, reproduce};

use crate::diagnostics::{trace_report, TruncationRule};
use crate::models::generate_pump_data;
use crate::samplers::ChainTrace;
use crate::Result;

#[derive(Debug, Parser)]
#[command(name = "overrelax", version, about = "Gibbs sampling and ordered overrelaxation experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a synthetic pump dataset and write `data.csv` and `data.meta`.
    GenerateData {
        #[arg(long, default_value_t = 100)]
        p: usize,
        #[arg(long, default_value_t = 20.0)]
        gamma_shape: f64,
        #[arg(long, default_value_t = 0.2)]
        beta_true: f64,
        #[arg(long, default_value_t = config::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Run one experiment (plus a Gibbs baseline) from a config file and/or flags.
    Run {
        /// `key=value` config file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Estimate autocorrelations of a trace CSV.
    Diagnose {
        trace: PathBuf,
        #[arg(long, default_value_t = 0)]
        burn_in: usize,
        /// Monitored columns to analyse; all of them when omitted.
        #[arg(long, value_delimiter = ',')]
        monitor: Vec<String>,
        #[arg(long, default_value = "geyer")]
        truncation_rule: TruncationRule,
        /// Directory for the ACF files; defaults to the trace's directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Regenerate the data behind a figure or the efficiency table.
    Reproduce {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(experiment::BUNDLES))]
        bundle: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Results go to `<out-dir>/<bundle>`.
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        burn_in: Option<usize>,
        #[arg(long)]
        truncation_rule: Option<TruncationRule>,
    },
}

#[derive(Debug, Args)]
pub struct RunFlags {
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub truncation_rule: Option<TruncationRule>,
}

impl From<RunFlags> for Overrides {
    fn from(f: RunFlags) -> Self {
        Overrides {
            preset: f.preset,
            seed: f.seed,
            out_dir: f.out_dir,
            k: f.k,
            adler_alpha: f.alpha,
            n_iter: f.iters,
            burn_in: f.burn_in,
            truncation_rule: f.truncation_rule,
        }
    }
}

fn report_files(files: &[PathBuf]) {
    for f in files {
        println!("{}", f.display());
    }
}

/// Execute a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenerateData {
            p,
            gamma_shape,
            beta_true,
            seed,
            out_dir,
        } => {
            let data = generate_pump_data(p, gamma_shape, beta_true, seed).map_err(|e| e.in_stage("generating data"))?;
            let write = || -> Result<Vec<PathBuf>> {
                std::fs::create_dir_all(&out_dir)?;
                let (csv, meta) = (out_dir.join("data.csv"), out_dir.join("data.meta"));
                data.write_csv(&csv)?;
                data.write_meta(&meta)?;
                Ok(vec![csv, meta])
            };
            report_files(&write().map_err(|e| e.in_stage("writing outputs"))?);
        }
        Command::Run { config, flags } => {
            let config = parse_config(config.as_deref(), &flags.into()).map_err(|e| e.in_stage("reading config"))?;
            report_files(&execute_experiment(&config)?);
        }
        Command::Diagnose {
            trace,
            burn_in,
            monitor,
            truncation_rule,
            out_dir,
        } => diagnose(&trace, burn_in, &monitor, truncation_rule, out_dir.as_deref())?,
        Command::Reproduce {
            bundle,
            seed,
            out_dir,
            iters,
            burn_in,
            truncation_rule,
        } => {
            let overrides = Overrides {
                seed,
                n_iter: iters,
                burn_in,
                truncation_rule,
                ..Overrides::default()
            };
            report_files(&reproduce(&bundle, &overrides, &out_dir.join(&bundle))?);
        }
    }
    Ok(())
}

fn diagnose(
    path: &Path,
    burn_in: usize,
    monitors: &[String],
    rule: TruncationRule,
    out_dir: Option<&Path>,
) -> Result<()> {
    let trace = ChainTrace::read_csv(path, burn_in).map_err(|e| e.in_stage("reading trace"))?;
    let names: Vec<String> = if monitors.is_empty() {
        trace.names().to_vec()
    } else {
        monitors.to_vec()
    };
    let dir = out_dir
        .map(Path::to_path_buf)
        .or_else(|| path.parent().map(Path::to_path_buf))
        .unwrap_or_default();
    let stem = path
        .file_name()
        .map(|s| s.to_string_lossy().trim_end_matches(".csv").trim_end_matches(".trace").to_string())
        .unwrap_or_else(|| "trace".into());
    let reports = names
        .iter()
        .map(|n| trace_report(&trace, n, rule))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_stage("diagnosing"))?;
    let write = || -> Result<()> {
        std::fs::create_dir_all(&dir)?;
        for r in &reports {
            let out = dir.join(format!("{stem}.acf.{}.csv", experiment::monitor_slug(&r.name)));
            r.write_csv(&out)?;
            println!("{}\tact={}\ttruncation_lag={}\t{}", r.name, r.act, r.truncation_lag, out.display());
        }
        Ok(())
    };
    write().map_err(|e| e.in_stage("writing outputs"))
}
