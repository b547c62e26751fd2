//! Running configured chains and writing their outputs.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::thread;
use std::time::Instant;

use rand::Rng;

use super::config::{preset_keys, resolve, BuiltModel, ExperimentConfig, Overrides};
use crate::diagnostics::{autocorrelations, trace_report, AcfReport, MIN_ACT_SAMPLES};
use crate::models::{PumpDataset, PumpModel, StateVector};
use crate::samplers::kernels::{clamp_probability, overrelax_uniform};
use crate::samplers::{run_chain, ChainTrace, OverrelaxImpl, SamplerSpec};
use crate::variates::{RngStream, ScalarDistribution};
use crate::{Error, Result};

/// Lags written for runs too short for an autocorrelation time.
const SHORT_RUN_MAX_LAG: usize = 100;

/// Pairs written by the `fig3` bundle and the `K` used for them.
pub const FIG3_PAIRS: usize = 5000;
pub const FIG3_K: u32 = 100;

/// Starting state for the pump model: `lambda_i = s_i / t_i`, floored at
/// `1e-3 / t_i` for zero counts, and `tau = gamma_shape / mean(lambda)`.
pub fn init_pump_chain(dataset: &PumpDataset, model: &PumpModel) -> Result<StateVector> {
    if dataset.t != model.t() || dataset.s != model.s() {
        return Err(Error::invalid("dataset", "does not match the model's counts"));
    }
    let mut state: Vec<f64> = dataset
        .t
        .iter()
        .zip(&dataset.s)
        .map(|(&t, &s)| if s == 0 { 1e-3 / t } else { s as f64 / t })
        .collect();
    let mean = state.iter().sum::<f64>() / state.len() as f64;
    state.push(model.gamma_shape() / mean);
    StateVector::new(state)
}

/// Run label for a sampler. Labels name output files and, together with the
/// master seed, select each chain's random stream.
pub fn run_label(spec: &SamplerSpec) -> String {
    match spec {
        SamplerSpec::Gibbs => "gibbs".into(),
        SamplerSpec::Adler { .. } => "adler".into(),
        SamplerSpec::OrderedOver {
            k,
            implementation: OverrelaxImpl::Cdf,
        } => format!("k{k}"),
        SamplerSpec::OrderedOver {
            k,
            implementation: OverrelaxImpl::Direct,
        } => format!("k{k}-direct"),
        SamplerSpec::OrderedUnder { k } => format!("under-k{k}"),
    }
}

/// One chain of a bundle.
#[derive(Clone, Debug)]
pub struct RunPlan {
    pub label: String,
    pub config: ExperimentConfig,
    /// Published efficiency factors to print beside the estimates, by monitor.
    pub reported: BTreeMap<String, f64>,
}

impl RunPlan {
    pub fn new(config: ExperimentConfig) -> Self {
        Self {
            label: run_label(&config.sampler),
            config,
            reported: BTreeMap::new(),
        }
    }
}

/// Autocorrelation summary of one monitor.
#[derive(Clone, Debug, PartialEq)]
pub enum Diagnosis {
    Full(AcfReport),
    /// The run was shorter than [`MIN_ACT_SAMPLES`] after burn-in, so only
    /// the estimated autocorrelations are given.
    AcfOnly { name: String, acf: Vec<f64>, n_samples: usize },
}

impl Diagnosis {
    pub fn name(&self) -> &str {
        match self {
            Diagnosis::Full(r) => &r.name,
            Diagnosis::AcfOnly { name, .. } => name,
        }
    }

    pub fn acf(&self) -> &[f64] {
        match self {
            Diagnosis::Full(r) => &r.acf,
            Diagnosis::AcfOnly { acf, .. } => acf,
        }
    }

    pub fn act(&self) -> Option<f64> {
        match self {
            Diagnosis::Full(r) => Some(r.act),
            Diagnosis::AcfOnly { .. } => None,
        }
    }
}

/// Everything one chain produced.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub label: String,
    pub trace: ChainTrace,
    pub diagnoses: Vec<Diagnosis>,
}

fn diagnose(trace: &ChainTrace, config: &ExperimentConfig) -> Result<Vec<Diagnosis>> {
    config
        .monitors
        .iter()
        .map(|name| {
            let kept = &trace.series(name)?[trace.burn_in..];
            if kept.len() >= MIN_ACT_SAMPLES {
                trace_report(trace, name, config.truncation_rule).map(Diagnosis::Full)
            } else {
                let max_lag = SHORT_RUN_MAX_LAG.min(kept.len().saturating_sub(1));
                Ok(Diagnosis::AcfOnly {
                    name: name.clone(),
                    acf: autocorrelations(kept, max_lag)?,
                    n_samples: kept.len(),
                })
            }
        })
        .collect()
}

fn run_one(plan: &RunPlan, built: &BuiltModel) -> Result<RunOutcome> {
    let config = &plan.config;
    let init = match built {
        BuiltModel::Pump { model, dataset } => init_pump_chain(dataset, model)?.into_inner(),
        other => vec![0.0; other.as_model().dim()],
    };
    let monitors = config
        .monitors
        .iter()
        .map(|m| config.monitor(m))
        .collect::<Result<Vec<_>>>()?;
    let started = Instant::now();
    let trace = run_chain(
        built.as_model(),
        &config.sampler,
        config.n_iter,
        config.burn_in,
        &init,
        &monitors,
        RngStream::for_label(config.seed, &plan.label),
    )
    .map_err(|e| e.in_stage(format!("sampling `{}`", plan.label)))?;
    eprintln!(
        "{}: {} sweeps of {} in {:.2?}",
        plan.label,
        config.n_iter,
        config.sampler,
        started.elapsed()
    );
    let diagnoses = diagnose(&trace, config).map_err(|e| e.in_stage(format!("diagnosing `{}`", plan.label)))?;
    Ok(RunOutcome {
        label: plan.label.clone(),
        trace,
        diagnoses,
    })
}

/// File-name form of a monitor name (`x1^2` becomes `x1sq`).
pub fn monitor_slug(name: &str) -> String {
    name.replace("^2", "sq")
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

/// The config lines embedded in output files. The output directory is
/// left out so that identical experiments give identical bytes wherever
/// they are written.
fn embedded_config(config: &ExperimentConfig) -> Vec<(String, String)> {
    config.key_values().into_iter().filter(|(k, _)| k != "out_dir").collect()
}

fn append_comments(path: &Path, prefix: &str, lines: &[(String, String)]) -> Result<()> {
    let mut w = BufWriter::new(fs::OpenOptions::new().append(true).open(path)?);
    for (k, v) in lines {
        writeln!(w, "# {prefix}{k}={v}")?;
    }
    w.flush()?;
    Ok(())
}

fn write_diagnosis(d: &Diagnosis, path: &Path) -> Result<()> {
    match d {
        Diagnosis::Full(report) => report.write_csv(path),
        Diagnosis::AcfOnly { name, acf, n_samples } => {
            let mut w = BufWriter::new(fs::File::create(path)?);
            writeln!(w, "lag,acf")?;
            for (lag, a) in acf.iter().enumerate() {
                writeln!(w, "{lag},{a}")?;
            }
            writeln!(w, "# name={name}")?;
            writeln!(w, "# act=NA (fewer than {MIN_ACT_SAMPLES} samples after burn-in)")?;
            writeln!(w, "# n_samples={n_samples}")?;
            w.flush()?;
            Ok(())
        }
    }
}

/// Run every plan (concurrently), then write traces, configs, ACF files,
/// the shared pump dataset if any, and `summary.csv` into `out_dir`.
///
/// Efficiencies in the summary are relative to the run labelled `gibbs`.
pub fn execute_bundle(plans: &[RunPlan], out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut seen = std::collections::HashSet::new();
    if let Some(dup) = plans.iter().find(|p| !seen.insert(p.label.as_str())) {
        return Err(Error::config("sampler", format!("two runs share the label `{}`", dup.label)).in_stage("planning"));
    }
    let built = plans
        .iter()
        .map(|p| p.config.build_model())
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_stage("building the model"))?;
    let datasets: Vec<&PumpDataset> = built
        .iter()
        .filter_map(|b| match b {
            BuiltModel::Pump { dataset, .. } => Some(dataset),
            _ => None,
        })
        .collect();
    if datasets.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::config("data", "runs in one bundle must share a dataset").in_stage("planning"));
    }

    let outcomes: Vec<Result<RunOutcome>> = thread::scope(|scope| {
        let handles: Vec<_> = plans
            .iter()
            .zip(&built)
            .map(|(plan, model)| scope.spawn(move || run_one(plan, model)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sampler thread panicked"))
            .collect()
    });
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;

    write_outputs(plans, &outcomes, datasets.first().copied(), out_dir).map_err(|e| e.in_stage("writing outputs"))
}

fn write_outputs(
    plans: &[RunPlan],
    outcomes: &[RunOutcome],
    dataset: Option<&PumpDataset>,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut files = Vec::new();
    if let Some(data) = dataset {
        let csv = out_dir.join("data.csv");
        let meta = out_dir.join("data.meta");
        data.write_csv(&csv)?;
        data.write_meta(&meta)?;
        files.extend([csv, meta]);
    }
    for (plan, outcome) in plans.iter().zip(outcomes) {
        let config_lines = embedded_config(&plan.config);
        let cfg = out_dir.join(format!("{}.cfg", plan.label));
        let mut w = BufWriter::new(fs::File::create(&cfg)?);
        for (k, v) in &config_lines {
            writeln!(w, "{k}={v}")?;
        }
        w.flush()?;
        files.push(cfg);

        let trace = out_dir.join(format!("{}.trace.csv", plan.label));
        outcome.trace.write_csv(&trace)?;
        append_comments(&trace, "", &config_lines)?;
        files.push(trace);

        for d in &outcome.diagnoses {
            let path = out_dir.join(format!("{}.acf.{}.csv", plan.label, monitor_slug(d.name())));
            write_diagnosis(d, &path)?;
            append_comments(&path, "", &config_lines)?;
            files.push(path);
        }
    }

    let summary = out_dir.join("summary.csv");
    write_summary(plans, outcomes, &summary)?;
    files.push(summary);
    Ok(files)
}

fn write_summary(plans: &[RunPlan], outcomes: &[RunOutcome], path: &Path) -> Result<()> {
    let baseline = outcomes.iter().find(|o| o.label == "gibbs");
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(
        w,
        "run,sampler,monitor,n_samples,act,truncation_lag,efficiency_vs_gibbs,reported_efficiency"
    )?;
    let fmt_opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
    for (plan, outcome) in plans.iter().zip(outcomes) {
        for d in &outcome.diagnoses {
            let base_act = baseline
                .and_then(|b| b.diagnoses.iter().find(|bd| bd.name() == d.name()))
                .and_then(Diagnosis::act);
            let efficiency = base_act.zip(d.act()).map(|(b, m)| b / m);
            let (n, lag) = match d {
                Diagnosis::Full(r) => (r.n_samples, r.truncation_lag.to_string()),
                Diagnosis::AcfOnly { n_samples, .. } => (*n_samples, String::new()),
            };
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                plan.label,
                run_label(&plan.config.sampler),
                d.name(),
                n,
                fmt_opt(d.act()),
                lag,
                fmt_opt(efficiency),
                fmt_opt(plan.reported.get(d.name()).copied()),
            )?;
        }
    }
    for plan in plans {
        for (k, v) in embedded_config(&plan.config) {
            writeln!(w, "# {}.{k}={v}", plan.label)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Run a single configured experiment plus a Gibbs baseline under the same
/// seed, writing into `config.out_dir`.
pub fn execute_experiment(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let mut plans = vec![RunPlan::new(config.clone())];
    if config.sampler != SamplerSpec::Gibbs {
        plans.push(RunPlan::new(config.with_sampler(SamplerSpec::Gibbs)));
    }
    execute_bundle(&plans, &config.out_dir)
}

/// Bundles accepted by `reproduce`.
pub const BUNDLES: &[&str] = &["fig2", "fig3", "fig4", "fig5", "table-eff"];

/// The runs making up a chain bundle, with `overrides` applied to each.
pub fn bundle_plans(name: &str, overrides: &Overrides) -> Result<Vec<RunPlan>> {
    let members: &[(&str, &[(&str, f64)])] = match name {
        "fig2" => &[("fig2-gibbs", &[]), ("fig2-adler", &[])],
        "fig4" => &[("fig2-gibbs", &[]), ("fig4-k32", &[])],
        "fig5" => &[
            ("fig5-gibbs", &[]),
            ("fig5-k5", &[]),
            ("fig5-k11", &[]),
            ("fig5-k21", &[]),
        ],
        "table-eff" => &[
            ("table-eff-gibbs", &[]),
            ("table-eff-adler", &[("x1", 22.0), ("x1^2", 16.0)]),
            ("table-eff-k8", &[("x1", 8.0)]),
            ("table-eff-k16", &[("x1", 12.0)]),
            ("table-eff-k32", &[("x1", 22.0)]),
        ],
        other => {
            return Err(Error::config(
                "bundle",
                format!("unknown bundle `{other}`; expected one of {}", BUNDLES.join(", ")),
            ))
        }
    };
    members
        .iter()
        .map(|(preset, reported)| {
            let config = resolve(preset_keys(preset)?, overrides)?;
            let mut plan = RunPlan::new(config);
            plan.reported = reported.iter().map(|(m, v)| (m.to_string(), *v)).collect();
            Ok(plan)
        })
        .collect()
}

/// `(u, u')` pairs from ordered overrelaxation of a uniform variable with
/// `u ~ U(0, 1)`, together with their standard-Gaussian images.
pub fn overrelaxed_pairs(n: usize, k: u32, seed: u64) -> Result<Vec<[f64; 4]>> {
    let normal = ScalarDistribution::gaussian(0.0, 1.0)?;
    let mut rng = RngStream::for_label(seed, "fig3");
    (0..n)
        .map(|_| {
            let u = clamp_probability(rng.random::<f64>());
            let (u_prime, _, _) = overrelax_uniform(u, k, &mut rng)?;
            Ok([
                u,
                u_prime,
                normal.quantile(u)?,
                normal.quantile(clamp_probability(u_prime))?,
            ])
        })
        .collect()
}

fn write_fig3(seed: u64, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let pairs = overrelaxed_pairs(FIG3_PAIRS, FIG3_K, seed)?;
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join("fig3.csv");
    let mut w = BufWriter::new(fs::File::create(&path)?);
    writeln!(w, "u,u_prime,x,x_prime")?;
    for [u, up, x, xp] in pairs {
        writeln!(w, "{u},{up},{x},{xp}")?;
    }
    writeln!(w, "# n={FIG3_PAIRS}")?;
    writeln!(w, "# k={FIG3_K}")?;
    writeln!(w, "# seed={seed}")?;
    w.flush()?;
    Ok(vec![path])
}

/// Reproduce a named bundle into `out_dir`.
pub fn reproduce(name: &str, overrides: &Overrides, out_dir: &Path) -> Result<Vec<PathBuf>> {
    if name == "fig3" {
        let seed = overrides.seed.unwrap_or(super::config::DEFAULT_SEED);
        return write_fig3(seed, out_dir).map_err(|e| e.in_stage("writing fig3"));
    }
    let plans = bundle_plans(name, overrides).map_err(|e| e.in_stage("configuring"))?;
    execute_bundle(&plans, out_dir)
}
