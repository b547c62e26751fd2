//! Flat `key=value` experiment configuration with named presets.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::diagnostics::TruncationRule;
use crate::models::{
    generate_pump_data, BivariateGaussianModel, ConditionalModel, MultiquadraticModel, PumpDataset,
    PumpModel,
};
use crate::samplers::{Monitor, OverrelaxImpl, SamplerSpec};
use crate::{Error, Result};

pub const DEFAULT_SEED: u64 = 1;

const KNOWN_KEYS: &[&str] = &[
    "preset",
    "model",
    "rho",
    "data",
    "p",
    "gamma_shape",
    "hyper_gamma",
    "hyper_delta",
    "beta_true",
    "sampler",
    "adler_alpha",
    "k",
    "impl",
    "n_iter",
    "burn_in",
    "seed",
    "monitors",
    "out_dir",
    "truncation_rule",
];

/// Where the pump counts come from.
#[derive(Clone, Debug, PartialEq)]
pub enum PumpData {
    /// An `i,t,s` CSV file.
    File(PathBuf),
    /// Synthetic counts drawn from the prior with the experiment seed.
    Synthetic { p: usize, beta_true: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelConfig {
    BivariateGaussian {
        rho: f64,
    },
    Multiquadratic,
    Pump {
        data: PumpData,
        gamma_shape: f64,
        hyper_gamma: f64,
        hyper_delta: f64,
    },
}

impl ModelConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ModelConfig::BivariateGaussian { .. } => "bivariate-gaussian",
            ModelConfig::Multiquadratic => "multiquadratic",
            ModelConfig::Pump { .. } => "pump",
        }
    }
}

/// A fully resolved and validated experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub preset: Option<String>,
    pub model: ModelConfig,
    pub sampler: SamplerSpec,
    pub n_iter: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub monitors: Vec<String>,
    pub out_dir: PathBuf,
    pub truncation_rule: TruncationRule,
}

/// Values given on the command line; they take precedence over the config
/// file, which takes precedence over the preset.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub preset: Option<String>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub k: Option<u32>,
    pub adler_alpha: Option<f64>,
    pub n_iter: Option<usize>,
    pub burn_in: Option<usize>,
    pub truncation_rule: Option<TruncationRule>,
}

impl Overrides {
    fn apply(&self, keys: &mut BTreeMap<String, String>) {
        let mut set = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                keys.insert(k.to_string(), v);
            }
        };
        set("seed", self.seed.map(|v| v.to_string()));
        set("out_dir", self.out_dir.as_ref().map(|v| v.display().to_string()));
        set("k", self.k.map(|v| v.to_string()));
        set("adler_alpha", self.adler_alpha.map(|v| v.to_string()));
        set("n_iter", self.n_iter.map(|v| v.to_string()));
        set("burn_in", self.burn_in.map(|v| v.to_string()));
        set("truncation_rule", self.truncation_rule.map(|v| v.to_string()));
        if !keys.contains_key("sampler") {
            if self.k.is_some() {
                keys.insert("sampler".into(), "ordered-over".into());
            } else if self.adler_alpha.is_some() {
                keys.insert("sampler".into(), "adler".into());
            }
        }
    }
}

/// Names accepted by `preset=` and `--preset`.
pub const PRESETS: &[&str] = &[
    "fig2-gibbs",
    "fig2-adler",
    "fig4-k32",
    "fig5-gibbs",
    "fig5-k5",
    "fig5-k11",
    "fig5-k21",
    "table-eff-gibbs",
    "table-eff-adler",
    "table-eff-k8",
    "table-eff-k16",
    "table-eff-k32",
];

/// The keys a preset expands to.
pub fn preset_keys(name: &str) -> Result<BTreeMap<String, String>> {
    type Pairs = Vec<(&'static str, &'static str)>;
    fn gaussian(sampler: &[(&'static str, &'static str)], n_iter: &'static str) -> Pairs {
        let mut v = vec![
            ("model", "bivariate-gaussian"),
            ("rho", "0.998"),
            ("n_iter", n_iter),
            ("burn_in", "100"),
            ("monitors", "x1,x1^2"),
        ];
        v.extend_from_slice(sampler);
        v
    }
    fn pump(sampler: &[(&'static str, &'static str)]) -> Pairs {
        let mut v = vec![
            ("model", "pump"),
            ("p", "100"),
            ("gamma_shape", "20"),
            ("hyper_gamma", "0.1"),
            ("hyper_delta", "1"),
            ("beta_true", "0.2"),
            ("n_iter", "600"),
            ("burn_in", "50"),
            ("monitors", "tau"),
        ];
        v.extend_from_slice(sampler);
        v
    }
    const GIBBS: &[(&str, &str)] = &[("sampler", "gibbs")];
    const ADLER: &[(&str, &str)] = &[("sampler", "adler"), ("adler_alpha", "-0.89")];
    let over = |k: &'static str| [("sampler", "ordered-over"), ("k", k), ("impl", "cdf")];
    let pairs = match name {
        "fig2-gibbs" => gaussian(GIBBS, "2000"),
        "fig2-adler" => gaussian(ADLER, "2000"),
        "fig4-k32" => gaussian(&over("32"), "2000"),
        "fig5-gibbs" => pump(GIBBS),
        "fig5-k5" => pump(&over("5")),
        "fig5-k11" => pump(&over("11")),
        "fig5-k21" => pump(&over("21")),
        "table-eff-gibbs" => gaussian(GIBBS, "1000000"),
        "table-eff-adler" => gaussian(ADLER, "1000000"),
        "table-eff-k8" => gaussian(&over("8"), "1000000"),
        "table-eff-k16" => gaussian(&over("16"), "1000000"),
        "table-eff-k32" => gaussian(&over("32"), "1000000"),
        other => {
            return Err(Error::config(
                "preset",
                format!("unknown preset `{other}`; known presets: {}", PRESETS.join(", ")),
            ))
        }
    };
    let mut keys: BTreeMap<String, String> = pairs.into_iter().map(|(k, v)| (k.into(), v.into())).collect();
    keys.insert("preset".into(), name.into());
    Ok(keys)
}

/// Split config text into keys; `#` starts a comment line.
pub fn parse_key_values(text: &str, origin: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: origin.to_string(),
            line: n + 1,
            message,
        };
        let Some((k, v)) = line.split_once('=') else {
            return Err(err(format!("expected key=value, found `{line}`")));
        };
        let (k, v) = (k.trim(), v.trim());
        if !KNOWN_KEYS.contains(&k) {
            return Err(err(format!("unknown key `{k}`")));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(err(format!("key `{k}` given twice")));
        }
    }
    Ok(out)
}

/// Read a config file, or start from nothing, and resolve it with `overrides`.
pub fn parse_config(path: Option<&Path>, overrides: &Overrides) -> Result<ExperimentConfig> {
    let keys = match path {
        Some(p) => parse_key_values(&fs::read_to_string(p)?, &p.display().to_string())?,
        None => BTreeMap::new(),
    };
    resolve(keys, overrides)
}

/// Expand the preset, layer the explicit keys and overrides on top, and
/// validate the result.
pub fn resolve(keys: BTreeMap<String, String>, overrides: &Overrides) -> Result<ExperimentConfig> {
    let preset = overrides.preset.clone().or_else(|| keys.get("preset").cloned());
    let mut merged = match &preset {
        Some(name) => preset_keys(name)?,
        None => BTreeMap::new(),
    };
    merged.extend(keys);
    if let Some(name) = &preset {
        merged.insert("preset".into(), name.clone());
    }
    overrides.apply(&mut merged);
    Resolver { keys: merged }.finish()
}

struct Resolver {
    keys: BTreeMap<String, String>,
}

impl Resolver {
    fn take(&mut self, field: &str) -> Option<String> {
        self.keys.remove(field)
    }

    fn parse<T: std::str::FromStr>(&mut self, field: &str, default: Option<T>) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.take(field) {
            Some(v) => v
                .parse()
                .map_err(|e| Error::config(field, format!("cannot parse `{v}`: {e}"))),
            None => default.ok_or_else(|| Error::config(field, "required but not given")),
        }
    }

    fn finish(mut self) -> Result<ExperimentConfig> {
        let preset = self.take("preset");
        let model_name = self.take("model").unwrap_or_else(|| "bivariate-gaussian".into());
        let model = match model_name.as_str() {
            "bivariate-gaussian" => {
                let rho: f64 = self.parse("rho", Some(0.998))?;
                BivariateGaussianModel::new(rho).map_err(|e| Error::config("rho", e.to_string()))?;
                ModelConfig::BivariateGaussian { rho }
            }
            "multiquadratic" => ModelConfig::Multiquadratic,
            "pump" => {
                let data = match self.take("data") {
                    Some(path) => {
                        let path = PathBuf::from(path);
                        if !path.is_file() {
                            return Err(Error::config("data", format!("no such file `{}`", path.display())));
                        }
                        PumpData::File(path)
                    }
                    None => {
                        let p: usize = self.parse("p", Some(100))?;
                        let beta_true: f64 = self.parse("beta_true", Some(0.2))?;
                        if p == 0 {
                            return Err(Error::config("p", "must be at least 1"));
                        }
                        if !(beta_true > 0.0 && beta_true.is_finite()) {
                            return Err(Error::config("beta_true", format!("must be > 0, got {beta_true}")));
                        }
                        PumpData::Synthetic { p, beta_true }
                    }
                };
                let gamma_shape: f64 = self.parse("gamma_shape", Some(20.0))?;
                let hyper_gamma: f64 = self.parse("hyper_gamma", Some(0.1))?;
                let hyper_delta: f64 = self.parse("hyper_delta", Some(1.0))?;
                for (field, v) in [
                    ("gamma_shape", gamma_shape),
                    ("hyper_gamma", hyper_gamma),
                    ("hyper_delta", hyper_delta),
                ] {
                    if !(v > 0.0 && v.is_finite()) {
                        return Err(Error::config(field, format!("must be > 0, got {v}")));
                    }
                }
                ModelConfig::Pump {
                    data,
                    gamma_shape,
                    hyper_gamma,
                    hyper_delta,
                }
            }
            other => {
                return Err(Error::config(
                    "model",
                    format!("expected `bivariate-gaussian`, `multiquadratic` or `pump`, got `{other}`"),
                ))
            }
        };

        let sampler_name = self.take("sampler").unwrap_or_else(|| "gibbs".into());
        let sampler = match sampler_name.as_str() {
            "gibbs" => SamplerSpec::Gibbs,
            "adler" => SamplerSpec::Adler {
                adler_alpha: self.parse("adler_alpha", None)?,
            },
            "ordered-over" => SamplerSpec::OrderedOver {
                k: self.parse("k", None)?,
                implementation: self.parse("impl", Some(OverrelaxImpl::Cdf))?,
            },
            "ordered-under" => SamplerSpec::OrderedUnder {
                k: self.parse("k", None)?,
            },
            other => {
                return Err(Error::config(
                    "sampler",
                    format!("expected `gibbs`, `adler`, `ordered-over` or `ordered-under`, got `{other}`"),
                ))
            }
        };
        sampler.validate().map_err(|e| match e {
            Error::InvalidParameter { name, reason } => Error::config(name, reason),
            other => other,
        })?;

        let is_pump = matches!(model, ModelConfig::Pump { .. });
        let n_iter: usize = self.parse("n_iter", Some(2000))?;
        let burn_in: usize = self.parse("burn_in", Some(if is_pump { 50 } else { 100 }))?;
        if burn_in >= n_iter {
            return Err(Error::config(
                "burn_in",
                format!("must be smaller than n_iter = {n_iter}, got {burn_in}"),
            ));
        }
        let seed: u64 = self.parse("seed", Some(DEFAULT_SEED))?;
        let monitors: Vec<String> = match self.take("monitors") {
            Some(list) => list.split(',').map(|m| m.trim().to_string()).collect(),
            None if is_pump => vec!["tau".into()],
            None => vec!["x1".into(), "x1^2".into()],
        };
        if monitors.is_empty() || monitors.iter().any(String::is_empty) {
            return Err(Error::config("monitors", "expected a comma-separated list of names"));
        }
        let out_dir = PathBuf::from(self.take("out_dir").unwrap_or_else(|| "out".into()));
        let truncation_rule: TruncationRule = self.parse("truncation_rule", Some(TruncationRule::Geyer))?;

        if let Some(field) = self.keys.keys().next() {
            return Err(Error::config(
                field.clone(),
                format!("not used by model `{model_name}` with sampler `{sampler_name}`"),
            ));
        }
        let config = ExperimentConfig {
            preset,
            model,
            sampler,
            n_iter,
            burn_in,
            seed,
            monitors,
            out_dir,
            truncation_rule,
        };
        for name in &config.monitors {
            config.monitor(name)?;
        }
        Ok(config)
    }
}

/// A model instance built from a config.
pub enum BuiltModel {
    BivariateGaussian(BivariateGaussianModel),
    Multiquadratic(MultiquadraticModel),
    Pump { model: PumpModel, dataset: PumpDataset },
}

impl BuiltModel {
    pub fn as_model(&self) -> &dyn ConditionalModel {
        match self {
            BuiltModel::BivariateGaussian(m) => m,
            BuiltModel::Multiquadratic(m) => m,
            BuiltModel::Pump { model, .. } => model,
        }
    }
}

impl ExperimentConfig {
    fn dim(&self) -> Option<usize> {
        match &self.model {
            ModelConfig::BivariateGaussian { .. } | ModelConfig::Multiquadratic => Some(2),
            ModelConfig::Pump {
                data: PumpData::Synthetic { p, .. },
                ..
            } => Some(p + 1),
            ModelConfig::Pump { .. } => None,
        }
    }

    /// Look up a monitor by name: `x<i>`, `x<i>^2` (1-based), or `tau` for
    /// the pump model.
    pub fn monitor(&self, name: &str) -> Result<Monitor> {
        let bad = |why: String| Error::config("monitors", why);
        if name == "tau" {
            return match self.model {
                ModelConfig::Pump { .. } => Ok(Monitor::tau()),
                _ => Err(bad("`tau` is only defined for the pump model".into())),
            };
        }
        let (index, squared) = match name.strip_suffix("^2") {
            Some(base) => (base, true),
            None => (name, false),
        };
        let i: usize = index
            .strip_prefix('x')
            .and_then(|i| i.parse().ok())
            .filter(|&i| i >= 1)
            .ok_or_else(|| bad(format!("unknown monitor `{name}`; expected x<i>, x<i>^2 or tau")))?;
        if let Some(dim) = self.dim() {
            if i > dim {
                return Err(bad(format!("`{name}` exceeds the model dimension {dim}")));
            }
        }
        Ok(if squared {
            Monitor::coordinate_squared(i - 1)
        } else {
            Monitor::coordinate(i - 1)
        })
    }

    /// Construct the model, generating or loading pump data as needed.
    pub fn build_model(&self) -> Result<BuiltModel> {
        Ok(match &self.model {
            ModelConfig::BivariateGaussian { rho } => BuiltModel::BivariateGaussian(BivariateGaussianModel::new(*rho)?),
            ModelConfig::Multiquadratic => BuiltModel::Multiquadratic(MultiquadraticModel),
            ModelConfig::Pump {
                data,
                gamma_shape,
                hyper_gamma,
                hyper_delta,
            } => {
                let dataset = match data {
                    PumpData::File(path) => {
                        let meta = path.with_extension("meta");
                        PumpDataset::read(path, meta.is_file().then_some(meta.as_path()))?
                    }
                    PumpData::Synthetic { p, beta_true } => {
                        generate_pump_data(*p, *gamma_shape, *beta_true, self.seed)?
                    }
                };
                let model = PumpModel::from_dataset(&dataset, *gamma_shape, *hyper_gamma, *hyper_delta)?;
                BuiltModel::Pump { model, dataset }
            }
        })
    }

    /// The resolved configuration as `key=value` pairs; feeding these back
    /// through [`resolve`] reproduces the config.
    pub fn key_values(&self) -> Vec<(String, String)> {
        let mut kv: Vec<(&str, String)> = Vec::new();
        if let Some(p) = &self.preset {
            kv.push(("preset", p.clone()));
        }
        kv.push(("model", self.model.name().into()));
        match &self.model {
            ModelConfig::BivariateGaussian { rho } => kv.push(("rho", rho.to_string())),
            ModelConfig::Multiquadratic => {}
            ModelConfig::Pump {
                data,
                gamma_shape,
                hyper_gamma,
                hyper_delta,
            } => {
                match data {
                    PumpData::File(path) => kv.push(("data", path.display().to_string())),
                    PumpData::Synthetic { p, beta_true } => {
                        kv.push(("p", p.to_string()));
                        kv.push(("beta_true", beta_true.to_string()));
                    }
                }
                kv.push(("gamma_shape", gamma_shape.to_string()));
                kv.push(("hyper_gamma", hyper_gamma.to_string()));
                kv.push(("hyper_delta", hyper_delta.to_string()));
            }
        }
        match self.sampler {
            SamplerSpec::Gibbs => kv.push(("sampler", "gibbs".into())),
            SamplerSpec::Adler { adler_alpha } => {
                kv.push(("sampler", "adler".into()));
                kv.push(("adler_alpha", adler_alpha.to_string()));
            }
            SamplerSpec::OrderedOver { k, implementation } => {
                kv.push(("sampler", "ordered-over".into()));
                kv.push(("k", k.to_string()));
                kv.push(("impl", implementation.as_str().into()));
            }
            SamplerSpec::OrderedUnder { k } => {
                kv.push(("sampler", "ordered-under".into()));
                kv.push(("k", k.to_string()));
            }
        }
        kv.push(("n_iter", self.n_iter.to_string()));
        kv.push(("burn_in", self.burn_in.to_string()));
        kv.push(("seed", self.seed.to_string()));
        kv.push(("monitors", self.monitors.join(",")));
        kv.push(("out_dir", self.out_dir.display().to_string()));
        kv.push(("truncation_rule", self.truncation_rule.to_string()));
        kv.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    /// Same config with a different sampler; used for the Gibbs baseline.
    pub fn with_sampler(&self, sampler: SamplerSpec) -> Self {
        Self {
            preset: None,
            sampler,
            ..self.clone()
        }
    }
}
