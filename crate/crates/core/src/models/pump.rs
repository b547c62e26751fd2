//! Hierarchical gamma-Poisson failure-rate model.
//!
//! Counts `s_i ~ Poisson(lambda_i t_i)`, rates `lambda_i ~ Gamma(shape =
//! gamma_shape, scale = beta)`, and `beta` inverse-gamma with shape
//! `hyper_gamma` and scale `hyper_delta`. The chain works with the precision
//! `tau = 1 / beta`, so the state is laid out as `(lambda_1, .., lambda_p, tau)`
//! and every full conditional is a gamma distribution.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::Rng;

use super::{check_index, ConditionalModel};
use crate::variates::{RngStream, ScalarDistribution};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct PumpModel {
    gamma_shape: f64,
    hyper_gamma: f64,
    hyper_delta: f64,
    t: Vec<f64>,
    s: Vec<u64>,
}

impl PumpModel {
    pub fn new(
        t: Vec<f64>,
        s: Vec<u64>,
        gamma_shape: f64,
        hyper_gamma: f64,
        hyper_delta: f64,
    ) -> Result<Self> {
        if t.is_empty() {
            return Err(Error::invalid("t", "at least one observation is required"));
        }
        if t.len() != s.len() {
            return Err(Error::invalid(
                "s",
                format!("{} counts for {} exposure times", s.len(), t.len()),
            ));
        }
        if let Some(bad) = t.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::invalid("t", format!("exposure times must be > 0, got {bad}")));
        }
        for (name, v) in [
            ("gamma_shape", gamma_shape),
            ("hyper_gamma", hyper_gamma),
            ("hyper_delta", hyper_delta),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be > 0, got {v}")));
            }
        }
        Ok(Self {
            gamma_shape,
            hyper_gamma,
            hyper_delta,
            t,
            s,
        })
    }

    pub fn from_dataset(
        data: &PumpDataset,
        gamma_shape: f64,
        hyper_gamma: f64,
        hyper_delta: f64,
    ) -> Result<Self> {
        Self::new(data.t.clone(), data.s.clone(), gamma_shape, hyper_gamma, hyper_delta)
    }

    /// Number of counts `p`.
    pub fn p(&self) -> usize {
        self.t.len()
    }

    /// Index of `tau` in the state vector.
    pub fn tau_index(&self) -> usize {
        self.t.len()
    }

    pub fn gamma_shape(&self) -> f64 {
        self.gamma_shape
    }

    pub fn hyper_gamma(&self) -> f64 {
        self.hyper_gamma
    }

    pub fn hyper_delta(&self) -> f64 {
        self.hyper_delta
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn s(&self) -> &[u64] {
        &self.s
    }
}

/// `tau | lambda ~ Gamma(shape = p * gamma_shape + hyper_gamma, rate = hyper_delta + sum lambda)`.
pub fn pump_tau_conditional(model: &PumpModel, lambdas: &[f64]) -> Result<ScalarDistribution> {
    if lambdas.len() != model.p() {
        return Err(Error::DimensionMismatch {
            expected: model.p(),
            got: lambdas.len(),
        });
    }
    if let Some(bad) = lambdas.iter().find(|l| l.is_nan() || **l <= 0.0) {
        return Err(Error::invalid("lambda", format!("rates must be > 0, got {bad}")));
    }
    let shape = model.p() as f64 * model.gamma_shape + model.hyper_gamma;
    let rate = model.hyper_delta + lambdas.iter().sum::<f64>();
    ScalarDistribution::gamma(shape, rate)
}

/// `lambda_i | tau ~ Gamma(shape = s_i + gamma_shape, rate = t_i + tau)`; `i` is 0-based.
pub fn pump_lambda_conditional(model: &PumpModel, i: usize, tau: f64) -> Result<ScalarDistribution> {
    check_index(i, model.p())?;
    if tau.is_nan() || tau <= 0.0 {
        return Err(Error::invalid("tau", format!("must be > 0, got {tau}")));
    }
    ScalarDistribution::gamma(model.s[i] as f64 + model.gamma_shape, model.t[i] + tau)
}

impl ConditionalModel for PumpModel {
    fn dim(&self) -> usize {
        self.p() + 1
    }

    fn full_conditional(&self, i: usize, state: &[f64]) -> Result<ScalarDistribution> {
        let p = self.p();
        check_index(i, p + 1)?;
        if i == p {
            pump_tau_conditional(self, &state[..p])
        } else {
            pump_lambda_conditional(self, i, state[p])
        }
    }

    /// Joint log density of `(lambda, tau)` up to a constant, including the
    /// Jacobian of the `beta -> tau` change of variables.
    fn log_density(&self, state: &[f64]) -> Option<f64> {
        let p = self.p();
        let tau = state[p];
        if tau <= 0.0 || state[..p].iter().any(|&l| l <= 0.0) {
            return Some(f64::NEG_INFINITY);
        }
        let a = self.gamma_shape;
        let mut lp = (p as f64 * a + self.hyper_gamma - 1.0) * tau.ln() - self.hyper_delta * tau;
        for ((&l, &t), &s) in state[..p].iter().zip(&self.t).zip(&self.s) {
            lp += (a - 1.0 + s as f64) * l.ln() - l * (tau + t);
        }
        Some(lp)
    }
}

/// A set of counts with their exposure times.
#[derive(Clone, Debug, PartialEq)]
pub struct PumpDataset {
    pub t: Vec<f64>,
    pub s: Vec<u64>,
    /// Generating metadata; absent for datasets loaded without a sidecar.
    pub true_tau: Option<f64>,
    pub seed: Option<u64>,
    pub gamma_shape: Option<f64>,
}

/// Synthetic counts: `t_i = i / p`, `lambda_i ~ Gamma(gamma_shape, scale =
/// beta_true)`, `s_i ~ Poisson(lambda_i t_i)`, drawn in order of `i`.
pub fn generate_pump_data(p: usize, gamma_shape: f64, beta_true: f64, seed: u64) -> Result<PumpDataset> {
    if p == 0 {
        return Err(Error::invalid("p", "must be at least 1"));
    }
    if !(beta_true > 0.0 && beta_true.is_finite()) {
        return Err(Error::invalid("beta_true", format!("must be > 0, got {beta_true}")));
    }
    // Scale beta_true is rate 1 / beta_true.
    let prior = ScalarDistribution::gamma(gamma_shape, 1.0 / beta_true)?;
    let mut rng = RngStream::for_label(seed, "pump-data");
    let mut t = Vec::with_capacity(p);
    let mut s = Vec::with_capacity(p);
    for i in 1..=p {
        let ti = i as f64 / p as f64;
        let lambda = prior.draw(&mut rng);
        let count = ScalarDistribution::poisson(lambda * ti)?.draw(&mut rng);
        t.push(ti);
        s.push(count as u64);
    }
    Ok(PumpDataset {
        t,
        s,
        true_tau: Some(1.0 / beta_true),
        seed: Some(seed),
        gamma_shape: Some(gamma_shape),
    })
}

impl PumpDataset {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Write `i,t,s` rows (1-based `i`).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        writeln!(w, "i,t,s")?;
        for (i, (t, s)) in self.t.iter().zip(&self.s).enumerate() {
            writeln!(w, "{},{},{}", i + 1, t, s)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Write the generating metadata as `key=value` lines.
    pub fn write_meta(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        writeln!(w, "p={}", self.len())?;
        if let Some(seed) = self.seed {
            writeln!(w, "seed={seed}")?;
        }
        if let Some(a) = self.gamma_shape {
            writeln!(w, "gamma_shape={a}")?;
        }
        if let Some(tau) = self.true_tau {
            writeln!(w, "true_tau={tau}")?;
            writeln!(w, "beta_true={}", 1.0 / tau)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Read a dataset from `i,t,s` CSV, plus the sidecar metadata if given.
    pub fn read(csv: &Path, meta: Option<&Path>) -> Result<Self> {
        let text = fs::read_to_string(csv)?;
        let where_ = csv.display().to_string();
        let parse_err = |line: usize, message: String| Error::Parse {
            path: where_.clone(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == "i,t,s" => {}
            Some((_, h)) => return Err(parse_err(1, format!("expected header `i,t,s`, found `{h}`"))),
            None => return Err(parse_err(1, "empty file".into())),
        }
        let mut t = Vec::new();
        let mut s = Vec::new();
        for (n, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(parse_err(n + 1, format!("expected 3 fields, found {}", fields.len())));
            }
            let ti: f64 = fields[1]
                .parse()
                .map_err(|e| parse_err(n + 1, format!("bad t `{}`: {e}", fields[1])))?;
            let si: u64 = fields[2]
                .parse()
                .map_err(|e| parse_err(n + 1, format!("bad s `{}`: {e}", fields[2])))?;
            t.push(ti);
            s.push(si);
        }
        let mut data = PumpDataset {
            t,
            s,
            true_tau: None,
            seed: None,
            gamma_shape: None,
        };
        if let Some(meta) = meta {
            let kv = read_key_values(meta)?;
            let get = |k: &str| kv.get(k).map(String::as_str);
            let field = |k: &'static str, v: &str| {
                Error::Parse {
                    path: meta.display().to_string(),
                    line: 0,
                    message: format!("bad {k} `{v}`"),
                }
            };
            if let Some(v) = get("seed") {
                data.seed = Some(v.parse().map_err(|_| field("seed", v))?);
            }
            if let Some(v) = get("true_tau") {
                data.true_tau = Some(v.parse().map_err(|_| field("true_tau", v))?);
            }
            if let Some(v) = get("gamma_shape") {
                data.gamma_shape = Some(v.parse().map_err(|_| field("gamma_shape", v))?);
            }
        }
        Ok(data)
    }
}

/// Parse `key=value` lines; blank lines and `#` comments are skipped.
pub(crate) fn read_key_values(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path)?;
    parse_key_values(&text, &path.display().to_string())
}

pub(crate) fn parse_key_values(text: &str, origin: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Parse {
                path: origin.to_string(),
                line: n + 1,
                message: format!("expected key=value, found `{line}`"),
            });
        };
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

/// Draw the rates and precision from the model's generative prior; used as a
/// dispersed starting point in tests.
pub fn draw_pump_state<R: Rng + ?Sized>(model: &PumpModel, tau: f64, rng: &mut R) -> Result<Vec<f64>> {
    let prior = ScalarDistribution::gamma(model.gamma_shape, tau)?;
    let mut state: Vec<f64> = (0..model.p()).map(|_| prior.draw(rng)).collect();
    state.push(tau);
    Ok(state)
}
