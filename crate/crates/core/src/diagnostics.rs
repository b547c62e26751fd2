//! Autocorrelation functions and integrated autocorrelation times.
//!
//! All estimates use the biased (divide-by-`N`) autocovariance normalised by
//! the lag-0 value, so the estimated sequence is positive semidefinite.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::samplers::ChainTrace;
use crate::{Error, Result};

/// Lower bound applied to estimated autocorrelation times.
pub const ACT_FLOOR: f64 = 0.01;

/// Minimum post-burn-in length accepted by [`autocorrelation_time`].
pub const MIN_ACT_SAMPLES: usize = 1000;

/// Minimum length accepted by [`autocorrelation`].
pub const MIN_ACF_SAMPLES: usize = 10;

/// How the sum over lags is cut off.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TruncationRule {
    /// Initial positive sequence: add pairs `acf(2k-1) + acf(2k)` while the
    /// pair sum is positive.
    #[default]
    Geyer,
    /// Sum up to and including the first lag with `|acf| < 2 / sqrt(N)`.
    Threshold,
}

impl TruncationRule {
    pub fn as_str(&self) -> &'static str {
        match self {
            TruncationRule::Geyer => "geyer",
            TruncationRule::Threshold => "threshold",
        }
    }
}

impl fmt::Display for TruncationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TruncationRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geyer" => Ok(TruncationRule::Geyer),
            "threshold" => Ok(TruncationRule::Threshold),
            other => Err(Error::config(
                "truncation_rule",
                format!("expected `geyer` or `threshold`, got `{other}`"),
            )),
        }
    }
}

/// Autocorrelation estimates and the resulting autocorrelation time for one
/// monitored function.
#[derive(Clone, Debug, PartialEq)]
pub struct AcfReport {
    pub name: String,
    /// Estimates for lags `0..acf.len()`; `acf[0] == 1`.
    pub acf: Vec<f64>,
    pub truncation_lag: usize,
    pub act: f64,
    pub n_samples: usize,
    pub burn_in: usize,
    pub rule: TruncationRule,
}

impl AcfReport {
    pub fn max_lag(&self) -> usize {
        self.acf.len() - 1
    }

    /// First positive lag whose estimate is below `threshold`.
    pub fn first_lag_below(&self, threshold: f64) -> Option<usize> {
        self.acf.iter().skip(1).position(|&a| a < threshold).map(|k| k + 1)
    }

    /// Noise level `2 / sqrt(N)` used by the threshold rule.
    pub fn noise_level(&self) -> f64 {
        2.0 / (self.n_samples as f64).sqrt()
    }

    /// Write `lag,acf` rows followed by `#`-prefixed summary lines.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        writeln!(w, "lag,acf")?;
        for (lag, a) in self.acf.iter().enumerate() {
            writeln!(w, "{lag},{a}")?;
        }
        writeln!(w, "# name={}", self.name)?;
        writeln!(w, "# act={}", self.act)?;
        writeln!(w, "# truncation_lag={}", self.truncation_lag)?;
        writeln!(w, "# truncation_rule={}", self.rule)?;
        writeln!(w, "# n_samples={}", self.n_samples)?;
        writeln!(w, "# burn_in={}", self.burn_in)?;
        w.flush()?;
        Ok(())
    }
}

fn mean_and_variance(series: &[f64]) -> (f64, f64) {
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let var = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

/// Sample autocorrelation at a single lag, computed by direct summation.
pub fn autocorrelation(series: &[f64], lag: usize) -> Result<f64> {
    if series.len() < MIN_ACF_SAMPLES {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            min: MIN_ACF_SAMPLES,
        });
    }
    if lag >= series.len() {
        return Err(Error::invalid(
            "lag",
            format!("must be below the series length {}, got {lag}", series.len()),
        ));
    }
    let (mean, var) = mean_and_variance(series);
    if var == 0.0 {
        return Err(Error::ZeroVariance);
    }
    if lag == 0 {
        return Ok(1.0);
    }
    let n = series.len() as f64;
    let cov = series
        .iter()
        .zip(&series[lag..])
        .map(|(a, b)| (a - mean) * (b - mean))
        .sum::<f64>()
        / n;
    Ok(cov / var)
}

/// Autocorrelations at lags `0..=max_lag` via zero-padded FFT.
pub fn autocorrelations(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = series.len();
    if n < MIN_ACF_SAMPLES {
        return Err(Error::SeriesTooShort {
            len: n,
            min: MIN_ACF_SAMPLES,
        });
    }
    let (mean, var) = mean_and_variance(series);
    if var == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let max_lag = max_lag.min(n - 1);
    let len = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = series
        .iter()
        .map(|&x| Complex::new(x - mean, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(len)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    for z in buf.iter_mut() {
        *z = Complex::new(z.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    let c0 = buf[0].re;
    let mut acf: Vec<f64> = buf[..=max_lag].iter().map(|z| z.re / c0).collect();
    acf[0] = 1.0;
    Ok(acf)
}

/// `1 + 2 * sum(acf[1..=truncation_lag])`, floored at [`ACT_FLOOR`].
pub fn act_from_acf(acf: &[f64], truncation_lag: usize) -> f64 {
    let tail: f64 = acf[1..=truncation_lag].iter().sum();
    (1.0 + 2.0 * tail).max(ACT_FLOOR)
}

/// Choose the last lag included in the autocorrelation-time sum.
pub fn truncation_lag(acf: &[f64], n_samples: usize, rule: TruncationRule) -> usize {
    let last = acf.len() - 1;
    match rule {
        TruncationRule::Geyer => {
            let mut m = 0;
            while m + 2 <= last && acf[m + 1] + acf[m + 2] > 0.0 {
                m += 2;
            }
            m
        }
        TruncationRule::Threshold => {
            let level = 2.0 / (n_samples as f64).sqrt();
            (1..=last).find(|&k| acf[k].abs() < level).unwrap_or(last)
        }
    }
}

/// Integrated autocorrelation time of `series[burn_in..]`.
pub fn autocorrelation_time(series: &[f64], burn_in: usize, rule: TruncationRule) -> Result<AcfReport> {
    let kept = series.get(burn_in..).unwrap_or(&[]);
    if kept.len() < MIN_ACT_SAMPLES {
        return Err(Error::SeriesTooShort {
            len: kept.len(),
            min: MIN_ACT_SAMPLES,
        });
    }
    let n = kept.len();
    let full = autocorrelations(kept, n - 1)?;
    let m = truncation_lag(&full, n, rule);
    let keep = (4 * m + 10).max(200).min(n - 1);
    let acf = full[..=keep].to_vec();
    let act = act_from_acf(&acf, m);
    Ok(AcfReport {
        name: String::new(),
        acf,
        truncation_lag: m,
        act,
        n_samples: n,
        burn_in,
        rule,
    })
}

/// Autocorrelation-time report for one monitored function of a trace, using
/// the trace's own burn-in.
pub fn trace_report(trace: &ChainTrace, name: &str, rule: TruncationRule) -> Result<AcfReport> {
    let mut report = autocorrelation_time(trace.series(name)?, trace.burn_in, rule)?;
    report.name = name.to_string();
    Ok(report)
}

/// `act(baseline) / act(method)` for the named function: how many times
/// fewer iterations `method` needs for the same estimator variance.
pub fn efficiency_ratio(
    baseline: &ChainTrace,
    method: &ChainTrace,
    name: &str,
    rule: TruncationRule,
) -> Result<f64> {
    let base = trace_report(baseline, name, rule)?;
    let other = trace_report(method, name, rule)?;
    Ok(base.act / other.act)
}
