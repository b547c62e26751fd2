//! Random streams, distribution families, and their CDF/quantile functions.

mod rng;
mod special;

pub use rng::{label_stream, RngStream};

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::function::{beta, gamma};

use crate::{Error, Result};

/// Largest binomial trial count drawn as an explicit sum of Bernoulli trials.
pub const BERNOULLI_SUM_MAX_N: u64 = 1024;

/// A univariate distribution with validated parameters.
///
/// Gamma is parameterised by shape and *rate* everywhere in this crate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalarDistribution(Family);

/// The family tag and parameters of a [`ScalarDistribution`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    Gaussian { mean: f64, sd: f64 },
    Gamma { shape: f64, rate: f64 },
    Beta { a: f64, b: f64 },
    Binomial { n: u64, p: f64 },
    Poisson { mean: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Gaussian { .. } => "gaussian",
            Family::Gamma { .. } => "gamma",
            Family::Beta { .. } => "beta",
            Family::Binomial { .. } => "binomial",
            Family::Poisson { .. } => "poisson",
            Family::Uniform { .. } => "uniform",
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and > 0, got {v}")))
    }
}

fn finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite, got {v}")))
    }
}

impl ScalarDistribution {
    pub fn gaussian(mean: f64, sd: f64) -> Result<Self> {
        finite("mean", mean)?;
        positive("sd", sd)?;
        Ok(Self(Family::Gaussian { mean, sd }))
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        positive("shape", shape)?;
        positive("rate", rate)?;
        Ok(Self(Family::Gamma { shape, rate }))
    }

    pub fn beta(a: f64, b: f64) -> Result<Self> {
        positive("a", a)?;
        positive("b", b)?;
        Ok(Self(Family::Beta { a, b }))
    }

    pub fn binomial(n: u64, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid("p", format!("must lie in [0, 1], got {p}")));
        }
        Ok(Self(Family::Binomial { n, p }))
    }

    pub fn poisson(mean: f64) -> Result<Self> {
        if !(mean >= 0.0 && mean.is_finite()) {
            return Err(Error::invalid("mean", format!("must be finite and >= 0, got {mean}")));
        }
        Ok(Self(Family::Poisson { mean }))
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        finite("lo", lo)?;
        finite("hi", hi)?;
        if hi <= lo {
            return Err(Error::invalid("hi", format!("must exceed lo = {lo}, got {hi}")));
        }
        Ok(Self(Family::Uniform { lo, hi }))
    }

    pub fn family(&self) -> &Family {
        &self.0
    }

    pub fn is_continuous(&self) -> bool {
        !matches!(self.0, Family::Binomial { .. } | Family::Poisson { .. })
    }

    /// Draw one variate. Discrete families return integral values.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.0 {
            Family::Gaussian { mean, sd } => {
                let n: f64 = StandardNormal.sample(rng);
                mean + sd * n
            }
            Family::Gamma { shape, rate } => standard_gamma(shape, rng) / rate,
            Family::Beta { a, b } => {
                let x = standard_gamma(a, rng);
                let y = standard_gamma(b, rng);
                x / (x + y)
            }
            Family::Binomial { n, p } => draw_binomial(n, p, rng) as f64,
            Family::Poisson { mean } => {
                if mean == 0.0 {
                    0.0
                } else {
                    rand_distr::Poisson::new(mean)
                        .expect("validated mean")
                        .sample(rng)
                }
            }
            Family::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
        }
    }

    /// Cumulative distribution function of a continuous family.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        let u = match self.0 {
            Family::Gaussian { mean, sd } => {
                special::standard_normal_cdf((x - mean) / sd)
            }
            Family::Gamma { shape, rate } => {
                let y = x * rate;
                if y <= 0.0 {
                    0.0
                } else if y.is_infinite() {
                    1.0
                } else {
                    gamma::gamma_lr(shape, y)
                }
            }
            Family::Beta { a, b } => {
                if x <= 0.0 {
                    0.0
                } else if x >= 1.0 {
                    1.0
                } else {
                    beta::beta_reg(a, b, x)
                }
            }
            Family::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Family::Binomial { .. } | Family::Poisson { .. } => {
                return Err(self.unsupported("cdf"));
            }
        };
        Ok(u.clamp(0.0, 1.0))
    }

    /// Inverse CDF for `u` strictly inside (0, 1).
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::ProbabilityOutOfRange(u));
        }
        match self.0 {
            Family::Gaussian { mean, sd } => Ok(mean + sd * special::standard_normal_quantile(u)),
            Family::Gamma { shape, rate } => Ok(standard_gamma_quantile(shape, u) / rate),
            Family::Beta { a, b } => Ok(beta_quantile(a, b, u)),
            Family::Uniform { lo, hi } => Ok(lo + (hi - lo) * u),
            Family::Binomial { .. } | Family::Poisson { .. } => Err(self.unsupported("quantile")),
        }
    }

    /// Log density of a continuous family (`-inf` outside the support).
    pub fn ln_pdf(&self, x: f64) -> Result<f64> {
        Ok(match self.0 {
            Family::Gaussian { mean, sd } => {
                let z = (x - mean) / sd;
                -0.5 * z * z - sd.ln() - 0.5 * (2.0 * PI).ln()
            }
            Family::Gamma { shape, rate } => {
                if x <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    shape * rate.ln() + (shape - 1.0) * x.ln() - rate * x - gamma::ln_gamma(shape)
                }
            }
            Family::Beta { a, b } => {
                if x <= 0.0 || x >= 1.0 {
                    f64::NEG_INFINITY
                } else {
                    (a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - beta::ln_beta(a, b)
                }
            }
            Family::Uniform { lo, hi } => {
                if x < lo || x > hi {
                    f64::NEG_INFINITY
                } else {
                    -(hi - lo).ln()
                }
            }
            Family::Binomial { .. } | Family::Poisson { .. } => {
                return Err(self.unsupported("density"));
            }
        })
    }

    pub fn mean(&self) -> f64 {
        match self.0 {
            Family::Gaussian { mean, .. } => mean,
            Family::Gamma { shape, rate } => shape / rate,
            Family::Beta { a, b } => a / (a + b),
            Family::Binomial { n, p } => n as f64 * p,
            Family::Poisson { mean } => mean,
            Family::Uniform { lo, hi } => 0.5 * (lo + hi),
        }
    }

    fn unsupported(&self, operation: &'static str) -> Error {
        Error::UnsupportedFamily {
            operation,
            family: self.0.name(),
        }
    }
}

impl fmt::Display for ScalarDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Family::Gaussian { mean, sd } => write!(f, "Gaussian(mean={mean}, sd={sd})"),
            Family::Gamma { shape, rate } => write!(f, "Gamma(shape={shape}, rate={rate})"),
            Family::Beta { a, b } => write!(f, "Beta(a={a}, b={b})"),
            Family::Binomial { n, p } => write!(f, "Binomial(n={n}, p={p})"),
            Family::Poisson { mean } => write!(f, "Poisson(mean={mean})"),
            Family::Uniform { lo, hi } => write!(f, "Uniform(lo={lo}, hi={hi})"),
        }
    }
}

/// Free-function form of [`ScalarDistribution::draw`].
pub fn draw<R: Rng + ?Sized>(dist: &ScalarDistribution, rng: &mut R) -> f64 {
    dist.draw(rng)
}

/// Free-function form of [`ScalarDistribution::cdf`].
pub fn cdf(dist: &ScalarDistribution, x: f64) -> Result<f64> {
    dist.cdf(x)
}

/// Free-function form of [`ScalarDistribution::quantile`].
pub fn quantile(dist: &ScalarDistribution, u: f64) -> Result<f64> {
    dist.quantile(u)
}

fn standard_gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    rand_distr::Gamma::new(shape, 1.0)
        .expect("validated shape")
        .sample(rng)
}

fn draw_binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    if p == 0.0 || n == 0 {
        return 0;
    }
    if p == 1.0 {
        return n;
    }
    if n <= BERNOULLI_SUM_MAX_N {
        (0..n).filter(|_| rng.random::<f64>() < p).count() as u64
    } else {
        rand_distr::Binomial::new(n, p)
            .expect("validated p")
            .sample(rng)
    }
}

fn gamma_pdf_unit_rate(shape: f64, y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    ((shape - 1.0) * y.ln() - y - gamma::ln_gamma(shape)).exp()
}

/// Quantile of Gamma(shape, rate = 1).
fn standard_gamma_quantile(shape: f64, u: f64) -> f64 {
    let z = special::standard_normal_quantile(u);
    let c = 1.0 / (9.0 * shape);
    let wh = shape * (1.0 - c + z * c.sqrt()).powi(3);
    let start = if wh > 1e-3 * shape && wh.is_finite() {
        wh
    } else {
        ((u.ln() + gamma::ln_gamma(shape + 1.0)) / shape).exp()
    };
    let slope = |y: f64| gamma_pdf_unit_rate(shape, y);
    // Solve in whichever tail keeps the target away from 1.
    if u <= 0.5 {
        special::invert_monotone(
            |y| if y <= 0.0 { -u } else { gamma::gamma_lr(shape, y) - u },
            slope,
            0.0,
            f64::INFINITY,
            start,
        )
    } else {
        let upper = 1.0 - u;
        special::invert_monotone(
            |y| if y <= 0.0 { upper - 1.0 } else { upper - gamma::gamma_ur(shape, y) },
            slope,
            0.0,
            f64::INFINITY,
            start,
        )
    }
}

fn beta_quantile(a: f64, b: f64, u: f64) -> f64 {
    let ln_b = beta::ln_beta(a, b);
    special::invert_monotone(
        |x| {
            if x <= 0.0 {
                -u
            } else if x >= 1.0 {
                1.0 - u
            } else {
                beta::beta_reg(a, b, x) - u
            }
        },
        |x| {
            if x <= 0.0 || x >= 1.0 {
                0.0
            } else {
                ((a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_b).exp()
            }
        },
        0.0,
        1.0,
        a / (a + b),
    )
}
