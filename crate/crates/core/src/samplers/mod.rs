//! Component-wise update kernels and the sequential-scan chain driver.

mod chain;
pub mod kernels;

pub use chain::{run_chain, run_chain_observed, ChainTrace, Monitor};

use std::fmt;

use rand::Rng;

use crate::models::{check_index, ConditionalModel};
use crate::{Error, Result};

/// How the ordered-overrelaxation step is realised.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OverrelaxImpl {
    /// Draw `K` conditional variates and rank the old value among them.
    Direct,
    /// Transform through the conditional CDF; cost independent of `K`.
    Cdf,
}

impl OverrelaxImpl {
    pub fn as_str(&self) -> &'static str {
        match self {
            OverrelaxImpl::Direct => "direct",
            OverrelaxImpl::Cdf => "cdf",
        }
    }
}

impl std::str::FromStr for OverrelaxImpl {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(OverrelaxImpl::Direct),
            "cdf" => Ok(OverrelaxImpl::Cdf),
            other => Err(Error::config("impl", format!("expected `direct` or `cdf`, got `{other}`"))),
        }
    }
}

/// The update rule applied to every component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SamplerSpec {
    Gibbs,
    Adler { adler_alpha: f64 },
    OrderedOver { k: u32, implementation: OverrelaxImpl },
    OrderedUnder { k: u32 },
}

impl SamplerSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SamplerSpec::Gibbs => Ok(()),
            SamplerSpec::Adler { adler_alpha } => kernels::check_adler_alpha(adler_alpha),
            SamplerSpec::OrderedOver { k, .. } | SamplerSpec::OrderedUnder { k } => kernels::check_k(k),
        }
    }
}

impl fmt::Display for SamplerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SamplerSpec::Gibbs => write!(f, "gibbs"),
            SamplerSpec::Adler { adler_alpha } => write!(f, "adler(alpha={adler_alpha})"),
            SamplerSpec::OrderedOver { k, implementation } => {
                write!(f, "ordered-over(k={k}, impl={})", implementation.as_str())
            }
            SamplerSpec::OrderedUnder { k } => write!(f, "ordered-under(k={k})"),
        }
    }
}

/// Intermediate quantities of one update, for inspection and testing.
///
/// Which fields are set depends on the kernel: `u`, `v`, `u_prime` come from
/// the CDF implementation, `r` and `chosen_index` from the ordered kernels,
/// `noise_n` from Adler's method.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct UpdateAudit {
    pub u: Option<f64>,
    pub r: Option<u32>,
    pub v: Option<f64>,
    pub u_prime: Option<f64>,
    pub noise_n: Option<f64>,
    pub chosen_index: Option<u32>,
}

/// The new value of a component plus how it was obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Update {
    pub value: f64,
    pub audit: UpdateAudit,
}

impl Update {
    fn plain(value: f64) -> Self {
        Self {
            value,
            audit: UpdateAudit::default(),
        }
    }
}

fn conditional<M: ConditionalModel + ?Sized>(
    i: usize,
    state: &[f64],
    model: &M,
) -> Result<crate::variates::ScalarDistribution> {
    check_index(i, model.dim())?;
    if state.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: state.len(),
        });
    }
    model.full_conditional(i, state)
}

/// Replace component `i` by a draw from its full conditional.
pub fn gibbs_update<M, R>(i: usize, state: &[f64], model: &M, rng: &mut R) -> Result<f64>
where
    M: ConditionalModel + ?Sized,
    R: Rng + ?Sized,
{
    Ok(kernels::gibbs(&conditional(i, state, model)?, rng))
}

/// Adler's Gaussian overrelaxation of component `i`.
pub fn adler_update<M, R>(i: usize, state: &[f64], model: &M, adler_alpha: f64, rng: &mut R) -> Result<f64>
where
    M: ConditionalModel + ?Sized,
    R: Rng + ?Sized,
{
    let dist = conditional(i, state, model)?;
    Ok(kernels::adler(&dist, state[i], adler_alpha, rng)?.value)
}

pub fn ordered_overrelax_direct<M, R>(i: usize, state: &[f64], model: &M, k: u32, rng: &mut R) -> Result<Update>
where
    M: ConditionalModel + ?Sized,
    R: Rng + ?Sized,
{
    let dist = conditional(i, state, model)?;
    kernels::ordered_overrelax_direct(&dist, state[i], k, rng)
}

pub fn ordered_overrelax_cdf<M, R>(i: usize, state: &[f64], model: &M, k: u32, rng: &mut R) -> Result<Update>
where
    M: ConditionalModel + ?Sized,
    R: Rng + ?Sized,
{
    let dist = conditional(i, state, model)?;
    kernels::ordered_overrelax_cdf(&dist, state[i], k, rng)
}

pub fn ordered_underrelax<M, R>(i: usize, state: &[f64], model: &M, k: u32, rng: &mut R) -> Result<Update>
where
    M: ConditionalModel + ?Sized,
    R: Rng + ?Sized,
{
    let dist = conditional(i, state, model)?;
    kernels::ordered_underrelax(&dist, state[i], k, rng)
}

/// Apply the update rule named by `spec` to component `i`.
pub fn update_component<M, R>(spec: &SamplerSpec, i: usize, state: &[f64], model: &M, rng: &mut R) -> Result<Update>
where
    M: ConditionalModel + ?Sized,
    R: Rng + ?Sized,
{
    let dist = conditional(i, state, model)?;
    let current = state[i];
    match *spec {
        SamplerSpec::Gibbs => Ok(Update::plain(kernels::gibbs(&dist, rng))),
        SamplerSpec::Adler { adler_alpha } => kernels::adler(&dist, current, adler_alpha, rng),
        SamplerSpec::OrderedOver {
            k,
            implementation: OverrelaxImpl::Direct,
        } => kernels::ordered_overrelax_direct(&dist, current, k, rng),
        SamplerSpec::OrderedOver {
            k,
            implementation: OverrelaxImpl::Cdf,
        } => kernels::ordered_overrelax_cdf(&dist, current, k, rng),
        SamplerSpec::OrderedUnder { k } => kernels::ordered_underrelax(&dist, current, k, rng),
    }
}

/// Rough `K` for ordered overrelaxation matching Adler's method with
/// `adler_alpha`, from equating the mean and variance of the new value one
/// standard deviation out: `K = 3.5 / (1 + alpha)`.
pub fn equivalent_k(adler_alpha: f64) -> Result<f64> {
    if !(adler_alpha > -1.0 && adler_alpha <= 0.0) {
        return Err(Error::invalid(
            "adler_alpha",
            format!("must satisfy −1 < α ≤ 0, got {adler_alpha}"),
        ));
    }
    Ok(3.5 / (1.0 + adler_alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::BivariateGaussianModel;
    use crate::variates::RngStream;

    #[test]
    fn equivalent_k_values() {
        assert!((equivalent_k(-0.89).unwrap() - 31.818).abs() < 1e-3);
        assert_eq!(equivalent_k(-0.89).unwrap().round(), 32.0);
        assert_eq!(equivalent_k(0.0).unwrap(), 3.5);
        assert_eq!(equivalent_k(-0.5).unwrap(), 7.0);
        assert!(equivalent_k(-1.0).is_err());
        assert!(equivalent_k(-2.0).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(SamplerSpec::Adler { adler_alpha: -1.5 }.validate().is_err());
        assert!(SamplerSpec::Adler { adler_alpha: 1.0 }.validate().is_ok());
        assert!(SamplerSpec::OrderedUnder { k: 0 }.validate().is_err());
        assert_eq!(
            SamplerSpec::OrderedOver {
                k: 11,
                implementation: OverrelaxImpl::Cdf
            }
            .to_string(),
            "ordered-over(k=11, impl=cdf)"
        );
    }

    #[test]
    fn independent_gibbs_ignores_other_coordinate() {
        let m = BivariateGaussianModel::new(0.0).unwrap();
        let mut a = RngStream::new(8, 0);
        let mut b = RngStream::new(8, 0);
        for other in [-50.0, 0.0, 3.0] {
            assert_eq!(
                gibbs_update(0, &[0.0, other], &m, &mut a).unwrap(),
                gibbs_update(0, &[9.0, 0.0], &m, &mut b).unwrap()
            );
        }
    }

    #[test]
    fn model_level_errors() {
        let m = BivariateGaussianModel::new(0.5).unwrap();
        let mut rng = RngStream::new(8, 0);
        assert!(matches!(
            gibbs_update(2, &[0.0, 0.0], &m, &mut rng),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            gibbs_update(0, &[0.0], &m, &mut rng),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
