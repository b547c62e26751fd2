//! Target distributions described through their full conditionals.

mod pump;

pub use pump::{draw_pump_state, generate_pump_data, PumpDataset, PumpModel};

use std::ops::Deref;

use crate::variates::ScalarDistribution;
use crate::{Error, Result};

/// A target density known through its one-dimensional full conditionals.
///
/// `full_conditional(i, state)` must not read `state[i]`.
pub trait ConditionalModel: Sync {
    fn dim(&self) -> usize;

    fn full_conditional(&self, i: usize, state: &[f64]) -> Result<ScalarDistribution>;

    /// Unnormalised log density, when the model provides one.
    fn log_density(&self, _state: &[f64]) -> Option<f64> {
        None
    }
}

/// The current point of a chain: a fixed-length vector of finite reals.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("state", "must have at least one component"));
        }
        if let Some((index, &value)) = components.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteState { index, value });
        }
        Ok(Self(components))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for StateVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn check_index(i: usize, dim: usize) -> Result<()> {
    if i < dim {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { index: i, dim })
    }
}

/// Two standard-normal coordinates with correlation `rho`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BivariateGaussianModel {
    rho: f64,
}

impl BivariateGaussianModel {
    pub fn new(rho: f64) -> Result<Self> {
        if rho.is_nan() || rho.abs() >= 1.0 {
            return Err(Error::invalid("rho", format!("must satisfy |rho| < 1, got {rho}")));
        }
        Ok(Self { rho })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Mahalanobis form `(x1^2 - 2 rho x1 x2 + x2^2) / (1 - rho^2)`; constant
    /// on density contours.
    pub fn quadratic_form(&self, state: &[f64]) -> f64 {
        let (x1, x2) = (state[0], state[1]);
        (x1 * x1 - 2.0 * self.rho * x1 * x2 + x2 * x2) / (1.0 - self.rho * self.rho)
    }
}

/// Conditional of one coordinate given the other: `N(rho * other, 1 - rho^2)`.
pub fn bivariate_conditional(rho: f64, other: f64) -> Result<ScalarDistribution> {
    ScalarDistribution::gaussian(rho * other, (1.0 - rho * rho).sqrt())
}

impl ConditionalModel for BivariateGaussianModel {
    fn dim(&self) -> usize {
        2
    }

    fn full_conditional(&self, i: usize, state: &[f64]) -> Result<ScalarDistribution> {
        check_index(i, 2)?;
        bivariate_conditional(self.rho, state[1 - i])
    }

    fn log_density(&self, state: &[f64]) -> Option<f64> {
        Some(-0.5 * self.quadratic_form(state))
    }
}

/// Density proportional to `exp(-(1 + x1^2)(1 + x2^2))`.
///
/// Not Gaussian jointly, but every full conditional is.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MultiquadraticModel;

/// Conditional of one coordinate: `N(0, 1 / (2 (1 + other^2)))`.
pub fn multiquadratic_conditional(other: f64) -> Result<ScalarDistribution> {
    ScalarDistribution::gaussian(0.0, 1.0 / (2.0 * (1.0 + other * other)).sqrt())
}

impl ConditionalModel for MultiquadraticModel {
    fn dim(&self) -> usize {
        2
    }

    fn full_conditional(&self, i: usize, state: &[f64]) -> Result<ScalarDistribution> {
        check_index(i, 2)?;
        multiquadratic_conditional(state[1 - i])
    }

    fn log_density(&self, state: &[f64]) -> Option<f64> {
        Some(-(1.0 + state[0] * state[0]) * (1.0 + state[1] * state[1]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variates::Family;

    fn gaussian_params(d: &ScalarDistribution) -> (f64, f64) {
        match *d.family() {
            Family::Gaussian { mean, sd } => (mean, sd),
            other => panic!("expected Gaussian, got {other:?}"),
        }
    }

    #[test]
    fn bivariate_conditional_examples() {
        assert_eq!(gaussian_params(&bivariate_conditional(0.0, 7.3).unwrap()), (0.0, 1.0));
        let (m, s) = gaussian_params(&bivariate_conditional(0.998, 1.0).unwrap());
        assert_eq!(m, 0.998);
        assert!((s - 0.063214).abs() < 1e-6);
        assert!((s * s - 0.003996).abs() < 1e-15);
        let (m, s2) = gaussian_params(&bivariate_conditional(0.998, -1.0).unwrap());
        assert_eq!((m, s2), (-0.998, s));
    }

    #[test]
    fn rho_must_be_inside_unit_interval() {
        assert!(BivariateGaussianModel::new(1.0).is_err());
        assert!(BivariateGaussianModel::new(-1.2).is_err());
        assert!(BivariateGaussianModel::new(f64::NAN).is_err());
    }

    #[test]
    fn multiquadratic_conditional_examples() {
        let (m, s) = gaussian_params(&multiquadratic_conditional(0.0).unwrap());
        assert_eq!(m, 0.0);
        assert!((s - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(gaussian_params(&multiquadratic_conditional(1.0).unwrap()), (0.0, 0.5));
        for other in [-40.0, -2.0, 0.3, 9.0] {
            assert_eq!(gaussian_params(&multiquadratic_conditional(other).unwrap()).0, 0.0);
        }
    }

    #[test]
    fn multiquadratic_conditional_matches_density_slice() {
        // log density along x1 with x2 fixed differs from the conditional log
        // pdf by a constant.
        let m = MultiquadraticModel;
        let x2 = 0.8;
        let cond = m.full_conditional(0, &[0.0, x2]).unwrap();
        let offsets: Vec<f64> = (-20..=20)
            .map(|k| {
                let x1 = k as f64 * 0.1;
                m.log_density(&[x1, x2]).unwrap() - cond.ln_pdf(x1).unwrap()
            })
            .collect();
        for o in &offsets {
            assert!((o - offsets[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn conditionals_ignore_own_component() {
        let b = BivariateGaussianModel::new(0.6).unwrap();
        let m = MultiquadraticModel;
        for i in 0..2 {
            let mut s = [0.4, -1.1];
            let before = (b.full_conditional(i, &s).unwrap(), m.full_conditional(i, &s).unwrap());
            s[i] = 123.0;
            let after = (b.full_conditional(i, &s).unwrap(), m.full_conditional(i, &s).unwrap());
            assert_eq!(before, after);
        }
    }

    #[test]
    fn index_is_checked() {
        let b = BivariateGaussianModel::new(0.6).unwrap();
        assert!(matches!(
            b.full_conditional(2, &[0.0, 0.0]),
            Err(Error::IndexOutOfRange { index: 2, dim: 2 })
        ));
    }

    #[test]
    fn state_vector_rejects_non_finite() {
        assert!(StateVector::new(vec![1.0, f64::INFINITY]).is_err());
        assert!(StateVector::new(vec![]).is_err());
        assert_eq!(&*StateVector::new(vec![1.0, 2.0]).unwrap(), &[1.0, 2.0]);
    }
}
