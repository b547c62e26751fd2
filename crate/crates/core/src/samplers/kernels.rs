//! Single-variable update rules acting on a known conditional distribution.
//!
//! Each kernel maps the current value of one component to a new value,
//! given that component's full conditional. The model-level wrappers in the
//! parent module look the conditional up and delegate here.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Update, UpdateAudit};
use crate::variates::{Family, ScalarDistribution};
use crate::{Error, Result};

/// `u'` is clamped to `[PROBABILITY_FLOOR, 1 - PROBABILITY_FLOOR]` before
/// the inverse CDF is applied.
pub const PROBABILITY_FLOOR: f64 = 1e-15;

pub fn clamp_probability(u: f64) -> f64 {
    u.clamp(PROBABILITY_FLOOR, 1.0 - PROBABILITY_FLOOR)
}

pub fn gibbs<R: Rng + ?Sized>(dist: &ScalarDistribution, rng: &mut R) -> f64 {
    dist.draw(rng)
}

/// `mean + alpha (current - mean) + sd sqrt(1 - alpha^2) noise`.
pub fn adler_step(mean: f64, sd: f64, adler_alpha: f64, current: f64, noise: f64) -> f64 {
    mean + adler_alpha * (current - mean) + sd * (1.0 - adler_alpha * adler_alpha).sqrt() * noise
}

pub fn adler<R: Rng + ?Sized>(
    dist: &ScalarDistribution,
    current: f64,
    adler_alpha: f64,
    rng: &mut R,
) -> Result<Update> {
    check_adler_alpha(adler_alpha)?;
    let Family::Gaussian { mean, sd } = *dist.family() else {
        return Err(Error::NonGaussianConditional(dist.family().name()));
    };
    let noise: f64 = StandardNormal.sample(rng);
    Ok(Update {
        value: adler_step(mean, sd, adler_alpha, current, noise),
        audit: UpdateAudit {
            noise_n: Some(noise),
            ..UpdateAudit::default()
        },
    })
}

pub(crate) fn check_adler_alpha(adler_alpha: f64) -> Result<()> {
    if (-1.0..=1.0).contains(&adler_alpha) {
        Ok(())
    } else {
        Err(Error::invalid(
            "adler_alpha",
            format!("must satisfy −1 ≤ α ≤ +1, got {adler_alpha}"),
        ))
    }
}

pub(crate) fn check_k(k: u32) -> Result<()> {
    if k >= 1 {
        Ok(())
    } else {
        Err(Error::invalid("k", "must be at least 1"))
    }
}

/// Count the draws strictly below `current` and those exactly equal to it.
///
/// The rank of `current` among the `K + 1` values is `below + j` for a tie
/// offset `j` in `0..=ties`.
pub fn rank_bounds(current: f64, draws: &[f64]) -> (usize, usize) {
    draws.iter().fold((0, 0), |(below, ties), &d| {
        if d < current {
            (below + 1, ties)
        } else if d == current {
            (below, ties + 1)
        } else {
            (below, ties)
        }
    })
}

/// Value at position `index` of the nondecreasing ordering of `draws` plus
/// `current`.
pub fn order_statistic(current: f64, draws: &[f64], index: usize) -> f64 {
    let mut all = Vec::with_capacity(draws.len() + 1);
    all.extend_from_slice(draws);
    all.push(current);
    *all.select_nth_unstable_by(index, f64::total_cmp).1
}

/// The overrelaxed choice: position `K - r` of the ordering.
pub fn overrelaxed_value(current: f64, draws: &[f64], r: usize) -> f64 {
    order_statistic(current, draws, draws.len() - r)
}

/// The underrelaxed choice: position `r + 1` (`up`) or `r - 1`, or `None`
/// when that position falls outside `0..=K`.
pub fn underrelaxed_value(current: f64, draws: &[f64], r: usize, up: bool) -> Option<f64> {
    let target = if up { r.checked_add(1)? } else { r.checked_sub(1)? };
    (target <= draws.len()).then(|| order_statistic(current, draws, target))
}

fn ranked_draws<R: Rng + ?Sized>(
    dist: &ScalarDistribution,
    current: f64,
    k: u32,
    rng: &mut R,
) -> Result<(Vec<f64>, usize)> {
    check_k(k)?;
    let draws: Vec<f64> = (0..k).map(|_| dist.draw(rng)).collect();
    let (below, ties) = rank_bounds(current, &draws);
    let r = if ties == 0 {
        below
    } else {
        below + rng.random_range(0..=ties)
    };
    Ok((draws, r))
}

/// Ordered overrelaxation by drawing `K` conditional variates explicitly.
pub fn ordered_overrelax_direct<R: Rng + ?Sized>(
    dist: &ScalarDistribution,
    current: f64,
    k: u32,
    rng: &mut R,
) -> Result<Update> {
    let (draws, r) = ranked_draws(dist, current, k, rng)?;
    let chosen = draws.len() - r;
    Ok(Update {
        value: order_statistic(current, &draws, chosen),
        audit: UpdateAudit {
            r: Some(r as u32),
            chosen_index: Some(chosen as u32),
            ..UpdateAudit::default()
        },
    })
}

/// Ordered overrelaxation of `u` with respect to Uniform(0, 1).
///
/// Returns `(u', r, v)`: `r ~ Binomial(K, u)` is the rank `u` would have
/// among `K` uniforms, and `u'` is the order statistic at position `K - r`,
/// obtained by rescaling a beta variate `v`.
pub fn overrelax_uniform<R: Rng + ?Sized>(u: f64, k: u32, rng: &mut R) -> Result<(f64, u32, Option<f64>)> {
    check_k(k)?;
    let u = u.clamp(0.0, 1.0);
    let r = ScalarDistribution::binomial(u64::from(k), u)?.draw(rng) as u32;
    let mirror = k - r;
    if r > mirror {
        let v = ScalarDistribution::beta(f64::from(mirror + 1), f64::from(r - mirror))?.draw(rng);
        Ok((u * v, r, Some(v)))
    } else if r < mirror {
        let v = ScalarDistribution::beta(f64::from(r + 1), f64::from(mirror - r))?.draw(rng);
        Ok((1.0 - (1.0 - u) * v, r, Some(v)))
    } else {
        Ok((u, r, None))
    }
}

/// Ordered overrelaxation through the conditional CDF: one binomial and at
/// most one beta draw regardless of `K`.
pub fn ordered_overrelax_cdf<R: Rng + ?Sized>(
    dist: &ScalarDistribution,
    current: f64,
    k: u32,
    rng: &mut R,
) -> Result<Update> {
    let u = dist.cdf(current)?;
    let (u_prime, r, v) = overrelax_uniform(u, k, rng)?;
    let mut audit = UpdateAudit {
        u: Some(u),
        r: Some(r),
        v,
        u_prime: Some(u_prime),
        chosen_index: Some(k - r),
        ..UpdateAudit::default()
    };
    if v.is_none() {
        // r = K - r: the old value is its own mirror image.
        return Ok(Update { value: current, audit });
    }
    let clamped = clamp_probability(u_prime);
    audit.u_prime = Some(clamped);
    Ok(Update {
        value: dist.quantile(clamped)?,
        audit,
    })
}

/// Ordered underrelaxation: move to a neighbouring position `r +- 1` of the
/// ordering, chosen by a fair coin; out-of-range choices leave the value
/// unchanged.
pub fn ordered_underrelax<R: Rng + ?Sized>(
    dist: &ScalarDistribution,
    current: f64,
    k: u32,
    rng: &mut R,
) -> Result<Update> {
    let (draws, r) = ranked_draws(dist, current, k, rng)?;
    let up: bool = rng.random();
    let chosen = if up { Some(r + 1) } else { r.checked_sub(1) };
    let value = underrelaxed_value(current, &draws, r, up).unwrap_or(current);
    Ok(Update {
        value,
        audit: UpdateAudit {
            r: Some(r as u32),
            chosen_index: chosen.filter(|&c| c <= draws.len()).map(|c| c as u32),
            ..UpdateAudit::default()
        },
    })
}
