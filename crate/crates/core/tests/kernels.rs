mod common;

use common::*;
use overrelax::samplers::kernels::{
    gibbs, ordered_overrelax_cdf, ordered_overrelax_direct, ordered_underrelax, overrelax_uniform,
};
use overrelax::variates::{RngStream, ScalarDistribution};

#[test]
fn three_point_target_with_two_draws_is_balanced() {
    let pi = [0.2, 0.3, 0.5];
    for kind in [RankMove::Over, RankMove::Under] {
        let p = enumerate_transitions(&pi, 2, kind);
        for row in &p {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert!(balance_violation(&pi, &p) < 1e-12, "{kind:?}: {p:?}");
    }
}

#[test]
fn all_small_targets_are_balanced() {
    for pi in balance_targets() {
        for k in 1..=3 {
            for kind in [RankMove::Over, RankMove::Under] {
                let p = enumerate_transitions(&pi, k, kind);
                assert!(balance_violation(&pi, &p) < 1e-12, "m={} k={k} {kind:?}", pi.len());
            }
        }
    }
}

#[test]
fn single_draw_overrelaxation_is_a_gibbs_step() {
    // With K = 1 the enumerated kernel puts mass pi_b on every b.
    let pi = [0.2, 0.3, 0.5];
    let p = enumerate_transitions(&pi, 1, RankMove::Over);
    for row in &p {
        for (b, &v) in row.iter().enumerate() {
            assert!((v - pi[b]).abs() < 1e-15);
        }
    }
}

// The sampling kernel, run on a discrete family, must reproduce the
// enumerated transition probabilities.
#[test]
fn direct_kernel_matches_enumeration_on_discrete_target() {
    let dist = ScalarDistribution::binomial(2, 0.4).unwrap();
    let pi = [0.36, 0.48, 0.16];
    let n = 200_000;
    for (kind, k) in [(RankMove::Over, 2u32), (RankMove::Over, 3), (RankMove::Under, 2)] {
        let exact = enumerate_transitions(&pi, k as usize, kind);
        let mut rng = RngStream::for_label(3, "discrete");
        for (a, row) in exact.iter().enumerate() {
            let mut counts = [0usize; 3];
            for _ in 0..n {
                let out = match kind {
                    RankMove::Over => ordered_overrelax_direct(&dist, a as f64, k, &mut rng),
                    RankMove::Under => ordered_underrelax(&dist, a as f64, k, &mut rng),
                }
                .unwrap()
                .value;
                counts[out as usize] += 1;
            }
            for b in 0..3 {
                let p = row[b];
                let se = (p * (1.0 - p) / n as f64).sqrt();
                let got = counts[b] as f64 / n as f64;
                assert!((got - p).abs() <= 5.0 * se + 1e-12, "{kind:?} K={k} {a}->{b}: {got} vs {p}");
            }
        }
    }
}

#[test]
fn single_draw_underrelaxation_cases() {
    // From the lowest rank the downward coin is rejected and the upward coin
    // takes the single draw.
    let dist = ScalarDistribution::uniform(0.0, 1.0).unwrap();
    let mut rng = RngStream::new(8, 0);
    let (mut kept, mut moved) = (0, 0);
    for _ in 0..2000 {
        let out = ordered_underrelax(&dist, 0.0, 1, &mut rng).unwrap();
        assert_eq!(out.audit.r, Some(0));
        if out.value == 0.0 {
            assert_eq!(out.audit.chosen_index, None);
            kept += 1;
        } else {
            assert_eq!(out.audit.chosen_index, Some(1));
            moved += 1;
        }
    }
    assert!(kept > 900 && moved > 900, "{kept} {moved}");
}

/// Exact `(E[u'], Var[u'])` from summing over `r ~ Bin(K, u)` and the beta
/// moments of each branch (scipy, double precision).
const UNIFORM_MOMENTS: &[(u32, f64, f64, f64)] = &[
    (50, 0.7, 0.319554, 0.0120874),
    (50, 0.8, 0.219608, 0.0082128),
    (50, 0.9, 0.119608, 0.0042912),
    (50, 0.95, 0.069608, 0.0023305),
    (100, 0.7, 0.309901, 0.0060365),
    (100, 0.8, 0.209901, 0.0040565),
    (100, 0.9, 0.109901, 0.0020763),
    (100, 0.95, 0.059901, 0.0010862),
];

fn uniform_moments(u: f64, k: u32, n: usize, seed: u64) -> (f64, f64) {
    let mut rng = RngStream::new(seed, u64::from(k));
    let out: Vec<f64> = (0..n).map(|_| overrelax_uniform(u, k, &mut rng).unwrap().0).collect();
    mean_var(&out)
}

#[test]
fn uniform_moments_match_exact_values() {
    let n = 200_000;
    for (i, &(k, u, mean, var)) in UNIFORM_MOMENTS.iter().enumerate() {
        let mean_se = (var / n as f64).sqrt();
        let (m, v) = uniform_moments(u, k, n, i as u64);
        assert!((m - mean).abs() < 5.0 * mean_se, "K={k} u={u}: mean {m} vs {mean}");
        assert!((v / var - 1.0).abs() < 0.04, "K={k} u={u}: var {v} vs {var}");
        let (m, v) = uniform_moments(1.0 - u, k, n, 100 + i as u64);
        assert!((m - (1.0 - mean)).abs() < 5.0 * mean_se, "K={k} u={}: mean {m}", 1.0 - u);
        assert!((v / var - 1.0).abs() < 0.04, "K={k} u={}: var {v}", 1.0 - u);
    }
}

#[test]
fn uniform_moments_follow_large_k_laws() {
    let n = 200_000;
    for (i, &(k, u, _, exact_var)) in UNIFORM_MOMENTS.iter().enumerate() {
        let kf = f64::from(k);
        let (m, v) = uniform_moments(u, k, n, 200 + i as u64);
        assert!((m - ((1.0 - u) + 1.0 / kf)).abs() < 0.005, "K={k} u={u}: {m}");
        let (m_low, _) = uniform_moments(1.0 - u, k, n, 300 + i as u64);
        assert!((m_low - (u - 1.0 / kf)).abs() < 0.005, "K={k} u={}: {m_low}", 1.0 - u);
        let approx = 2.0 * (1.0 - u) / kf;
        // At K = 50, u = 0.95 the exact variance is 16.5% above the
        // large-K approximation, so only the exact check above applies.
        if (exact_var / approx - 1.0).abs() < 0.15 {
            assert!((v / approx - 1.0).abs() < 0.15, "K={k} u={u}: var {v} vs {approx}");
        }
    }
}

#[test]
fn middle_rank_returns_input_unchanged() {
    let dist = ScalarDistribution::gamma(3.0, 2.0).unwrap();
    let mut rng = RngStream::new(4, 0);
    let mut seen = 0;
    for i in 0..20_000 {
        let x = 0.3 + (i % 50) as f64 * 0.05;
        let out = ordered_overrelax_cdf(&dist, x, 4, &mut rng).unwrap();
        if out.audit.r == Some(2) {
            assert_eq!(out.value, x);
            assert_eq!(out.audit.v, None);
            seen += 1;
        }
    }
    assert!(seen > 1000);
}

#[test]
fn one_draw_cdf_and_gibbs_agree_in_distribution() {
    let dist = ScalarDistribution::gamma(3.0, 2.0).unwrap();
    let mut rng = RngStream::new(12, 0);
    let n = 100_000;
    let over: Vec<f64> = (0..n)
        .map(|_| ordered_overrelax_cdf(&dist, 1.7, 1, &mut rng).unwrap().value)
        .collect();
    let heat: Vec<f64> = (0..n).map(|_| gibbs(&dist, &mut rng)).collect();
    let (ok, d, crit) = ks_two_sample_accepts(&over, &heat);
    assert!(ok, "D = {d} > {crit}");
}
