#![allow(dead_code)]

/// `c(alpha) = sqrt(-ln(alpha / 2) / 2)` for alpha = 0.001.
pub const KS_C_001: f64 = 1.949_474_603_520_405_1;

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
pub fn ks_statistic(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let v = sorted(xs);
    let n = v.len() as f64;
    v.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
    })
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample_statistic(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (sorted(a), sorted(b));
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// True when the one-sample test does not reject at level 0.001.
pub fn ks_accepts(xs: &[f64], cdf: impl Fn(f64) -> f64) -> (bool, f64, f64) {
    let d = ks_statistic(xs, cdf);
    let crit = KS_C_001 / (xs.len() as f64).sqrt();
    (d <= crit, d, crit)
}

/// True when the two-sample test does not reject at level 0.001.
pub fn ks_two_sample_accepts(a: &[f64], b: &[f64]) -> (bool, f64, f64) {
    let d = ks_two_sample_statistic(a, b);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let crit = KS_C_001 * ((n + m) / (n * m)).sqrt();
    (d <= crit, d, crit)
}

pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Which rank move to enumerate.
#[derive(Clone, Copy, Debug)]
pub enum RankMove {
    Over,
    Under,
}

/// Exact transition matrix of an ordered rank move on the discrete target
/// `pi` over support `0..m`, by enumerating every tuple of `k` draws, every
/// tie position of the old value and, for underrelaxation, both coin faces.
pub fn enumerate_transitions(pi: &[f64], k: usize, kind: RankMove) -> Vec<Vec<f64>> {
    use overrelax::samplers::kernels::{overrelaxed_value, rank_bounds, underrelaxed_value};
    let m = pi.len();
    let mut p = vec![vec![0.0; m]; m];
    for (a, row) in p.iter_mut().enumerate() {
        let current = a as f64;
        for code in 0..m.pow(k as u32) {
            let mut c = code;
            let draws: Vec<f64> = (0..k)
                .map(|_| {
                    let d = c % m;
                    c /= m;
                    d as f64
                })
                .collect();
            let weight: f64 = draws.iter().map(|&d| pi[d as usize]).product();
            let (below, ties) = rank_bounds(current, &draws);
            let w = weight / (ties + 1) as f64;
            for r in below..=below + ties {
                match kind {
                    RankMove::Over => row[overrelaxed_value(current, &draws, r) as usize] += w,
                    RankMove::Under => {
                        for up in [false, true] {
                            let b = underrelaxed_value(current, &draws, r, up).unwrap_or(current);
                            row[b as usize] += w / 2.0;
                        }
                    }
                }
            }
        }
    }
    p
}

/// `max |pi_a P(a->b) - pi_b P(b->a)|`.
pub fn balance_violation(pi: &[f64], p: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for a in 0..pi.len() {
        for b in 0..pi.len() {
            worst = worst.max((pi[a] * p[a][b] - pi[b] * p[b][a]).abs());
        }
    }
    worst
}

/// Discrete targets used by the balance checks.
pub fn balance_targets() -> Vec<Vec<f64>> {
    vec![
        vec![0.35, 0.65],
        vec![0.2, 0.3, 0.5],
        vec![0.1, 0.4, 0.2, 0.3],
    ]
}
