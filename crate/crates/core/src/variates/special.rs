//! Standard normal CDF and quantile, and a safeguarded monotone inverter.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Complementary error function for `x >= 0`.
///
/// Below 2.5 uses the positive-term series
/// `erf(x) = 2/sqrt(pi) exp(-x^2) sum 2^n x^(2n+1) / (2n+1)!!`; above, the
/// Laplace continued fraction evaluated backwards from a fixed depth.
fn erfc_nonneg(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x < 2.5 {
        let two_x2 = 2.0 * x * x;
        let mut term = x;
        let mut sum = x;
        let mut n = 0.0;
        while term > 1e-17 * sum {
            n += 1.0;
            term *= two_x2 / (2.0 * n + 1.0);
            sum += term;
        }
        1.0 - 2.0 / PI.sqrt() * (-x * x).exp() * sum
    } else {
        let mut f = x;
        for k in (1..=80).rev() {
            f = x + 0.5 * k as f64 / f;
        }
        (-x * x).exp() / (PI.sqrt() * f)
    }
}

/// Standard normal CDF with absolute error near 1e-16.
pub(crate) fn standard_normal_cdf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z < 0.0 {
        0.5 * erfc_nonneg(-z * FRAC_1_SQRT_2)
    } else {
        1.0 - 0.5 * erfc_nonneg(z * FRAC_1_SQRT_2)
    }
}

/// Inverse of the standard normal CDF (Wichura's AS 241, PPND16).
///
/// Relative accuracy is about 1e-16 over the open unit interval.
#[allow(clippy::excessive_precision)]
pub(crate) fn standard_normal_quantile(p: f64) -> f64 {
    const A: [f64; 8] = [
        3.387_132_872_796_366_608,
        1.331_416_678_917_843_774_5e2,
        1.971_590_950_306_551_442_7e3,
        1.373_169_376_550_946_112_5e4,
        4.592_195_393_154_987_145_7e4,
        6.726_577_092_700_870_085_3e4,
        3.343_057_558_358_812_810_5e4,
        2.509_080_928_730_122_672_7e3,
    ];
    const B: [f64; 8] = [
        1.0,
        4.231_333_070_160_091_125_2e1,
        6.871_870_074_920_579_083e2,
        5.394_196_021_424_751_107_7e3,
        2.121_379_430_158_659_586_7e4,
        3.930_789_580_009_271_061e4,
        2.872_908_573_572_194_267_4e4,
        5.226_495_278_852_854_561e3,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_577_34,
        4.630_337_846_156_545_295_9,
        5.769_497_221_460_691_405_5,
        3.647_848_324_763_204_605_04,
        1.270_458_252_452_368_382_58,
        2.417_807_251_774_506_117_7e-1,
        2.272_384_498_926_918_458_33e-2,
        7.745_450_142_783_414_076_4e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_758_821_87,
        1.676_384_830_183_803_849_4,
        6.897_673_349_851_000_045_5e-1,
        1.481_039_764_274_800_745_9e-1,
        1.519_866_656_361_645_719_66e-2,
        5.475_938_084_995_344_946e-4,
        1.050_750_071_644_416_843_24e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103_777_2,
        5.463_784_911_164_114_369_9,
        1.784_826_539_917_291_335_8,
        2.965_605_718_285_048_912_3e-1,
        2.653_218_952_657_612_309_3e-2,
        1.242_660_947_388_078_438_6e-3,
        2.711_555_568_743_487_578_15e-5,
        2.010_334_399_292_288_132_65e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        5.998_322_065_558_879_376_9e-1,
        1.369_298_809_227_358_053_1e-1,
        1.487_536_129_085_061_485_25e-2,
        7.868_691_311_456_132_591e-4,
        1.846_318_317_510_054_681_8e-5,
        1.421_511_758_316_445_888_7e-7,
        2.044_263_103_389_939_785_64e-15,
    ];

    fn ratio(num: &[f64; 8], den: &[f64; 8], r: f64) -> f64 {
        let n = num.iter().rev().fold(0.0, |acc, &c| acc * r + c);
        let d = den.iter().rev().fold(0.0, |acc, &c| acc * r + c);
        n / d
    }

    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return q * ratio(&A, &B, r);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        ratio(&C, &D, r)
    } else {
        r -= 5.0;
        ratio(&E, &F, r)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// Find `x` in `[lo, hi]` with `g(x) = 0` for a nondecreasing `g`.
///
/// `slope` supplies `g'(x)` for Newton steps; any step that leaves the
/// current bracket is replaced by bisection. `hi` may be infinite, in which
/// case it is found by doubling from `start`.
pub(crate) fn invert_monotone(
    g: impl Fn(f64) -> f64,
    slope: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    start: f64,
) -> f64 {
    if hi.is_infinite() {
        let mut probe = start.max(1.0);
        while g(probe) < 0.0 {
            lo = probe;
            probe *= 2.0;
            if !probe.is_finite() {
                return f64::MAX;
            }
        }
        hi = probe;
    }
    let mut x = if start > lo && start < hi {
        start
    } else {
        0.5 * (lo + hi)
    };
    for _ in 0..400 {
        let gx = g(x);
        if gx == 0.0 {
            return x;
        }
        if gx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = slope(x);
        let newton = if d > 0.0 && d.is_finite() {
            x - gx / d
        } else {
            f64::NAN
        };
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            return next;
        }
        if hi - lo <= 2.0 * f64::EPSILON * hi.abs() {
            return next;
        }
        x = next;
    }
    x
}
