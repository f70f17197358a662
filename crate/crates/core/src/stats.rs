//! Standard normal distribution function `F`, its density, inverse, and the
//! log of a probability gap `ln(F(x) − F(y))` accurate deep in the tails.
//!
//! `±∞` are valid arguments wherever the integral definition makes sense, so
//! callers can pass the sentinel speeds `ξ_0 = −∞`, `ξ_{d+1} = +∞` through.

use std::f64::consts::{FRAC_1_SQRT_2, LN_2};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// `1/√(2π)`
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
/// `ln √(2π)`
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// `F(z) = (1/√(2π)) ∫_{−∞}^z e^{−s²/2} ds`.
pub fn cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// `F′(z)`. Zero at `±∞`.
pub fn pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

/// `ln F′(z)`.
pub fn ln_pdf(z: f64) -> f64 {
    -0.5 * z * z - LN_SQRT_2PI
}

/// `ln F(z)` without underflow for very negative `z`.
pub fn ln_cdf(z: f64) -> f64 {
    if z.is_nan() {
        f64::NAN
    } else if z > 6.0 {
        (-0.5 * libm::erfc(z * FRAC_1_SQRT_2)).ln_1p()
    } else if z > -20.0 {
        (libm::erfc(-z * FRAC_1_SQRT_2)).ln() - LN_2
    } else if z == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        // F(z) = F'(z)/|z| · (1 − 1/z² + 3/z⁴ − 15/z⁶ + …)
        let inv_z2 = 1.0 / (z * z);
        let mut term = 1.0;
        let mut series = 1.0;
        for k in 1..=20 {
            term *= -((2 * k - 1) as f64) * inv_z2;
            series += term;
            if term.abs() < 1e-17 {
                break;
            }
        }
        ln_pdf(z) - (-z).ln() + series.ln()
    }
}

/// `F⁻¹(p)` for `0 < p < 1` (Wichura's AS241, about 16 digits).
pub fn inverse_cdf(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = (((((((2.50908_09287_30122_6727e+3 * r + 3.34305_75583_58812_8105e+4) * r
            + 6.72657_70927_00870_0853e+4)
            * r
            + 4.59219_53931_54987_1457e+4)
            * r
            + 1.37316_93765_50946_1125e+4)
            * r
            + 1.97159_09503_06551_4427e+3)
            * r
            + 1.33141_66789_17843_7745e+2)
            * r
            + 3.38713_28727_96366_6080e+0)
            * q;
        let den = ((((((5.22649_52788_52854_5610e+3 * r + 2.87290_85735_72194_2674e+4) * r
            + 3.93078_95800_09271_0610e+4)
            * r
            + 2.12137_94301_58659_5867e+4)
            * r
            + 5.39419_60214_24751_1077e+3)
            * r
            + 6.87187_00749_20579_0830e+2)
            * r
            + 4.23133_30701_60091_1252e+1)
            * r
            + 1.0;
        return Ok(num / den);
    }
    let tail = if q <= 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let x = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((7.74545_01427_83414_07640e-4 * r + 2.27238_44989_26918_45833e-2) * r
            + 2.41780_72517_74506_11770e-1)
            * r
            + 1.27045_82524_52368_38258e+0)
            * r
            + 3.64784_83247_63204_60504e+0)
            * r
            + 5.76949_72214_60691_40550e+0)
            * r
            + 4.63033_78461_56545_29590e+0)
            * r
            + 1.42343_71107_49683_57734e+0;
        let den = ((((((1.05075_00716_44416_84324e-9 * r + 5.47593_80849_95344_94600e-4) * r
            + 1.51986_66563_61645_71966e-2)
            * r
            + 1.48103_97642_74800_74590e-1)
            * r
            + 6.89767_33498_51000_04550e-1)
            * r
            + 1.67638_48301_83803_84940e+0)
            * r
            + 2.05319_16266_37758_82187e+0)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((2.01033_43992_92288_13265e-7 * r + 2.71155_55687_43487_57815e-5) * r
            + 1.24266_09473_88078_43860e-3)
            * r
            + 2.65321_89526_57612_30930e-2)
            * r
            + 2.96560_57182_85048_91230e-1)
            * r
            + 1.78482_65399_17291_33580e+0)
            * r
            + 5.46378_49111_64114_36990e+0)
            * r
            + 6.65790_46435_01103_77720e+0;
        let den = ((((((2.04426_31033_89939_78564e-15 * r + 1.42151_17583_16445_88870e-7) * r
            + 1.84631_83175_10054_68180e-5)
            * r
            + 7.86869_13114_56132_59100e-4)
            * r
            + 1.48753_61290_85061_48525e-2)
            * r
            + 1.36929_88092_27358_05310e-1)
            * r
            + 5.99832_20655_58879_37690e-1)
            * r
            + 1.0;
        num / den
    };
    Ok(if q < 0.0 { -x } else { x })
}

/// `ln(F(x) − F(y))` for `x > y`; `x = +∞` and `y = −∞` allowed.
///
/// The gap is never formed by subtracting two rounded probabilities:
/// narrow gaps integrate the density around the midpoint, straddling gaps
/// add two `erf` values, and same-sign gaps are reflected into the lower
/// tail and combined in log space.
pub fn ln_cdf_gap(x: f64, y: f64) -> Result<f64> {
    if !(x > y) {
        return Err(Error::EmptyGap { x, y });
    }
    if y == f64::NEG_INFINITY {
        return Ok(ln_cdf(x));
    }
    if x == f64::INFINITY {
        return Ok(ln_cdf(-y));
    }
    let width = x - y;
    let mid = 0.5 * x + 0.5 * y;
    if width * (mid.abs() + width) <= 2.0 {
        return Ok(ln_pdf(mid) + centered_density_integral(width, mid).ln());
    }
    if y < 0.0 && x > 0.0 {
        let gap = 0.5 * (libm::erf(x * FRAC_1_SQRT_2) + libm::erf(-y * FRAC_1_SQRT_2));
        return Ok(gap.ln());
    }
    let (hi, lo) = if y >= 0.0 { (-y, -x) } else { (x, y) };
    let ln_hi = ln_cdf(hi);
    let ln_lo = ln_cdf(lo);
    Ok(ln_hi + (-(ln_lo - ln_hi).exp_m1()).ln())
}

/// `∫_{−w/2}^{w/2} exp(−m t − t²/2) dt`, i.e. `(F(m + w/2) − F(m − w/2)) / F′(m)`.
/// Only used where the exponent stays small, so a fixed rule is exact to rounding.
fn centered_density_integral(width: f64, mid: f64) -> f64 {
    let (nodes, weights) = gauss_legendre_20();
    let half = 0.5 * width;
    let sum: f64 = nodes
        .iter()
        .zip(weights)
        .map(|(&x, &w)| {
            let t = half * x;
            w * (-mid * t - 0.5 * t * t).exp()
        })
        .sum();
    half * sum
}

fn gauss_legendre_20() -> (&'static [f64], &'static [f64]) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    let rule = RULE.get_or_init(|| gauss_legendre(20));
    (&rule.0, &rule.1)
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn_1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn_1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn cdf_values() {
        assert_eq!(cdf(f64::NEG_INFINITY), 0.0);
        assert_eq!(cdf(f64::INFINITY), 1.0);
        assert_eq!(cdf(0.0), 0.5);
        // 50-digit quadrature of the defining integral
        assert!((cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
    }

    #[test]
    fn pdf_values() {
        assert_eq!(pdf(0.0), FRAC_1_SQRT_2PI);
        assert_eq!(pdf(2.0), pdf(-2.0));
        assert!(rel(pdf(10.0), 7.694_598_626_706_419e-23) < 1e-13);
        assert_eq!(pdf(f64::INFINITY), 0.0);
    }

    #[test]
    fn inverse_values() {
        assert_eq!(inverse_cdf(0.5).unwrap(), 0.0);
        assert!((inverse_cdf(cdf(1.3)).unwrap() - 1.3).abs() < 1e-12);
        // root of F(z) = e^{-2} at 50 digits
        let z = inverse_cdf((-2.0_f64).exp()).unwrap();
        assert!((z - -1.101_519_628_498_750_3).abs() < 1e-13);
        // root of ln F(z) = −300 ln 10
        assert!(rel(inverse_cdf(1e-300).unwrap(), -37.047_096_299_361_2) < 1e-12);
        assert!(matches!(
            inverse_cdf(0.0),
            Err(Error::ProbabilityOutOfRange(_))
        ));
        assert!(matches!(
            inverse_cdf(1.0),
            Err(Error::ProbabilityOutOfRange(_))
        ));
        assert!(inverse_cdf(f64::NAN).is_err());
    }

    #[test]
    fn ln_cdf_tail() {
        // ln F(−50) from mpmath
        assert!(rel(ln_cdf(-50.0), -1254.831_361_139_42) < 1e-13);
        assert!(rel(ln_cdf(-19.9), cdf(-19.9).ln()) < 1e-13);
        assert!(rel(ln_cdf(-20.1), cdf(-20.1).ln()) < 1e-13);
        assert_eq!(ln_cdf(f64::INFINITY), 0.0);
        assert_eq!(ln_cdf(f64::NEG_INFINITY), f64::NEG_INFINITY);
    }

    #[test]
    fn gap_values() {
        let inf = f64::INFINITY;
        assert_eq!(ln_cdf_gap(inf, -inf).unwrap(), 0.0);
        assert!((ln_cdf_gap(0.0, -inf).unwrap() - 0.5_f64.ln()).abs() < 1e-15);
        // extended-precision quadrature of ∫ F′ over the gap
        let cases = [
            (10.0, 9.0, -43.628_216_632_280_82),
            (-9.0, -10.0, -43.628_216_632_280_82),
            (40.0, 39.0, -765.083_156_564_377_5),
            (-30.0, -30.001, -457.841_656_477_885_98),
            (1e-9, -1e-9, -20.949_057_189_591_14),
            (2.5, -0.3, -0.491_510_440_638_385_6),
            (8.5, 8.2, -36.739_581_549_422_99),
        ];
        for (x, y, expected) in cases {
            let got = ln_cdf_gap(x, y).unwrap();
            assert!(
                rel(got, expected) < 1e-12,
                "({x}, {y}): {got} vs {expected}"
            );
        }
        assert!(matches!(ln_cdf_gap(1.0, 1.0), Err(Error::EmptyGap { .. })));
        assert!(ln_cdf_gap(0.0, 1.0).is_err());
        assert!(ln_cdf_gap(1.0 + 1e-15, 1.0).unwrap() < -30.0);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(20);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(38)).sum();
        assert!(rel(s, 2.0 / 39.0) < 1e-13);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn gap_reflection(x in -40.0..40.0_f64, w in 1e-6..30.0_f64) {
            let y = x - w;
            let a = ln_cdf_gap(x, y).unwrap();
            let b = ln_cdf_gap(-y, -x).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }

        #[test]
        fn gap_is_monotone(y in -12.0..12.0_f64, w1 in 1e-3..5.0_f64, w2 in 1e-3..5.0_f64) {
            let x1 = y + w1;
            let x2 = x1 + w2;
            prop_assert!(ln_cdf_gap(x2, y).unwrap() >= ln_cdf_gap(x1, y).unwrap());
            let y2 = y - w2;
            prop_assert!(ln_cdf_gap(x1, y2).unwrap() >= ln_cdf_gap(x1, y).unwrap());
        }

        #[test]
        fn gap_lipschitz(y in -8.0..8.0_f64, w in 1e-8..4.0_f64) {
            let x = y + w;
            let gap = ln_cdf_gap(x, y).unwrap().exp();
            prop_assert!(gap <= w * FRAC_1_SQRT_2PI * (1.0 + 1e-12));
            prop_assert!(gap <= w);
        }

        #[test]
        fn inverse_round_trip(p in 1e-300..1.0_f64) {
            prop_assume!(p < 1.0);
            let z = inverse_cdf(p).unwrap();
            prop_assert!(rel(cdf(z), p) <= 1e-12);
        }

        #[test]
        fn inverse_is_odd(p in 1e-10..0.5_f64) {
            let lo = inverse_cdf(p).unwrap();
            let hi = inverse_cdf(1.0 - p).unwrap();
            // 1 − p is rounded, so compare through F
            prop_assert!(rel(cdf(-hi), 1.0 - (1.0 - p)) <= 1e-12);
            prop_assert!((lo + hi).abs() <= 1e-6 * lo.abs().max(1.0));
        }

        #[test]
        fn cdf_symmetry(z in -30.0..30.0_f64) {
            prop_assert!((cdf(-z) - (1.0 - cdf(z))).abs() < 1e-15);
        }
    }
}
