//! Exponential integrals, log-gamma and Euler's constant.

use super::summation::CompensatedSum;
use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Below this argument `E₁` is evaluated from its power series.
pub const E1_SERIES_CROSSOVER: f64 = 1.5;

/// `E₁(x) = ∫_x^∞ e^{-t}/t dt` for `x > 0`.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) || x.is_nan() {
        return Err(Error::Domain(format!("E1 requires x > 0, got {x}")));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x <= E1_SERIES_CROSSOVER {
        let (ein, _) = ein_series(x, 200, 0.0);
        Ok(ein - x.ln() - EULER_GAMMA)
    } else {
        Ok(e1_continued_fraction(x))
    }
}

// Modified Lentz evaluation of the continued fraction
// E₁(x) = e^{-x} / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...)))
fn e1_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() <= f64::EPSILON {
            break;
        }
    }
    h * (-x).exp()
}

/// Partial sum of `Ein(x) = Σ_{k≥1} (-1)^{k+1} x^k / (k·k!)`.
///
/// Terms come from the recurrence `x^k/k! = (x^{k-1}/(k-1)!)·x/k`, carried
/// in double-double precision so that the large intermediate terms for
/// `x ≳ 10` do not pollute the result. Summation stops before the first term
/// with `|term| < term_tol`, or after `k_max` terms. Returns the sum and the
/// number of terms included.
pub fn ein_series(x: f64, k_max: usize, term_tol: f64) -> (f64, usize) {
    let mut power = DoubleDouble::ONE; // x^k / k!
    let mut acc = CompensatedSum::new();
    let mut k_used = 0;
    for k in 1..=k_max {
        let kf = k as f64;
        power = power.mul_f64(x).div_f64(kf);
        let term = power.div_f64(kf);
        let term = if k % 2 == 1 { term } else { term.neg() };
        let magnitude = term.hi.abs();
        if magnitude < term_tol || magnitude == 0.0 {
            break;
        }
        acc.add(term.hi);
        acc.add(term.lo);
        k_used = k;
        if term_tol == 0.0 && magnitude < f64::EPSILON * 1e-4 * acc.value().abs() {
            break;
        }
    }
    (acc.value(), k_used)
}

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7, n = 9).
/// Returns NaN for non-positive or NaN input.
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if !(x > 0.0) {
        return f64::NAN;
    }
    if x < 0.5 {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut a = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    let t = z + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + a.ln()
}

/// `Γ(x)` for `x > 0`.
pub fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    const ONE: Self = Self { hi: 1.0, lo: 0.0 };

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        Self { hi: s, lo: err }
    }

    fn quick_two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        Self {
            hi: s,
            lo: b - (s - a),
        }
    }

    fn two_prod(a: f64, b: f64) -> Self {
        let p = a * b;
        Self {
            hi: p,
            lo: a.mul_add(b, -p),
        }
    }

    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn mul_f64(self, b: f64) -> Self {
        let p = Self::two_prod(self.hi, b);
        Self::quick_two_sum(p.hi, p.lo + self.lo * b)
    }

    fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let p = Self::two_prod(q1, b);
        let r = Self::two_sum(self.hi, -p.hi);
        let rem = r.hi + (r.lo - p.lo + self.lo);
        let q2 = rem / b;
        Self::quick_two_sum(q1, q2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quadrature::{
        integrate_finite, integrate_semi_infinite, QuadratureConfig,
    };

    // Independent E1 oracle: direct quadrature of the defining integral.
    fn e1_by_quadrature(x: f64) -> f64 {
        let cfg = QuadratureConfig {
            abs_tol: 1e-300,
            rel_tol: 1e-13,
            ..QuadratureConfig::default()
        };
        integrate_semi_infinite(|t: f64| (-t).exp() / t, x, 1.0, &cfg)
            .unwrap()
            .value
    }

    #[test]
    fn e1_at_one() {
        let v = exp_integral_e1(1.0).unwrap();
        assert!((v - 0.219_383_934_395_520_3).abs() < 1e-15);
        assert!((v - e1_by_quadrature(1.0)).abs() < 1e-12);
    }

    #[test]
    fn e1_domain() {
        assert!(exp_integral_e1(0.0).is_err());
        assert!(exp_integral_e1(-1.0).is_err());
        assert!(exp_integral_e1(f64::NAN).is_err());
        assert_eq!(exp_integral_e1(f64::INFINITY).unwrap(), 0.0);
    }

    #[test]
    fn e1_relative_accuracy_across_crossover() {
        for &x in &[0.01, 0.1, 0.5, 1.0, 1.49, 1.5, 1.51, 2.0, 5.0, 10.0, 30.0] {
            let v = exp_integral_e1(x).unwrap();
            let oracle = e1_by_quadrature(x);
            assert!(
                ((v - oracle) / oracle).abs() < 1e-12,
                "x = {x}: {v} vs {oracle}"
            );
        }
    }

    #[test]
    fn e1_tail_bound() {
        for i in 1..200 {
            let x = 0.05 * i as f64;
            assert!(exp_integral_e1(x).unwrap() <= (-x).exp() / x);
        }
    }

    #[test]
    fn e1_identity_with_ein() {
        for &x in &[0.1, 1.0, 5.0] {
            let e1 = e1_by_quadrature(x);
            let (ein, _) = ein_series(x, 200, 1e-30);
            assert!((e1 + x.ln() + EULER_GAMMA - ein).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn ein_zero_is_empty_sum() {
        assert_eq!(ein_series(0.0, 60, 1e-12), (0.0, 0));
    }

    #[test]
    fn ein_partial_sums_alternate() {
        assert_eq!(ein_series(1.0, 1, 0.0).0, 1.0);
        assert_eq!(ein_series(1.0, 2, 0.0).0, 0.75);
        let limit = ein_series(1.0, 60, 1e-17).0;
        assert!((limit - 0.796_599_599_297_053_1).abs() < 1e-15);
        for k in 1..12 {
            let above = ein_series(1.0, k, 0.0).0 - limit;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            assert!(above * sign > 0.0, "k = {k}");
        }
    }

    #[test]
    fn ein_large_argument_keeps_digits() {
        // E1(20) ≈ 9.8e-11, so the identity checks Ein(20) to ~1e-12 absolute
        let (ein, k) = ein_series(20.0, 200, 1e-20);
        assert!(k > 60);
        let e1 = exp_integral_e1(20.0).unwrap();
        assert!((ein - 20f64.ln() - EULER_GAMMA - e1).abs() < 1e-12);
    }

    #[test]
    fn ln_gamma_known_values() {
        assert!(ln_gamma(1.0).abs() < 1e-14);
        assert!(ln_gamma(2.0).abs() < 1e-14);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
        assert!((ln_gamma(10.0) - 362_880f64.ln()).abs() < 1e-12);
        assert!((gamma(1e-5) * 1e-5 - gamma(1.0 + 1e-5)).abs() < 1e-12);
        assert!(ln_gamma(0.0).is_nan());
    }

    #[test]
    fn ln_gamma_matches_factorial_integral() {
        // Γ(x) = ∫_0^∞ t^{x-1} e^{-t} dt for x ≥ 1
        let cfg = QuadratureConfig::with_tolerance(1e-13);
        for &x in &[1.5, 2.5, 3.7] {
            let v = integrate_finite(|t: f64| t.powf(x - 1.0) * (-t).exp(), 0.0, 60.0, &cfg)
                .unwrap()
                .value;
            assert!((ln_gamma(x) - v.ln()).abs() < 1e-12, "x = {x}");
        }
    }
}
