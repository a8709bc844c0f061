//! Gamma-family functions: real and complex log-gamma, `sin(πx)`, binomials.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::real::Real;

// Lanczos approximation, g = 607/128, 15 terms.
const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS: [f64; 15] = [
    0.999_999_999_999_997_091_82,
    57.156_235_665_862_923_517,
    -59.597_960_355_475_491_248,
    14.136_097_974_741_747_174,
    -0.491_913_816_097_620_199_78,
    0.339_946_499_848_118_886_99e-4,
    0.465_236_289_270_485_756_65e-4,
    -0.983_744_753_048_795_646_77e-4,
    0.158_088_703_224_912_488_84e-3,
    -0.210_264_441_724_104_883_19e-3,
    0.217_439_618_115_212_643_20e-3,
    -0.164_318_106_536_763_890_22e-3,
    0.844_182_239_838_527_432_93e-4,
    -0.261_908_384_015_814_086_70e-4,
    0.368_991_826_595_316_227_04e-5,
];

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_741_780_329_736_406;

/// `sin(πx)` with exact argument reduction, accurate near the integers.
pub fn sin_pi<T: Real>(x: T) -> T {
    let two = T::lit(2.0);
    let mut r = x - two * (x / two).round();
    // r in [-1, 1]
    let mut sign = T::one();
    if r < T::zero() {
        r = -r;
        sign = -sign;
    }
    if r > T::lit(0.5) {
        r = T::one() - r;
    }
    sign * (T::PI() * r).sin()
}

/// `cos(πx)` with exact argument reduction.
pub fn cos_pi<T: Real>(x: T) -> T {
    let two = T::lit(2.0);
    let r = (x - two * (x / two).round()).abs();
    sin_pi(T::lit(0.5) - r)
}

fn lanczos_ln_gamma_real<T: Real>(x: T) -> T {
    // valid for x >= 0.5
    let z = x - T::one();
    let mut acc = T::lit(LANCZOS[0]);
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + T::lit(*c) / (z + T::from_count(k));
    }
    let t = z + T::lit(LANCZOS_G + 0.5);
    T::lit(HALF_LN_2PI) + (z + T::lit(0.5)) * t.ln() - t + acc.ln()
}

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::domain("log_gamma", format!("argument must be positive and finite, got {x}")));
    }
    Ok(ln_gamma_abs(x))
}

/// `ln |Γ(x)|` for any real `x` that is not a non-positive integer.
pub(crate) fn ln_gamma_abs<T: Real>(x: T) -> T {
    if x == T::one() || x == T::lit(2.0) {
        return T::zero();
    }
    if x >= T::lit(0.5) {
        lanczos_ln_gamma_real(x)
    } else {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        T::PI().ln() - sin_pi(x).abs().ln() - lanczos_ln_gamma_real(T::one() - x)
    }
}

/// `ln k!` for small non-negative integers.
pub(crate) fn ln_factorial<T: Real>(k: usize) -> T {
    ln_gamma_abs(T::from_count(k) + T::one())
}

/// True when `x` is within a relative `1e-12` of a non-positive integer.
pub(crate) fn is_nonpositive_integer<T: Real>(x: T) -> bool {
    let r = x.round();
    r <= T::zero() && (x - r).abs() <= T::lit(1e-12).max(T::epsilon() * T::lit(8.0)) * r.abs().max(T::one())
}

fn ln_sin_pi_complex<T: Real>(w: Complex<T>) -> Complex<T> {
    // Only the value of exp(.) matters to callers, so any branch of the log is fine.
    let two = T::lit(2.0);
    let x = w.re - two * (w.re / two).round();
    let y = w.im;
    let pi = T::PI();
    if y.abs() < T::lit(8.0) {
        let s = Complex::new(sin_pi(x) * (pi * y).cosh(), cos_pi(x) * (pi * y).sinh());
        return s.ln();
    }
    let wr = Complex::new(x, y);
    let i = Complex::new(T::zero(), T::one());
    let ln_2i = Complex::new(two.ln(), pi * T::lit(0.5));
    if y > T::zero() {
        // sin(πw) = e^{-iπw} (e^{2iπw} - 1) / (2i)
        let e = (i * wr * (pi * two)).exp();
        -(i * wr * pi) + (e - T::one()).ln() - ln_2i
    } else {
        // sin(πw) = e^{iπw} (1 - e^{-2iπw}) / (2i)
        let e = (-(i * wr) * (pi * two)).exp();
        (i * wr * pi) + (Complex::new(T::one(), T::zero()) - e).ln() - ln_2i
    }
}

fn lanczos_ln_gamma_complex<T: Real>(w: Complex<T>) -> Complex<T> {
    let z = w - T::one();
    let mut acc = Complex::new(T::lit(LANCZOS[0]), T::zero());
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + (z + T::from_count(k)).inv() * T::lit(*c);
    }
    let t = z + T::lit(LANCZOS_G + 0.5);
    (z + T::lit(0.5)) * t.ln() - t + acc.ln() + T::lit(HALF_LN_2PI)
}

/// A branch of `ln Γ(w)` for complex `w` away from the poles.
///
/// The imaginary part is only defined modulo `2π`; `exp` of the result is Γ(w).
pub fn ln_gamma_complex<T: Real>(w: Complex<T>) -> Complex<T> {
    if w.im == T::zero() && w.re > T::zero() {
        return Complex::new(ln_gamma_abs(w.re), T::zero());
    }
    if w.re >= T::lit(0.5) {
        lanczos_ln_gamma_complex(w)
    } else {
        let one = Complex::new(T::one(), T::zero());
        Complex::new(T::PI().ln(), T::zero()) - ln_sin_pi_complex(w) - lanczos_ln_gamma_complex(one - w)
    }
}

/// `-ln Γ(w)`, returning `-∞` at the poles so that `exp` yields the zero of `1/Γ`.
pub(crate) fn ln_rgamma_complex<T: Real>(w: Complex<T>) -> Complex<T> {
    if w.im == T::zero() && is_nonpositive_integer(w.re) {
        return Complex::new(T::neg_infinity(), T::zero());
    }
    -ln_gamma_complex(w)
}

/// Exact binomial coefficient `C(n, k)`.
pub fn binomial(n: u32, k: u32) -> Result<u64> {
    if k > n {
        return Err(Error::domain("binomial", format!("k = {k} exceeds n = {n}")));
    }
    let k = k.min(n - k) as u128;
    let n = n as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc.checked_mul(n - i).ok_or_else(|| overflow(n, k))? / (i + 1);
    }
    u64::try_from(acc).map_err(|_| overflow(n, k))
}

fn overflow(n: u128, k: u128) -> Error {
    Error::Overflow { op: "binomial", detail: format!("C({n}, {k}) does not fit in 64 bits") }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn log_gamma_reference_values() {
        assert_eq!(log_gamma(1.0f64).unwrap(), 0.0);
        // reference values from a 30-digit evaluation
        assert!(rel(log_gamma(0.5f64).unwrap(), 0.572_364_942_924_700_087_071_713_675_677) < 1e-13);
        assert!(rel(log_gamma(4.2f64).unwrap(), 2.048_555_636_960_589_809_021_368_583_2) < 1e-13);
        assert!(rel(log_gamma(0.1f64).unwrap(), 2.252_712_651_734_205_959_869_701_646_37) < 1e-13);
        assert!(rel(log_gamma(3.7f64).unwrap(), 1.428_072_326_665_387_921_872_381_125_05) < 1e-13);
        assert!(rel(log_gamma(12.5f64).unwrap(), 18.734_347_511_936_445_701_634_124_457_2) < 1e-13);
        assert!(rel(log_gamma(150.25f64).unwrap(), 601.261_504_032_499_725_980_535_274_308) < 1e-13);
        assert!(rel(log_gamma(1e-5f64).unwrap(), 11.512_919_692_895_825_707_420_833_930_9) < 1e-13);
    }

    #[test]
    fn log_gamma_rejects_nonpositive() {
        assert!(matches!(log_gamma(0.0f64), Err(Error::Domain { .. })));
        assert!(matches!(log_gamma(-2.5f64), Err(Error::Domain { .. })));
    }

    #[test]
    fn complex_matches_real_and_recurrence() {
        for &x in &[0.3f64, 1.7, 5.5, 40.0] {
            let c = ln_gamma_complex(Complex::new(x, 1e-300)).exp();
            assert!(rel(c.re, ln_gamma_abs(x).exp()) < 1e-13);
        }
        // Γ(w+1) = w Γ(w) off the real axis, including the reflection region
        for &(x, y) in &[(0.25f64, 3.0), (-3.4, 0.7), (2.0, 25.0), (-0.5, -12.0), (60.0, 4.0)] {
            let w = Complex::new(x, y);
            let lhs = ln_gamma_complex(w + 1.0).exp();
            let rhs = ln_gamma_complex(w).exp() * w;
            assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm(), "{w}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn complex_gamma_half_plus_iy_modulus() {
        // |Γ(1/2 + iy)|^2 = π / cosh(πy)
        for &y in &[0.5f64, 3.0, 10.0, 30.0] {
            let g = ln_gamma_complex(Complex::new(0.5, y)).exp().norm_sqr();
            let exact = std::f64::consts::PI / (std::f64::consts::PI * y).cosh();
            assert!(rel(g, exact) < 1e-12, "y={y}");
        }
    }

    #[test]
    fn reciprocal_gamma_vanishes_at_poles() {
        assert_eq!(ln_rgamma_complex(Complex::new(-3.0f64, 0.0)).exp(), Complex::new(0.0, 0.0));
        assert_eq!(ln_rgamma_complex(Complex::new(0.0f64, 0.0)).re, f64::NEG_INFINITY);
    }

    #[test]
    fn sin_pi_near_integers() {
        let x = 3.0f64 + 1e-9;
        assert!(rel(sin_pi(x), -std::f64::consts::PI * 1e-9) < 1e-6);
        assert_eq!(sin_pi(4.0f64), 0.0);
        assert!((cos_pi(2.0f64) - 1.0).abs() < 1e-16);
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(4, 2).unwrap(), 6);
        assert_eq!(binomial(10, 5).unwrap(), 252);
        for n in 0..20 {
            assert_eq!(binomial(n, 0).unwrap(), 1);
        }
        assert_eq!(binomial(64, 32).unwrap(), 1_832_624_140_942_590_534);
        assert!(matches!(binomial(3, 4), Err(Error::Domain { .. })));
        assert!(matches!(binomial(70, 35), Err(Error::Overflow { .. })));
    }
}
