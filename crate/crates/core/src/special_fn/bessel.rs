//! Modified Bessel function of the second kind, `K_ν(x)`.
//!
//! Temme's series for `x < 2`, Steed's continued fraction otherwise, then
//! forward recurrence in the order. Used as an independent check on the
//! `G^{2,0}_{0,2}` reductions.

use crate::error::{Error, Result};
use crate::real::Real;

// Taylor coefficients of 1/Γ(z) = Σ c_k z^k, k = 1..26.
const RGAMMA: [f64; 26] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_8,
    -0.042_002_635_034_095_2,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_3,
    -0.009_621_971_527_877_0,
    0.007_218_943_246_663_0,
    -0.001_165_167_591_859_1,
    -0.000_215_241_674_114_9,
    0.000_128_050_282_388_2,
    -0.000_020_134_854_780_7,
    -0.000_001_250_493_482_1,
    0.000_001_133_027_232_0,
    -0.000_000_205_633_841_7,
    0.000_000_006_116_095_0,
    0.000_000_005_002_007_5,
    -0.000_000_001_181_274_6,
    0.000_000_000_104_342_7,
    0.000_000_000_007_782_3,
    -0.000_000_000_003_696_8,
    0.000_000_000_000_510_0,
    -0.000_000_000_000_020_6,
    -0.000_000_000_000_005_4,
    0.000_000_000_000_001_4,
    0.000_000_000_000_000_1,
];

/// Returns (gam1, gam2, 1/Γ(1+μ), 1/Γ(1−μ)) for |μ| ≤ 1/2.
fn temme_gammas<T: Real>(mu: T) -> (T, T, T, T) {
    let mut gam1 = T::zero();
    let mut gam2 = T::zero();
    // Horner from the top; k is the 1-based coefficient index.
    for k in (1..=RGAMMA.len()).rev() {
        let c = T::lit(RGAMMA[k - 1]);
        if k % 2 == 0 {
            gam1 = gam1 * mu * mu + c;
        } else {
            gam2 = gam2 * mu * mu + c;
        }
    }
    gam1 = -gam1;
    let gampl = gam2 - mu * gam1;
    let gammi = gam2 + mu * gam1;
    (gam1, gam2, gampl, gammi)
}

/// `K_ν(x)` for real order and `x > 0`.
pub fn bessel_k<T: Real>(nu: T, x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::domain("bessel_k", format!("argument must be positive, got {x}")));
    }
    if !nu.is_finite() {
        return Err(Error::domain("bessel_k", format!("order must be finite, got {nu}")));
    }
    let nu = nu.abs();
    let half = T::lit(0.5);
    let nl = (nu + half).floor();
    let mu = nu - nl;
    let mu2 = mu * mu;
    let xi = x.recip();
    let xi2 = xi + xi;
    let eps = T::epsilon();
    let max_iter = 10_000;

    let (mut kmu, mut k1) = if x < T::lit(2.0) {
        let x2 = half * x;
        let pimu = T::PI() * mu;
        let fact = if pimu.abs() < eps { T::one() } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = mu * d;
        let fact2 = if e.abs() < eps { T::one() } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let e = e.exp();
        let mut p = half * e / gampl;
        let mut q = half / (e * gammi);
        let mut c = T::one();
        let d = x2 * x2;
        let mut sum1 = p;
        let mut i = 1;
        loop {
            let fi = T::from_count(i);
            ff = (fi * ff + p + q) / (fi * fi - mu2);
            c = c * d / fi;
            p = p / (fi - mu);
            q = q / (fi + mu);
            let del = c * ff;
            sum = sum + del;
            sum1 = sum1 + c * (p - fi * ff);
            if del.abs() < sum.abs() * eps {
                break;
            }
            i += 1;
            if i > max_iter {
                return Err(Error::non_convergence("bessel_k", "series failed to converge"));
            }
        }
        (sum, sum1 * xi2)
    } else {
        let two = T::lit(2.0);
        let mut b = two * (T::one() + x);
        let mut d = b.recip();
        let mut delh = d;
        let mut h = d;
        let mut q1 = T::zero();
        let mut q2 = T::one();
        let a1 = T::lit(0.25) - mu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = T::one() + q * delh;
        let mut i = 2;
        loop {
            let fi = T::from_count(i);
            a = a - two * (fi - T::one());
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q = q + c * qnew;
            b = b + two;
            d = (b + a * d).recip();
            delh = (b * d - T::one()) * delh;
            h = h + delh;
            let dels = q * delh;
            s = s + dels;
            if (dels / s).abs() < eps {
                break;
            }
            i += 1;
            if i > max_iter {
                return Err(Error::non_convergence("bessel_k", "continued fraction failed to converge"));
            }
        }
        h = a1 * h;
        let kmu = (T::PI() / (two * x)).sqrt() * (-x).exp() / s;
        let k1 = kmu * (mu + x + half - h) * xi;
        (kmu, k1)
    };
    let steps = nl.to_usize().unwrap_or(0);
    for i in 1..=steps {
        let next = (mu + T::from_count(i)) * xi2 * k1 + kmu;
        kmu = k1;
        k1 = next;
    }
    Ok(kmu)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn half_integer_closed_form() {
        let exact = (std::f64::consts::PI / 2.0).sqrt() * (-1.0f64).exp();
        assert!(rel(bessel_k(0.5, 1.0).unwrap(), exact) < 1e-13);
        for &x in &[0.1f64, 1.9, 2.1, 7.0] {
            let k = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp();
            assert!(rel(bessel_k(0.5, x).unwrap(), k) < 1e-13, "x={x}");
            assert!(rel(bessel_k(1.5, x).unwrap(), k * (1.0 + 1.0 / x)) < 1e-13, "x={x}");
        }
    }

    #[test]
    fn reference_values() {
        // 30-digit reference evaluations
        let cases: [(f64, f64, f64); 10] = [
            (1.0, 2.0, 0.139_865_881_816_522_427_28),
            (0.0, 1.0, 0.421_024_438_240_708_333_34),
            (0.0, 0.1, 2.427_069_024_702_016_612_5),
            (1.0, 0.1, 9.853_844_780_870_606_134_8),
            (2.5, 3.0, 0.084_060_631_974_117_382_653),
            (0.3, 10.0, 1.785_660_701_682_302_245_24e-5),
            (7.0, 1.0, 44_207.020_331_914_878_914),
            (1.0, 50.0, 3.444_102_226_717_555_612_6e-23),
            (0.75, 0.01, 32.543_452_785_357_033_261),
            (-1.5, 2.0, 0.179_906_657_952_092_171_05),
        ];
        for (nu, x, want) in cases {
            let got = bessel_k(nu, x).unwrap();
            assert!(rel(got, want) < 1e-12, "K_{nu}({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn rejects_nonpositive_argument() {
        assert!(matches!(bessel_k(1.0f64, 0.0), Err(Error::Domain { .. })));
        assert!(matches!(bessel_k(1.0f64, -2.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn single_precision_agrees() {
        let k = bessel_k(1.0f32, 2.0).unwrap();
        assert!((k - 0.139_865_88).abs() < 1e-6);
    }
}
