//! Fading laws of both hops: Gamma-Gamma turbulence with pointing error on the
//! FSO link, Rayleigh (exponential SNR) on the RF links, and the best-of-N user
//! selection at the relay.

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;
use crate::special_fn::{binomial, log_gamma, MeijerGSpec};
use crate::sum::TwoFold;

/// Gamma-Gamma turbulence with pointing error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurbulenceParams<T> {
    pub alpha: T,
    pub beta: T,
    /// Beam-width to jitter ratio ξ; the fading law depends on ξ².
    pub xi: T,
    /// Scale of the CDF argument. With 1 the CDF matches the unit-mean sampler.
    pub kappa: T,
    pub rytov_variance: Option<T>,
}

impl<T: Real> TurbulenceParams<T> {
    pub fn new(alpha: T, beta: T, xi: T) -> Result<Self> {
        let p = TurbulenceParams { alpha, beta, xi, kappa: T::one(), rytov_variance: None };
        p.validate()?;
        Ok(p)
    }

    /// Shapes derived from the Rytov variance.
    pub fn from_rytov(rytov_variance: T, xi: T) -> Result<Self> {
        let (alpha, beta) = gg_params_from_rytov(rytov_variance)?;
        let p = TurbulenceParams { alpha, beta, xi, kappa: T::one(), rytov_variance: Some(rytov_variance) };
        p.validate()?;
        Ok(p)
    }

    pub fn with_kappa(mut self, kappa: T) -> Result<Self> {
        self.kappa = kappa;
        self.validate()?;
        Ok(self)
    }

    /// α = 4, β = 1.9, ξ = 10.45.
    pub fn moderate() -> Self {
        Self::new(T::lit(4.0), T::lit(1.9), T::lit(10.45)).expect("valid preset")
    }

    /// α = 4.2, β = 1.4, ξ = 2.45.
    pub fn strong() -> Self {
        Self::new(T::lit(4.2), T::lit(1.4), T::lit(2.45)).expect("valid preset")
    }

    pub fn xi2(&self) -> T {
        self.xi * self.xi
    }

    pub fn validate(&self) -> Result<()> {
        let op = "turbulence_params";
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("xi", self.xi), ("kappa", self.kappa)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::domain(op, format!("{name} must be positive and finite, got {v}")));
            }
        }
        if let Some(s2) = self.rytov_variance {
            let (a, b) = gg_params_from_rytov(s2)?;
            let close = |x: T, y: T| (x - y).abs() <= T::lit(1e-12).max(T::epsilon() * T::lit(16.0)) * y.abs();
            if !close(self.alpha, a) || !close(self.beta, b) {
                return Err(Error::domain(op, format!("alpha/beta inconsistent with rytov_variance {s2}")));
            }
        }
        Ok(())
    }

    /// `ln(ξ²/(Γ(α)Γ(β)))`, the log of the FSO CDF prefactor.
    pub fn ln_cdf_prefactor(&self) -> Result<T> {
        Ok(self.xi2().ln() - log_gamma(self.alpha)? - log_gamma(self.beta)?)
    }

    /// The `G^{3,1}_{2,4}` block of the FSO SNR CDF.
    pub fn cdf_spec(&self) -> Result<MeijerGSpec<T>> {
        let x2 = self.xi2();
        MeijerGSpec::new(3, 1, vec![T::one(), x2 + T::one()], vec![x2, self.alpha, self.beta, T::zero()])
    }
}

/// Average SNR of a Rayleigh-faded RF link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfParams<T> {
    pub mean_snr: T,
}

impl<T: Real> RfParams<T> {
    pub fn new(mean_snr: T) -> Result<Self> {
        if !(mean_snr > T::zero()) || !mean_snr.is_finite() {
            return Err(Error::domain("rf_params", format!("mean_snr must be positive and finite, got {mean_snr}")));
        }
        Ok(RfParams { mean_snr })
    }
}

/// Gamma-Gamma shapes (α, β) from the Rytov variance σ_R².
pub fn gg_params_from_rytov<T: Real>(rytov_variance: T) -> Result<(T, T)> {
    let op = "gg_params_from_rytov";
    let s2 = rytov_variance;
    if !(s2 >= T::zero()) || !s2.is_finite() {
        return Err(Error::domain(op, format!("Rytov variance must be non-negative and finite, got {s2}")));
    }
    if s2 == T::zero() {
        return Err(Error::Divergence { op, detail: "zero Rytov variance gives infinite alpha and beta".into() });
    }
    let s125 = s2.powf(T::lit(1.2));
    let ea = T::lit(0.49) * s2 / (T::one() + T::lit(1.11) * s125).powf(T::lit(7.0 / 6.0));
    let eb = T::lit(0.51) * s2 / (T::one() + T::lit(0.69) * s125).powf(T::lit(5.0 / 6.0));
    let alpha = ea.exp_m1().recip();
    let beta = eb.exp_m1().recip();
    if !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::Divergence { op, detail: format!("shapes overflow at Rytov variance {s2}") });
    }
    Ok((alpha, beta))
}

fn check_snr<T: Real>(op: &'static str, gamma: T) -> Result<()> {
    if !(gamma >= T::zero()) {
        return Err(Error::domain(op, format!("SNR must be non-negative, got {gamma}")));
    }
    Ok(())
}

fn check_users(op: &'static str, n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::domain(op, "number of users must be at least 1"));
    }
    Ok(())
}

/// `1 − e^{−γ/γ̄}`.
pub fn rayleigh_snr_cdf<T: Real>(gamma: T, params: &RfParams<T>) -> Result<T> {
    check_snr("rayleigh_snr_cdf", gamma)?;
    Ok(-(-gamma / params.mean_snr).exp_m1())
}

/// `e^{−γ/γ̄}/γ̄`.
pub fn rayleigh_snr_pdf<T: Real>(gamma: T, params: &RfParams<T>) -> Result<T> {
    check_snr("rayleigh_snr_pdf", gamma)?;
    Ok((-gamma / params.mean_snr).exp() / params.mean_snr)
}

/// CDF of the largest of `n_users` i.i.d. exponential SNRs.
pub fn max_user_cdf<T: Real>(gamma: T, params: &RfParams<T>, n_users: u32) -> Result<T> {
    check_users("max_user_cdf", n_users)?;
    Ok(rayleigh_snr_cdf(gamma, params)?.powi(n_users as i32))
}

/// Density of the largest of `n_users` exponential SNRs, in the binomially
/// expanded form `Σ_k C(N−1,k)(−1)^k (N/γ̄) e^{−(k+1)γ/γ̄}`.
pub fn max_user_pdf<T: Real>(gamma: T, params: &RfParams<T>, n_users: u32) -> Result<T> {
    check_users("max_user_pdf", n_users)?;
    check_snr("max_user_pdf", gamma)?;
    let nf = T::from_count(n_users as usize);
    // Double-word accumulation: the terms cancel to O(x^{N−1}) for small x.
    let e = TwoFold::one_plus((-gamma / params.mean_snr).exp_m1());
    let mut acc = TwoFold::zero();
    let mut ek = e;
    for k in 0..n_users {
        let c = T::from_u64(binomial(n_users - 1, k)?).expect("binomial fits scalar");
        let sign = if k % 2 == 0 { T::one() } else { -T::one() };
        acc = acc + ek * (sign * c);
        ek = ek * e;
    }
    Ok(acc.value() * nf / params.mean_snr)
}

/// Same density in product form `N F^{N−1} f`.
pub fn max_user_pdf_product<T: Real>(gamma: T, params: &RfParams<T>, n_users: u32) -> Result<T> {
    check_users("max_user_pdf", n_users)?;
    let f = rayleigh_snr_pdf(gamma, params)?;
    let big_f = rayleigh_snr_cdf(gamma, params)?;
    Ok(T::from_count(n_users as usize) * big_f.powi(n_users as i32 - 1) * f)
}

/// CDF of the FSO-hop SNR `γ = γ̄·I²` under Gamma-Gamma turbulence with pointing error.
pub fn fso_snr_cdf<T: Real>(gamma: T, mean_snr_fso: T, params: &TurbulenceParams<T>) -> Result<T> {
    check_snr("fso_snr_cdf", gamma)?;
    if !(mean_snr_fso > T::zero()) {
        return Err(Error::domain("fso_snr_cdf", format!("mean SNR must be positive, got {mean_snr_fso}")));
    }
    if gamma == T::zero() {
        return Ok(T::zero());
    }
    let z = params.alpha * params.beta * params.kappa * (gamma / mean_snr_fso).sqrt();
    let v = params.cdf_spec()?.eval_scaled(z, params.ln_cdf_prefactor()?)?.value;
    Ok(v.max(T::zero()).min(T::one()))
}

/// Exponential SNR draw with mean `γ̄`.
pub fn sample_rf_snr<R: Rng + ?Sized>(params: &RfParams<f64>, rng: &mut R) -> f64 {
    params.mean_snr * rng.sample::<f64, _>(rand_distr::Exp1)
}

/// One draw of the received FSO irradiance `I = I_a·I_p`.
pub fn sample_fso_intensity<R: Rng + ?Sized>(params: &TurbulenceParams<f64>, rng: &mut R) -> f64 {
    FsoSampler::new(params).sample(rng)
}

/// Pre-built FSO irradiance sampler; avoids rebuilding the gamma laws per draw.
#[derive(Debug, Clone, Copy)]
pub struct FsoSampler {
    large: Gamma<f64>,
    small: Gamma<f64>,
    inv_xi2: f64,
}

impl FsoSampler {
    pub fn new(params: &TurbulenceParams<f64>) -> Self {
        FsoSampler {
            large: Gamma::new(params.alpha, 1.0 / params.alpha).expect("validated shape"),
            small: Gamma::new(params.beta, 1.0 / params.beta).expect("validated shape"),
            inv_xi2: 1.0 / params.xi2(),
        }
    }

    /// Turbulence part, the product of two unit-mean gamma variates.
    pub fn sample_turbulence<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.large.sample(rng) * self.small.sample(rng)
    }

    /// Pointing loss `u^{1/ξ²}` with `u` uniform on (0, 1].
    pub fn sample_pointing<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = 1.0 - rng.gen::<f64>();
        u.powf(self.inv_xi2)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sample_turbulence(rng) * self.sample_pointing(rng)
    }
}

/// Exponential sampler with the rate prepared once.
#[derive(Debug, Clone, Copy)]
pub struct RfSampler(Exp<f64>);

impl RfSampler {
    pub fn new(params: &RfParams<f64>) -> Self {
        RfSampler(Exp::new(1.0 / params.mean_snr).expect("validated mean"))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.0.sample(rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn rytov_reference_values() {
        // 30-digit evaluations of the two closed formulas
        let (a, b) = gg_params_from_rytov(1.0f64).unwrap();
        assert!(rel(a, 4.393_859_025_392_146_787_0) < 1e-12);
        assert!(rel(b, 2.563_631_979_503_694_950_6) < 1e-12);
        let (a, b) = gg_params_from_rytov(0.25f64).unwrap();
        assert!(rel(a, 9.707_573_824_102_951_801_9) < 1e-12);
        assert!(rel(b, 8.198_307_920_187_000_227_0) < 1e-12);
        assert!(a > b);
    }

    #[test]
    fn rytov_edge_cases() {
        assert!(matches!(gg_params_from_rytov(0.0f64), Err(Error::Divergence { .. })));
        assert!(matches!(gg_params_from_rytov(-0.1f64), Err(Error::Domain { .. })));
        let (a, b) = gg_params_from_rytov(1e-8f64).unwrap();
        assert!(a > 1e7 && b > 1e7);
    }

    #[test]
    fn rytov_params_must_be_consistent() {
        let p = TurbulenceParams::from_rytov(1.0f64, 3.0).unwrap();
        assert!(p.validate().is_ok());
        let bad = TurbulenceParams { alpha: 5.0, ..p };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn rayleigh_values() {
        let p = RfParams::new(2.0f64).unwrap();
        assert!(rel(rayleigh_snr_cdf(2.0, &p).unwrap(), 1.0 - (-1.0f64).exp()) < 1e-15);
        assert_eq!(rayleigh_snr_cdf(0.0, &p).unwrap(), 0.0);
        assert!(rel(rayleigh_snr_cdf(6.0, &p).unwrap(), 0.950_212_931_632_136) < 1e-14);
        assert!(rel(rayleigh_snr_pdf(0.0, &p).unwrap(), 0.5) < 1e-15);
        assert!(rel(rayleigh_snr_pdf(2.0, &p).unwrap(), 0.183_939_720_585_721_16) < 1e-14);
        assert!(rayleigh_snr_cdf(-1.0, &p).is_err());
        assert!(rayleigh_snr_pdf(-1.0, &p).is_err());
    }

    #[test]
    fn max_user_forms() {
        let p = RfParams::new(1.0f64).unwrap();
        assert!(rel(max_user_cdf(1.0, &p, 2).unwrap(), 0.399_576_400_893_728_05) < 1e-14);
        assert!(rel(max_user_cdf(1.0, &p, 4).unwrap(), 0.159_661_300_151_185_27) < 1e-13);
        assert!(rel(max_user_pdf(1.0, &p, 3).unwrap(), 0.440_987_829_198_242_64) < 1e-13);
        assert!(max_user_cdf(1.0, &p, 0).is_err());
        assert!(max_user_pdf(1.0, &p, 0).is_err());
        for n in [1u32, 2, 3, 4, 8] {
            for &g in &[0.01f64, 0.3, 1.0, 2.5, 7.0] {
                let a = max_user_pdf(g, &p, n).unwrap();
                let b = max_user_pdf_product(g, &p, n).unwrap();
                assert!(rel(a, b) < 1e-12, "N={n} γ={g}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn fso_cdf_reference_values() {
        // 30-digit Mellin–Barnes evaluations
        let m = TurbulenceParams::<f64>::moderate();
        assert!((fso_snr_cdf(10.0, 10.0, &m).unwrap() - 0.643_713_591_742_940_116_72).abs() < 1e-10);
        let s = TurbulenceParams::<f64>::strong();
        assert!((fso_snr_cdf(1.0, 10.0, &s).unwrap() - 0.306_273_023_972_989_013_12).abs() < 1e-10);
        assert_eq!(fso_snr_cdf(0.0, 10.0, &s).unwrap(), 0.0);
    }

    #[test]
    fn samplers_are_deterministic() {
        let p = TurbulenceParams::<f64>::moderate();
        let draw = || {
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            (0..10).map(|_| sample_fso_intensity(&p, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(), draw());
        let rf = RfParams::new(3.0).unwrap();
        let mut r1 = ChaCha8Rng::seed_from_u64(1);
        let mut r2 = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            assert_eq!(sample_rf_snr(&rf, &mut r1).to_bits(), sample_rf_snr(&rf, &mut r2).to_bits());
        }
    }
}
