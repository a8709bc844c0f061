//! Closed-form outage probability and DPSK bit-error rate of the dual-hop
//! multiuser FSO/RF link, for the detect-and-forward (known CSI) and fixed-gain
//! amplify-and-forward (unknown CSI) relays.
//!
//! All SNRs are linear. Both outage expressions exist in a compact product form
//! (the production path) and in the binomially expanded form; the two are kept
//! side by side so that verification runs can compare them. The expanded forms
//! cancel heavily at high SNR, so they return their error bound rather than
//! enforce the accuracy contract.

mod af;
mod df;

use serde::{Deserialize, Serialize};

pub use af::{ber_af, ber_af_with_bound, cdf_af_fso_branch, cdf_af_fso_branch_expanded, cdf_af_rf_branch, pout_af, pout_af_expanded};
pub use df::{ber_df, ber_df_with_bound, pout_df, pout_df_expanded, pout_df_xi_zero_limit, XiZeroLimit};

use crate::channels::{RfParams, TurbulenceParams};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_fallible, QuadOptions};
use crate::real::Real;
use crate::special_fn::{binomial, log_gamma, Estimate};
use crate::sum::TwoFold;

/// Relaying protocol, selected by the availability of channel state information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// Detect-and-forward with known CSI.
    KnownCsiDf,
    /// Fixed-gain amplify-and-forward without CSI.
    UnknownCsiAf,
}

impl Scheme {
    pub fn label(self) -> &'static str {
        match self {
            Scheme::KnownCsiDf => "df",
            Scheme::UnknownCsiAf => "af",
        }
    }
}

/// One complete scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig<T> {
    pub scheme: Scheme,
    pub n_users: u32,
    pub mean_snr_rf: T,
    /// Average FSO SNR at unit conversion efficiency; the hop sees `η²` times this.
    pub mean_snr_fso: T,
    pub eta: T,
    /// Fixed-gain constant of the AF relay; unused by DF.
    pub c_const: T,
    pub gamma_th: T,
    pub turbulence: TurbulenceParams<T>,
}

impl<T: Real> SystemConfig<T> {
    /// Equal average SNRs on every link, η = 1, C = 1.
    pub fn equal_snr(
        scheme: Scheme,
        n_users: u32,
        gamma_avg: T,
        gamma_th: T,
        turbulence: TurbulenceParams<T>,
    ) -> Result<Self> {
        let cfg = SystemConfig {
            scheme,
            n_users,
            mean_snr_rf: gamma_avg,
            mean_snr_fso: gamma_avg,
            eta: T::one(),
            c_const: T::one(),
            gamma_th,
            turbulence,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let op = "system_config";
        if self.n_users == 0 {
            return Err(Error::domain(op, "n_users must be at least 1"));
        }
        if self.n_users > 64 {
            return Err(Error::domain(op, format!("n_users must be at most 64, got {}", self.n_users)));
        }
        for (name, v) in [
            ("mean_snr_rf", self.mean_snr_rf),
            ("mean_snr_fso", self.mean_snr_fso),
            ("eta", self.eta),
            ("c_const", self.c_const),
            ("gamma_th", self.gamma_th),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::domain(op, format!("{name} must be positive and finite, got {v}")));
            }
        }
        self.turbulence.validate()
    }

    /// `η²·γ̄_FSO`, the average SNR the FSO hop actually sees.
    pub fn effective_mean_snr_fso(&self) -> T {
        self.eta * self.eta * self.mean_snr_fso
    }

    pub fn rf(&self) -> RfParams<T> {
        RfParams { mean_snr: self.mean_snr_rf }
    }

    fn expect_scheme(&self, scheme: Scheme, op: &'static str) -> Result<()> {
        self.validate()?;
        if self.scheme != scheme {
            return Err(Error::domain(op, format!("requires scheme {:?}, got {:?}", scheme, self.scheme)));
        }
        Ok(())
    }
}

/// Outage probability of `cfg` at `gamma_th`, dispatching on the scheme.
pub fn pout<T: Real>(cfg: &SystemConfig<T>, gamma_th: T) -> Result<T> {
    match cfg.scheme {
        Scheme::KnownCsiDf => pout_df(cfg, gamma_th),
        Scheme::UnknownCsiAf => pout_af(cfg, gamma_th),
    }
}

/// DPSK bit-error rate of `cfg`, dispatching on the scheme.
///
/// The closed forms are alternating sums. When their propagated error bound
/// exceeds [`Real::result_rel_tol`] (high SNR with several users, or many
/// users at any SNR), the rate is instead integrated from the outage
/// probability, whose compact form does not cancel.
pub fn ber<T: Real>(cfg: &SystemConfig<T>) -> Result<T> {
    let closed = match cfg.scheme {
        Scheme::KnownCsiDf => ber_df(cfg),
        Scheme::UnknownCsiAf => ber_af(cfg),
    };
    match closed {
        Err(Error::NonConvergence { .. }) => ber_by_quadrature(cfg),
        r => r,
    }
}

/// `½∫ e^{−γ} P_out(γ) dγ`, tightening the absolute tolerance until it is a
/// small fraction of the result.
pub fn ber_by_quadrature<T: Real>(cfg: &SystemConfig<T>) -> Result<T> {
    let rel = T::result_rel_tol() * T::lit(1e-2);
    let mut tol = rel;
    for _ in 0..8 {
        let v = ber_from_cdf_quadrature(|x| pout(cfg, x), tol)?;
        if v <= T::zero() || tol <= rel * v {
            return Ok(v);
        }
        tol = (rel * v).max(T::min_positive_value() / rel);
    }
    Err(Error::non_convergence("ber_by_quadrature", "tolerance did not settle".to_string()))
}

/// `½∫₀^∞ e^{−γ} F(γ) dγ`, integrated in `t = e^{−γ}` so the domain is `[0, 1]`.
/// `tolerance` is absolute.
pub fn ber_from_cdf_quadrature<T, F>(mut cdf: F, tolerance: T) -> Result<T>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    if !(tolerance > T::zero()) {
        return Err(Error::domain("ber_from_cdf_quadrature", format!("tolerance must be positive, got {tolerance}")));
    }
    // Dense near t = 1 (small γ), where outage CDFs of high-SNR links vary fastest.
    let mut points = vec![T::zero(), T::lit(0.5)];
    let mut gap = T::lit(0.1);
    while gap >= T::lit(1e-8) {
        points.push(T::one() - gap);
        gap = gap * T::lit(0.1);
    }
    points.push(T::one());
    let opts = QuadOptions { abs_tol: tolerance, rel_tol: T::zero(), max_intervals: 4000 };
    let r = integrate_fallible(
        |t| {
            if t <= T::zero() {
                return Ok(T::one());
            }
            if t >= T::one() {
                return cdf(T::zero());
            }
            cdf(-t.ln())
        },
        &points,
        &opts,
    )?;
    if !r.converged {
        return Err(Error::non_convergence(
            "ber_from_cdf_quadrature",
            format!("error estimate {} above tolerance {tolerance}", r.error),
        ));
    }
    Ok(T::lit(0.5) * r.value())
}

/// `c_k = C(N−1,k)(−1)^k N/(k+1) = (−1)^k C(N, k+1)`, the weights of the
/// expanded order-statistic density.
fn order_weights<T: Real>(n: u32) -> Result<Vec<T>> {
    (0..n)
        .map(|k| {
            let c = T::from_u64(binomial(n, k + 1)?).expect("binomial fits scalar");
            Ok(if k % 2 == 0 { c } else { -c })
        })
        .collect()
}

/// `(−1)^k C(N, k)` for `k = 0..=N`.
fn signed_binomials<T: Real>(n: u32) -> Result<Vec<T>> {
    (0..=n)
        .map(|k| {
            let c = T::from_u64(binomial(n, k)?).expect("binomial fits scalar");
            Ok(if k % 2 == 0 { c } else { -c })
        })
        .collect()
}

/// `ln(ξ² 2^{α+β−3}/(π Γ(α)Γ(β)))`, the prefactor of the Laplace-transformed
/// FSO CDF blocks.
fn ln_laplace_prefactor<T: Real>(t: &TurbulenceParams<T>) -> Result<T> {
    Ok(t.xi2().ln() - log_gamma(t.alpha)? - log_gamma(t.beta)? + (t.alpha + t.beta - T::lit(3.0)) * T::LN_2()
        - T::PI().ln())
}

/// `N!/Π_{j=1..N}(γ̄ + j)`, equal to `Σ_{k=0}^{N} C(N,k)(−1)^k/(1 + k/γ̄)` and
/// to `∫ e^{−γ}(1 − e^{−γ/γ̄})^N dγ`, without the cancellation.
fn rayleigh_max_laplace<T: Real>(n: u32, mean: T) -> T {
    (1..=n).fold(T::one(), |acc, j| {
        let jf = T::from_count(j as usize);
        acc * jf / (mean + jf)
    })
}

/// Double-word sum of weighted terms that also carries an absolute error bound
/// inherited from the terms. The alternating binomial weights can reach
/// `C(N, N/2)`, so a small relative error in each term may swamp the result;
/// [`finish`](Self::finish) refuses a value whose bound breaks the contract.
#[derive(Debug, Clone, Copy)]
struct BoundedSum<T> {
    sum: TwoFold<T>,
    err: T,
    abs: T,
    /// The exact sum lies in `[0, max]`.
    max: T,
}

impl<T: Real> BoundedSum<T> {
    fn new(max: T) -> Self {
        BoundedSum { sum: TwoFold::zero(), err: T::zero(), abs: T::zero(), max }
    }

    /// Adds `w·e` where `e` carries its own bound.
    fn add(&mut self, w: T, e: Estimate<T>) {
        self.add_tf(w, TwoFold::new(e.value), e.error_bound);
    }

    /// Adds `w·v` where `v` is within `bound` of its exact value. Integer
    /// weights from `1/ε` up may have been rounded and are charged for it.
    fn add_tf(&mut self, w: T, v: TwoFold<T>, bound: T) {
        let wv = (w * v.hi).abs();
        self.sum = self.sum + v * w;
        self.err = self.err + w.abs() * bound;
        if w.abs() * T::epsilon() >= T::one() {
            self.err = self.err + T::lit(2.0) * T::epsilon() * wv;
        }
        self.abs = self.abs + wv;
    }

    /// Adds `v` known to relative accuracy `rel`.
    fn add_value(&mut self, v: TwoFold<T>, rel: T) {
        self.sum = self.sum + v;
        self.err = self.err + rel * v.hi.abs();
        self.abs = self.abs + v.hi.abs();
    }

    /// Records magnitude that passed through the double-word sum outside `add`.
    fn note_abs(&mut self, a: T) {
        self.abs = self.abs + a.abs();
    }

    fn bound(&self) -> T {
        // Double-word accumulation adds a few ulps of the working precision squared.
        self.err + T::lit(16.0) * T::epsilon() * T::epsilon() * self.abs
    }

    /// The sum and its bound, without enforcing the contract.
    fn estimate(self) -> Estimate<T> {
        let value = self.sum.value();
        Estimate { value, error_bound: self.bound() + T::epsilon() * value.abs() }
    }

    fn refuse(op: &'static str, error_bound: T, value: T) -> Error {
        Error::non_convergence(
            op,
            format!(
                "cancellation: error bound {:e} exceeds the contract for value {:e}",
                error_bound.to_f64().unwrap_or(f64::NAN),
                value.to_f64().unwrap_or(f64::NAN)
            ),
        )
    }

    /// Fails once the bound alone rules out meeting the contract at any
    /// admissible value, so long sums can stop early.
    fn check(&self, op: &'static str) -> Result<()> {
        let b = self.bound();
        if b > T::result_rel_tol() * self.max {
            return Err(Self::refuse(op, b, self.sum.value()));
        }
        Ok(())
    }

    fn finish(self, op: &'static str) -> Result<Estimate<T>> {
        let max = self.max;
        let Estimate { value, error_bound } = self.estimate();
        let admissible = value >= -error_bound && value <= max + error_bound;
        if !(admissible && error_bound <= T::result_rel_tol() * value.abs()) {
            return Err(Self::refuse(op, error_bound, value));
        }
        Ok(Estimate { value, error_bound })
    }
}

fn check_threshold<T: Real>(op: &'static str, gamma: T) -> Result<()> {
    if !(gamma >= T::zero()) || gamma.is_nan() {
        return Err(Error::domain(op, format!("threshold must be non-negative, got {gamma}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_known_integrals() {
        let one = ber_from_cdf_quadrature(|_| Ok(1.0f64), 1e-12).unwrap();
        assert!((one - 0.5).abs() < 1e-12);
        for g in [0.5f64, 3.0, 100.0, 1000.0] {
            let v = ber_from_cdf_quadrature(|x: f64| Ok(-(-x / g).exp_m1()), 1e-13).unwrap();
            let exact = 0.5 / (1.0 + g);
            assert!(((v - exact) / exact).abs() < 1e-8, "γ̄={g}: {v} vs {exact}");
        }
    }

    #[test]
    fn order_weights_sum_to_one() {
        for n in 1..=8u32 {
            let w: Vec<f64> = order_weights(n).unwrap();
            assert_eq!(w.iter().sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn rayleigh_laplace_identity() {
        for n in [1u32, 2, 4, 8] {
            for g in [0.3f64, 1.0, 10.0] {
                let s: f64 = signed_binomials::<f64>(n)
                    .unwrap()
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c / (1.0 + k as f64 / g))
                    .sum();
                assert!((s - rayleigh_max_laplace(n, g)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn config_validation() {
        let t = TurbulenceParams::<f64>::moderate();
        assert!(SystemConfig::equal_snr(Scheme::KnownCsiDf, 0, 10.0, 10.0, t).is_err());
        assert!(SystemConfig::equal_snr(Scheme::KnownCsiDf, 2, -1.0, 10.0, t).is_err());
        assert!(SystemConfig::equal_snr(Scheme::KnownCsiDf, 2, 10.0, 0.0, t).is_err());
        let cfg = SystemConfig::equal_snr(Scheme::KnownCsiDf, 2, 10.0, 10.0, t).unwrap();
        assert_eq!(cfg.eta, 1.0);
        assert_eq!(cfg.c_const, 1.0);
        assert!(pout_af(&cfg, 1.0).is_err());
    }

    fn moderate(scheme: Scheme, n: u32, db: f64) -> SystemConfig<f64> {
        SystemConfig::equal_snr(scheme, n, 10f64.powf(db / 10.0), 10.0, TurbulenceParams::moderate()).unwrap()
    }

    #[test]
    fn ber_falls_back_when_closed_form_cancels() {
        let c = moderate(Scheme::UnknownCsiAf, 4, 30.0);
        assert!(ber_af(&c).unwrap_err().is_numerical());
        // Uncertified closed-form value; its true error is far below its bound.
        let closed = 4.0683378e-12;
        let v = ber(&c).unwrap();
        assert!(((v - closed) / closed).abs() < 1e-5, "{v}");
        let c = moderate(Scheme::KnownCsiDf, 64, 30.0);
        assert!(ber_df(&c).is_err());
        assert!(ber(&c).unwrap() > 0.0);
    }

    #[test]
    fn hopeless_sums_are_refused() {
        let c = moderate(Scheme::UnknownCsiAf, 64, 0.0);
        assert!(ber(&c).unwrap_err().is_numerical());
        let mut acc = BoundedSum::<f64>::new(1.0);
        acc.add(1.0, Estimate { value: 1e17, error_bound: 1e4 });
        assert!(acc.finish("test").is_err(), "out of range values must not pass");
    }
}
