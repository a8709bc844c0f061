use super::{
    check_threshold, ln_laplace_prefactor, rayleigh_max_laplace, signed_binomials, BoundedSum, Scheme, SystemConfig,
};
use crate::channels::fso_snr_cdf;
use crate::error::Result;
use crate::real::Real;
use crate::special_fn::{Estimate, MeijerGSpec};
use crate::sum::TwoFold;

/// DF outage `1 − [1 − F_{γ1}][1 − F_FSO·F_RF]`, evaluated as
/// `F_{γ1} + F_FSO·F_RF·(1 − F_{γ1})` so no term cancels.
pub fn pout_df<T: Real>(cfg: &SystemConfig<T>, gamma_th: T) -> Result<T> {
    cfg.expect_scheme(Scheme::KnownCsiDf, "pout_df")?;
    check_threshold("pout_df", gamma_th)?;
    if gamma_th == T::zero() {
        return Ok(T::zero());
    }
    let f_rf = -(-gamma_th / cfg.mean_snr_rf).exp_m1();
    let f1 = f_rf.powi(cfg.n_users as i32);
    let f_fso = fso_snr_cdf(gamma_th, cfg.effective_mean_snr_fso(), &cfg.turbulence)?;
    Ok(f1 + f_fso * f_rf * (T::one() - f1))
}

/// DF outage in the binomially expanded form, accumulated in double-word
/// arithmetic, with its error bound.
pub fn pout_df_expanded<T: Real>(cfg: &SystemConfig<T>, gamma_th: T) -> Result<Estimate<T>> {
    cfg.expect_scheme(Scheme::KnownCsiDf, "pout_df")?;
    check_threshold("pout_df", gamma_th)?;
    if gamma_th == T::zero() {
        return Ok(Estimate { value: T::zero(), error_bound: T::zero() });
    }
    let m = (-gamma_th / cfg.mean_snr_rf).exp_m1();
    let e = TwoFold::one_plus(m);
    let f_fso = fso_snr_cdf(gamma_th, cfg.effective_mean_snr_fso(), &cfg.turbulence)?;
    let w = signed_binomials::<T>(cfg.n_users)?;
    let mut acc = BoundedSum::new(T::one());
    let mut last = TwoFold::zero();
    let mut ek = TwoFold::one();
    for &c in &w {
        let next = ek * e;
        acc.add_value(ek * c, T::zero());
        let l = (ek - next) * c;
        acc.note_abs(l.hi * f_fso);
        last = last + l;
        ek = next;
    }
    // F_FSO enters linearly, with coefficient (1 − e) − last ≥ 0.
    let lin = TwoFold::new(-m) - last;
    acc.add(lin.value(), Estimate { value: f_fso, error_bound: T::accept_rel_tol() * f_fso });
    Ok(acc.estimate())
}

/// The DF outage as the FSO hop vanishes (ξ → 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiZeroLimit<T> {
    /// Limit of the product form: `1 − [1 − (1 − e^{−x})^N] e^{−x}`, `x = γ_th/γ̄_RF`.
    pub exact: T,
    /// The limit `(1 − e^{−x})^N` quoted in the literature, which drops the
    /// second-hop RF factor.
    pub quoted: T,
}

pub fn pout_df_xi_zero_limit<T: Real>(cfg: &SystemConfig<T>, gamma_th: T) -> Result<XiZeroLimit<T>> {
    cfg.expect_scheme(Scheme::KnownCsiDf, "pout_df_xi_zero_limit")?;
    check_threshold("pout_df_xi_zero_limit", gamma_th)?;
    let x = gamma_th / cfg.mean_snr_rf;
    let f = -(-x).exp_m1();
    let f1 = f.powi(cfg.n_users as i32);
    Ok(XiZeroLimit { exact: f1 + f * (T::one() - f1), quoted: f1 })
}

/// `G^{6,3}_{5,8}` block of the Laplace transform of the FSO CDF.
fn laplace_spec<T: Real>(cfg: &SystemConfig<T>) -> Result<MeijerGSpec<T>> {
    let t = &cfg.turbulence;
    let half = T::lit(0.5);
    let x2 = t.xi2();
    let phi1 = vec![T::zero(), half, T::one(), (T::one() + x2) * half, (T::lit(2.0) + x2) * half];
    let phi2 = vec![
        x2 * half,
        (T::one() + x2) * half,
        t.alpha * half,
        (T::one() + t.alpha) * half,
        t.beta * half,
        (T::one() + t.beta) * half,
        T::zero(),
        half,
    ];
    MeijerGSpec::new(6, 3, phi1, phi2)
}

/// DF DPSK bit-error rate in closed form.
///
/// With `p_j = 1 + j/γ̄_RF` and `J_j = ∫ e^{−p_j γ} F_FSO(γ) dγ` (one `G^{6,3}_{5,8}`
/// each), `P_e = ½{Σ_k C(N,k)(−1)^k/p_k + (J_0 − J_1) − Σ_k C(N,k)(−1)^k (J_k − J_{k+1})}`.
/// The `k = 0` term of the last sum cancels `J_0 − J_1` and is dropped.
pub fn ber_df<T: Real>(cfg: &SystemConfig<T>) -> Result<T> {
    Ok(T::lit(0.5) * ber_df_sum(cfg)?.finish("ber_df")?.value)
}

/// [`ber_df`] with its propagated error bound, returned even when the bound
/// exceeds the accuracy contract.
pub fn ber_df_with_bound<T: Real>(cfg: &SystemConfig<T>) -> Result<Estimate<T>> {
    let e = ber_df_sum(cfg)?.estimate();
    let half = T::lit(0.5);
    Ok(Estimate { value: half * e.value, error_bound: half * e.error_bound })
}

fn ber_df_sum<T: Real>(cfg: &SystemConfig<T>) -> Result<BoundedSum<T>> {
    cfg.expect_scheme(Scheme::KnownCsiDf, "ber_df")?;
    let n = cfg.n_users;
    let g = cfg.mean_snr_rf;
    let t = &cfg.turbulence;
    let spec = laplace_spec(cfg)?;
    let ln_k = ln_laplace_prefactor(t)?;
    let a2 = (t.alpha * t.beta * t.kappa).powi(2);
    let base = a2 / (T::lit(16.0) * cfg.effective_mean_snr_fso());
    let j: Vec<Estimate<T>> = (0..=n + 1)
        .map(|jj| {
            let p = T::one() + T::from_count(jj as usize) / g;
            spec.eval_scaled(base / p, ln_k - p.ln())
        })
        .collect::<Result<_>>()?;
    let w = signed_binomials::<T>(n)?;
    let mut acc = BoundedSum::new(T::one());
    // N!/Π(γ̄ + j): N products, each rounded once.
    acc.add_value(TwoFold::new(rayleigh_max_laplace(n, g)), T::lit(2.0) * T::from_count(n as usize + 1) * T::epsilon());
    for k in 1..=n as usize {
        acc.add(-w[k], j[k]);
        acc.add(w[k], j[k + 1]);
    }
    Ok(acc)
}
