use super::{
    check_threshold, ln_laplace_prefactor, order_weights, rayleigh_max_laplace, BoundedSum, Scheme, SystemConfig,
};
use crate::error::Result;
use crate::real::Real;
use crate::special_fn::{BivariateGSpec, Estimate, MeijerGSpec};
use crate::sum::{CompensatedSum, TwoFold};

/// ψ₁ (upper) and ψ₂ (lower) parameter lists of the FSO-branch kernel.
fn psi<T: Real>(cfg: &SystemConfig<T>) -> (Vec<T>, Vec<T>) {
    let t = &cfg.turbulence;
    let half = T::lit(0.5);
    let x2 = t.xi2();
    let psi1 = vec![T::one(), half, (T::lit(2.0) + x2) * half, (T::one() + x2) * half];
    let psi2 = vec![
        T::one(),
        (T::one() + x2) * half,
        x2 * half,
        (T::one() + t.alpha) * half,
        t.alpha * half,
        (T::one() + t.beta) * half,
        t.beta * half,
        half,
        T::zero(),
    ];
    (psi1, psi2)
}

fn fso_branch_spec<T: Real>(cfg: &SystemConfig<T>) -> Result<MeijerGSpec<T>> {
    let (a, b) = psi(cfg);
    MeijerGSpec::new(7, 2, a, b)
}

/// `G^{2,0}_{0,2}(·|1,0)`, which equals `2√w K₁(2√w)`.
fn rf_branch_spec<T: Real>() -> Result<MeijerGSpec<T>> {
    MeijerGSpec::new(2, 0, vec![], vec![T::one(), T::zero()])
}

/// `(αβκ)²C/(16 γ̄_FSO)`.
fn fso_scale<T: Real>(cfg: &SystemConfig<T>) -> T {
    let t = &cfg.turbulence;
    (t.alpha * t.beta * t.kappa).powi(2) * cfg.c_const / (T::lit(16.0) * cfg.effective_mean_snr_fso())
}

/// Per-index terms `e^{−(k+1)x}·K'·G^{7,2}_{4,9}(z_k)` of the FSO-branch CDF.
/// Term `k` is accepted once its weighted error is below `abs_floor`.
fn fso_branch_terms<T: Real>(cfg: &SystemConfig<T>, gamma: T, abs_floor: T) -> Result<Vec<Estimate<T>>> {
    let spec = fso_branch_spec(cfg)?;
    let ln_k = ln_laplace_prefactor(&cfg.turbulence)?;
    let g = cfg.mean_snr_rf;
    let scale = fso_scale(cfg) * gamma / g;
    let w = order_weights::<T>(cfg.n_users)?;
    (0..cfg.n_users as usize)
        .map(|k| {
            let k1 = T::from_count(k + 1);
            spec.eval_scaled_within(scale * k1, ln_k - k1 * gamma / g, abs_floor / w[k].abs())
        })
        .collect()
}

/// `(1 − e^{−x})^N`, the part of either branch CDF free of Meijer-G terms and a
/// lower bound on both, with the weighted-error floor it allows each term.
fn branch_lead<T: Real>(x: T, n: u32) -> (T, T) {
    let lead = (-(-x).exp_m1()).powi(n as i32);
    (lead, T::result_rel_tol() * T::lit(1e-2) * lead / T::from_count(n as usize))
}

/// `G^{2,0}_{0,2}(w|1,0)` and its complement `1 − G`, both at full relative
/// precision. For small `w` the kernel is within `w ln w` of one, so the
/// complement comes from the series of `1 − 2√w K₁(2√w)`,
/// `Σ_k w^{k+1}/(k!(k+1)!)·[ψ(k+1) + ψ(k+2) − ln w]`, whose terms are all
/// positive there.
fn rf_kernel<T: Real>(spec: &MeijerGSpec<T>, w: T) -> Result<(TwoFold<T>, Estimate<T>)> {
    if w < T::lit(0.5) {
        let ln_w = w.ln();
        // ψ(1) + ψ(2) = 1 − 2γ_E
        let mut psi_sum = T::one() - T::lit(2.0 * 0.577_215_664_901_532_860_6);
        let mut coef = w;
        let mut acc = CompensatedSum::new();
        for k in 1..200usize {
            let term = coef * (psi_sum - ln_w);
            acc.add(term);
            if term.abs() <= T::epsilon() * T::lit(0.01) * acc.value().abs() {
                break;
            }
            let kf = T::from_count(k);
            psi_sum = psi_sum + T::one() / kf + T::one() / (kf + T::one());
            coef = coef * w / (kf * (kf + T::one()));
        }
        let comp = acc.value();
        let bound = T::lit(8.0) * T::epsilon() * comp.abs() * (T::one() + ln_w.abs());
        return Ok((TwoFold::one() - TwoFold::new(comp), Estimate { value: comp, error_bound: bound }));
    }
    // Only `1 − G` is used once `w` is large, so `G` needs absolute accuracy only.
    let g = spec.eval_scaled_within(w, T::zero(), T::epsilon())?;
    Ok((TwoFold::new(g.value), Estimate { value: T::one() - g.value, error_bound: g.error_bound + T::epsilon() }))
}

/// `1 − G^{2,1}_{1,2}(x|0;1,0)`, the complement of the Laplace-transformed RF
/// kernel. For small `x` it comes from the series `Σ_k x^{k+1}/k!·[ψ(k+1) − ln x]`
/// (termwise Laplace transform of the series in [`rf_kernel`]).
fn rf_laplace_complement<T: Real>(spec: &MeijerGSpec<T>, x: T) -> Result<Estimate<T>> {
    if x < T::lit(0.5) {
        let ln_x = x.ln();
        let mut psi = -T::lit(0.577_215_664_901_532_860_6);
        let mut coef = x;
        let mut acc = CompensatedSum::new();
        for k in 1..200usize {
            let term = coef * (psi - ln_x);
            acc.add(term);
            if term.abs() <= T::epsilon() * T::lit(0.01) * acc.value().abs() {
                break;
            }
            let kf = T::from_count(k);
            psi = psi + T::one() / kf;
            coef = coef * x / kf;
        }
        let v = acc.value();
        return Ok(Estimate { value: v, error_bound: T::lit(8.0) * T::epsilon() * v.abs() * (T::one() + ln_x.abs()) });
    }
    let g = spec.eval_scaled_within(x, T::zero(), T::epsilon())?;
    Ok(Estimate { value: T::one() - g.value, error_bound: g.error_bound + T::epsilon() })
}

/// RF-branch kernels `G^{2,0}_{0,2}(γC(k+1)/γ̄²)` for each index.
fn rf_branch_kernels<T: Real>(cfg: &SystemConfig<T>, gamma: T) -> Result<Vec<(TwoFold<T>, Estimate<T>)>> {
    let spec = rf_branch_spec::<T>()?;
    let g = cfg.mean_snr_rf;
    (0..cfg.n_users)
        .map(|k| {
            let k1 = T::from_count(k as usize + 1);
            rf_kernel(&spec, gamma * cfg.c_const * k1 / (g * g))
        })
        .collect()
}

fn clamp_probability<T: Real>(v: T) -> T {
    v.max(T::zero()).min(T::one())
}

/// CDF of the AF FSO-branch SNR `γ₁γ_{2,FSO}/(γ_{2,FSO} + C)`.
///
/// Evaluated as `(1 − e^{−x})^N + Σ_k c_k e^{−(k+1)x} K' G^{7,2}_{4,9}(z_k)`, which
/// equals the printed `1 − Σ_k c_k e^{−(k+1)x}[1 − K' G^{7,2}_{4,9}(z_k)]` because
/// the weights `c_k` sum to one.
pub fn cdf_af_fso_branch<T: Real>(gamma: T, cfg: &SystemConfig<T>) -> Result<T> {
    cfg.expect_scheme(Scheme::UnknownCsiAf, "cdf_af_fso_branch")?;
    check_threshold("cdf_af_fso_branch", gamma)?;
    if gamma == T::zero() {
        return Ok(T::zero());
    }
    let x = gamma / cfg.mean_snr_rf;
    let (lead, floor) = branch_lead(x, cfg.n_users);
    let w = order_weights::<T>(cfg.n_users)?;
    let terms = fso_branch_terms(cfg, gamma, floor)?;
    let mut acc = BoundedSum::new(T::one());
    acc.add_value(TwoFold::new(lead), T::lit(2.0) * T::from_count(cfg.n_users as usize + 1) * T::epsilon());
    for (c, t) in w.iter().zip(&terms) {
        acc.add(*c, *t);
    }
    Ok(clamp_probability(acc.finish("cdf_af_fso_branch")?.value))
}

/// FSO-branch CDF in the printed `1 − Σ_k c_k e^{−(k+1)x}[1 − K' G(z_k)]` layout,
/// with its error bound.
pub fn cdf_af_fso_branch_expanded<T: Real>(gamma: T, cfg: &SystemConfig<T>) -> Result<Estimate<T>> {
    cfg.expect_scheme(Scheme::UnknownCsiAf, "cdf_af_fso_branch")?;
    check_threshold("cdf_af_fso_branch", gamma)?;
    if gamma == T::zero() {
        return Ok(Estimate { value: T::zero(), error_bound: T::zero() });
    }
    let x = gamma / cfg.mean_snr_rf;
    let e = TwoFold::one_plus((-x).exp_m1());
    let (_, floor) = branch_lead(x, cfg.n_users);
    let w = order_weights::<T>(cfg.n_users)?;
    let terms = fso_branch_terms(cfg, gamma, floor)?;
    let mut acc = BoundedSum::new(T::one());
    acc.add_value(TwoFold::one(), T::zero());
    let mut ek = e;
    for (c, t) in w.iter().zip(&terms) {
        acc.add_tf(-*c, ek, T::from_count(2) * T::epsilon() * ek.hi);
        acc.add(*c, *t);
        ek = ek * e;
    }
    Ok(acc.estimate())
}

/// CDF of the AF RF-branch SNR `γ₁γ_{2,RF}/(γ_{2,RF} + C)`:
/// `1 − Σ_k c_k e^{−(k+1)x} G^{2,0}_{0,2}(γC(k+1)/γ̄²|1,0)`, rearranged as
/// `(1 − e^{−x})^N + Σ_k c_k e^{−(k+1)x}[1 − G(·)]`.
pub fn cdf_af_rf_branch<T: Real>(gamma: T, cfg: &SystemConfig<T>) -> Result<T> {
    cfg.expect_scheme(Scheme::UnknownCsiAf, "cdf_af_rf_branch")?;
    check_threshold("cdf_af_rf_branch", gamma)?;
    if gamma == T::zero() {
        return Ok(T::zero());
    }
    let x = gamma / cfg.mean_snr_rf;
    let (lead, _) = branch_lead(x, cfg.n_users);
    let w = order_weights::<T>(cfg.n_users)?;
    let kern = rf_branch_kernels(cfg, gamma)?;
    let mut acc = BoundedSum::new(T::one());
    acc.add_value(TwoFold::new(lead), T::lit(2.0) * T::from_count(cfg.n_users as usize + 1) * T::epsilon());
    for (k, (c, (_, comp))) in w.iter().zip(&kern).enumerate() {
        let kx = T::from_count(k + 1) * x;
        let ek = (-kx).exp();
        // exp of a rounded argument: relative error about ε(1 + (k+1)x)
        let bound = ek * (comp.error_bound + T::epsilon() * (T::lit(2.0) + kx) * comp.value.abs());
        acc.add(*c, Estimate { value: ek * comp.value, error_bound: bound });
    }
    Ok(clamp_probability(acc.finish("cdf_af_rf_branch")?.value))
}

/// AF outage: product of the two branch CDFs.
pub fn pout_af<T: Real>(cfg: &SystemConfig<T>, gamma_th: T) -> Result<T> {
    let f = cdf_af_fso_branch(gamma_th, cfg)?;
    if f == T::zero() {
        return Ok(T::zero());
    }
    Ok(f * cdf_af_rf_branch(gamma_th, cfg)?)
}

/// AF outage in the expanded double-sum form
/// `1 − S_FSO − S_RF + Σ_k Σ_g c_k c_g e^{−(k+g+2)x} G_k^{RF}[1 − K' G_g^{FSO}]`,
/// with its error bound.
pub fn pout_af_expanded<T: Real>(cfg: &SystemConfig<T>, gamma_th: T) -> Result<Estimate<T>> {
    cfg.expect_scheme(Scheme::UnknownCsiAf, "pout_af")?;
    check_threshold("pout_af", gamma_th)?;
    if gamma_th == T::zero() {
        return Ok(Estimate { value: T::zero(), error_bound: T::zero() });
    }
    let x = gamma_th / cfg.mean_snr_rf;
    let e = TwoFold::one_plus((-x).exp_m1());
    let (_, floor) = branch_lead(x, cfg.n_users);
    let w = order_weights::<T>(cfg.n_users)?;
    let fso = fso_branch_terms(cfg, gamma_th, floor)?;
    let rf = rf_branch_kernels(cfg, gamma_th)?;
    let n = w.len();
    // e^{−(k+1)x} for k = 0..N−1.
    let mut ek = Vec::with_capacity(n);
    let mut cur = e;
    for _ in 0..n {
        ek.push(cur);
        cur = cur * e;
    }
    let eps = T::epsilon();
    // Bracket of the FSO sum, e^{−(g+1)x}[1 − K'G_g], and its bound.
    let bracket: Vec<(TwoFold<T>, T)> = (0..n)
        .map(|g| (ek[g] - TwoFold::new(fso[g].value), fso[g].error_bound + eps * ek[g].hi))
        .collect();
    let mut acc = BoundedSum::new(T::one());
    acc.add_value(TwoFold::one(), T::zero());
    for k in 0..n {
        acc.add_tf(-w[k], bracket[k].0, bracket[k].1);
        let r = ek[k] * rf[k].0;
        acc.add_tf(-w[k], r, ek[k].hi * (rf[k].1.error_bound + eps));
    }
    for k in 0..n {
        let r = ek[k] * rf[k].0;
        let r_bound = ek[k].hi * (rf[k].1.error_bound + eps);
        for g in 0..n {
            let (b, b_bound) = bracket[g];
            let bound = r.hi.abs() * b_bound + b.hi.abs() * r_bound;
            acc.add_tf(w[k] * w[g], r * b, bound);
        }
    }
    Ok(acc.estimate())
}

/// AF DPSK bit-error rate in closed form, with the cross terms evaluated as
/// extended bivariate Meijer-G functions.
///
/// With `p_k = 1 + (k+1)/γ̄_RF` and `q = 1 + (k+g+2)/γ̄_RF` the closed form is
/// `2P_e = 1 − Σ_k c_k/p_k [1 − K' G^{7,3}_{5,9}] − Σ_k c_k/p_k G^{2,1}_{1,2}
///        + Σ_k Σ_g c_k c_g/q [G^{2,1}_{1,2}(x) − K' G(x, y)]`.
/// It is summed regrouped: the parts free of Meijer-G functions,
/// `1 − 2Σ_k c_k/p_k + Σ_k Σ_g c_k c_g/q`, collapse to `(2N)!/Π_{j≤2N}(γ̄_RF + j)`,
/// and every `G^{2,1}_{1,2}` enters through its small complement `1 − G^{2,1}_{1,2}`.
/// At high SNR the BER is many orders below the individual terms, and this
/// keeps the cancellation to terms that are themselves small.
pub fn ber_af<T: Real>(cfg: &SystemConfig<T>) -> Result<T> {
    Ok(T::lit(0.5) * ber_af_sum(cfg, true)?.finish("ber_af")?.value)
}

/// [`ber_af`] with its propagated error bound, returned even when the bound
/// exceeds the accuracy contract.
pub fn ber_af_with_bound<T: Real>(cfg: &SystemConfig<T>) -> Result<Estimate<T>> {
    let e = ber_af_sum(cfg, false)?.estimate();
    let half = T::lit(0.5);
    Ok(Estimate { value: half * e.value, error_bound: half * e.error_bound })
}

/// `2P_e` as a bounded sum. With `early_exit` the loop stops once the bound
/// rules out the contract.
fn ber_af_sum<T: Real>(cfg: &SystemConfig<T>, early_exit: bool) -> Result<BoundedSum<T>> {
    cfg.expect_scheme(Scheme::UnknownCsiAf, "ber_af")?;
    let n = cfg.n_users;
    let g = cfg.mean_snr_rf;
    let c = cfg.c_const;
    let w = order_weights::<T>(n)?;
    let ln_k = ln_laplace_prefactor(&cfg.turbulence)?;
    let y_scale = fso_scale(cfg);
    let eps = T::epsilon();

    let (psi1, psi2) = psi(cfg);
    let mut a73 = vec![T::zero()];
    a73.extend(psi1.iter().copied());
    let spec73 = MeijerGSpec::new(7, 3, a73, psi2.clone())?;
    let spec21 = MeijerGSpec::new(2, 1, vec![T::zero()], vec![T::one(), T::zero()])?;
    let ebmg = BivariateGSpec::new(
        MeijerGSpec::new(0, 1, vec![T::zero()], vec![])?,
        rf_branch_spec::<T>()?,
        MeijerGSpec::new(7, 2, psi1, psi2)?,
    );

    let mut acc = BoundedSum::new(T::one());
    acc.add_value(
        TwoFold::new(rayleigh_max_laplace(2 * n, g)),
        T::lit(2.0) * T::from_count(2 * n as usize + 1) * eps,
    );
    let scaled = |e: Estimate<T>, d: T| Estimate { value: e.value / d, error_bound: (e.error_bound + eps * e.value.abs()) / d };
    for k in 0..n as usize {
        let k1 = T::from_count(k + 1);
        let p = T::one() + k1 / g;
        acc.add(w[k], spec73.eval_scaled(y_scale * k1 / (g + k1), ln_k - p.ln())?);
        acc.add(w[k], scaled(rf_laplace_complement(&spec21, c * k1 / (g * (g + k1)))?, p));
        for gi in 0..n as usize {
            let g1 = T::from_count(gi + 1);
            let shift = g + k1 + g1;
            let q = T::one() + (k1 + g1) / g;
            let x = c * k1 / (g * shift);
            let y = y_scale * g1 / shift;
            let wk = w[k] * w[gi];
            acc.add(-wk, scaled(rf_laplace_complement(&spec21, x)?, q));
            acc.add(-wk, ebmg.eval_scaled(x, y, ln_k - q.ln())?);
        }
        if early_exit {
            acc.check("ber_af")?;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::super::ber_from_cdf_quadrature;
    use super::*;
    use crate::channels::TurbulenceParams;

    fn cfg(n: u32, avg_db: f64) -> SystemConfig<f64> {
        let g = 10f64.powf(avg_db / 10.0);
        SystemConfig::equal_snr(Scheme::UnknownCsiAf, n, g, 10.0, TurbulenceParams::moderate()).unwrap()
    }

    #[test]
    fn forms_agree() {
        for n in [1u32, 2, 4] {
            for db in [0.0, 15.0, 30.0] {
                let c = cfg(n, db);
                let a = pout_af(&c, 10.0).unwrap();
                let b = pout_af_expanded(&c, 10.0).unwrap();
                assert!((a - b.value).abs() <= 1e-8 * a + b.error_bound, "N={n} {db} dB: {a} vs {b:?}");
                let f = cdf_af_fso_branch(10.0, &c).unwrap();
                let fe = cdf_af_fso_branch_expanded(10.0, &c).unwrap();
                assert!((f - fe.value).abs() <= 1e-8 * f + fe.error_bound, "N={n} {db} dB: {f} vs {fe:?}");
            }
        }
    }

    #[test]
    fn ber_matches_quadrature() {
        let c = cfg(2, 10.0);
        let closed = ber_af(&c).unwrap();
        let quad = ber_from_cdf_quadrature(|x| pout_af(&c, x), 1e-10).unwrap();
        assert!(((closed - quad) / quad).abs() < 1e-4, "{closed} vs {quad}");
    }
}
