use fsorf_core::analytic::{pout, pout_af, pout_df, pout_df_expanded};
use fsorf_core::channels::{fso_snr_cdf, max_user_cdf, rayleigh_snr_cdf, RfParams};
use fsorf_core::special_fn::{bessel_k, log_gamma, meijer_g, MeijerGSpec};
use fsorf_core::units::{db_to_linear, linear_to_db};
use fsorf_core::{Scheme, SystemConfig, SystemConfigF32, TurbulenceParams, TurbulenceParamsF32};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

fn turbulence() -> impl Strategy<Value = TurbulenceParams> {
    (1.5f64..8.0, 1.05f64..6.0, 0.8f64..12.0).prop_map(|(a, b, xi)| TurbulenceParams::new(a, b, xi).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn meijer_exponential(z in 0.05f64..20.0, b in 0.0f64..3.0) {
        let spec = MeijerGSpec::new(1, 0, vec![], vec![b]).unwrap();
        let exact = z.powf(b) * (-z).exp();
        let v = meijer_g(&spec, z).unwrap();
        prop_assert!(rel(v, exact) < 1e-9, "{v} vs {exact}");
    }

    #[test]
    fn meijer_rational(z in 0.05f64..20.0, a in 0.3f64..1.0, b in 0.0f64..2.0) {
        // Γ(1−a+b) z^b (1+z)^{a−b−1}
        let spec = MeijerGSpec::new(1, 1, vec![a], vec![b]).unwrap();
        let exact = (log_gamma(1.0 - a + b).unwrap() + b * z.ln() + (a - b - 1.0) * z.ln_1p()).exp();
        let v = meijer_g(&spec, z).unwrap();
        prop_assert!(rel(v, exact) < 1e-9, "{v} vs {exact}");
    }

    #[test]
    fn meijer_bessel(z in 0.05f64..20.0, b1 in 0.0f64..2.0, d in 0.1f64..1.9) {
        // G^{2,0}_{0,2}(z | b1, b2) = 2 z^{(b1+b2)/2} K_{b1−b2}(2√z)
        let b2 = b1 + d;
        let spec = MeijerGSpec::new(2, 0, vec![], vec![b1, b2]).unwrap();
        let exact = 2.0 * z.powf(0.5 * (b1 + b2)) * bessel_k(d, 2.0 * z.sqrt()).unwrap();
        let v = meijer_g(&spec, z).unwrap();
        prop_assert!(rel(v, exact) < 1e-9, "{v} vs {exact}");
    }

    #[test]
    fn fso_cdf_is_a_distribution(t in turbulence(), g in 0.01f64..100.0, r in 1.01f64..4.0) {
        let lo = fso_snr_cdf(g, 10.0, &t).unwrap();
        let hi = fso_snr_cdf(g * r, 10.0, &t).unwrap();
        prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        prop_assert!(hi >= lo - 1e-12, "{lo} {hi}");
    }

    #[test]
    fn best_of_n_is_power_of_single(g in 0.0f64..50.0, mean in 0.1f64..100.0, n in 1u32..12) {
        let p = RfParams::new(mean).unwrap();
        let single = rayleigh_snr_cdf(g, &p).unwrap();
        prop_assert!(rel(max_user_cdf(g, &p, n).unwrap(), single.powi(n as i32)) < 1e-12 || single == 0.0);
    }

    #[test]
    fn outage_is_monotone(t in turbulence(), db in 0.0f64..30.0, n in 1u32..4, th_db in 0.0f64..15.0) {
        // Away from the figure parameters the alternating sums may cancel past
        // the accuracy contract; a refusal is then the expected outcome.
        let eval = |c: &SystemConfig, g: f64| match pout(c, g) {
            Ok(p) => Some(p),
            Err(e) => {
                assert!(e.is_numerical(), "{e}");
                None
            }
        };
        for scheme in [Scheme::KnownCsiDf, Scheme::UnknownCsiAf] {
            let c = SystemConfig::equal_snr(scheme, n, db_to_linear(db), db_to_linear(th_db), t).unwrap();
            let Some(p) = eval(&c, c.gamma_th) else { continue };
            prop_assert!((0.0..=1.0).contains(&p));
            let mut better = c;
            better.mean_snr_rf *= 2.0;
            better.mean_snr_fso *= 2.0;
            if let Some(q) = eval(&better, c.gamma_th) {
                prop_assert!(q <= p * (1.0 + 1e-9), "{p} {q}");
            }
            if let Some(q) = eval(&c, 2.0 * c.gamma_th) {
                prop_assert!(q >= p * (1.0 - 1e-9), "{p} {q}");
            }
            let more = SystemConfig { n_users: n + 1, ..c };
            if let Some(q) = eval(&more, c.gamma_th) {
                prop_assert!(q <= p * (1.0 + 1e-9), "{p} {q}");
            }
        }
    }

    #[test]
    fn df_outage_bounded_by_first_hop(t in turbulence(), db in 0.0f64..30.0, n in 1u32..5) {
        let c = SystemConfig::equal_snr(Scheme::KnownCsiDf, n, db_to_linear(db), 10.0, t).unwrap();
        let first = max_user_cdf(10.0, &c.rf(), n).unwrap();
        prop_assert!(pout_df(&c, 10.0).unwrap() >= first * (1.0 - 1e-9));
    }

    #[test]
    fn df_forms_agree(t in turbulence(), db in 0.0f64..30.0, n in 1u32..5) {
        let c = SystemConfig::equal_snr(Scheme::KnownCsiDf, n, db_to_linear(db), 10.0, t).unwrap();
        let a = pout_df(&c, 10.0).unwrap();
        let b = pout_df_expanded(&c, 10.0).unwrap();
        prop_assert!((a - b.value).abs() <= 1e-8 * a + b.error_bound, "{a} {b:?}");
    }

    #[test]
    fn single_precision_never_returns_unchecked_values(t in turbulence(), db in 0.0f64..25.0, n in 1u32..4) {
        // Large ξ² can push the certified bound past the f32 contract; the
        // evaluation must then fail rather than return the value.
        let c = SystemConfig::equal_snr(Scheme::UnknownCsiAf, n, db_to_linear(db), 10.0, t).unwrap();
        let t32 = TurbulenceParamsF32::new(t.alpha as f32, t.beta as f32, t.xi as f32).unwrap();
        let c32 = SystemConfigF32::equal_snr(Scheme::UnknownCsiAf, n, db_to_linear(db as f32), 10.0, t32).unwrap();
        if let Ok(b) = pout_af(&c32, 10.0) {
            let a = pout_af(&c, 10.0).unwrap();
            prop_assert!(rel(b as f64, a) < 1e-3, "{a} {b}");
        }
    }

    #[test]
    fn single_precision_strong_regime(db in 0.0f64..30.0, n in 1u32..5) {
        let c = SystemConfig::equal_snr(Scheme::KnownCsiDf, n, db_to_linear(db), 10.0, TurbulenceParams::strong()).unwrap();
        let c32 = SystemConfigF32::equal_snr(Scheme::KnownCsiDf, n, db_to_linear(db as f32), 10.0, TurbulenceParamsF32::strong()).unwrap();
        let a = pout(&c, 10.0).unwrap();
        let b = pout(&c32, 10.0).unwrap() as f64;
        prop_assert!(rel(b, a) < 1e-4, "{a} {b}");
        // The AF branch sums cancel; f32 may refuse but must not drift.
        let c = SystemConfig { scheme: Scheme::UnknownCsiAf, ..c };
        let c32 = SystemConfigF32 { scheme: Scheme::UnknownCsiAf, ..c32 };
        match pout(&c32, 10.0) {
            Ok(b) => prop_assert!(rel(b as f64, pout(&c, 10.0).unwrap()) < 1e-3),
            Err(e) => prop_assert!(e.is_numerical(), "{e}"),
        }
    }

    #[test]
    fn db_round_trip(db in -100.0f64..100.0) {
        prop_assert!((linear_to_db(db_to_linear(db)) - db).abs() < 1e-12);
    }
}
