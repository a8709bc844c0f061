//! Read-offs from analytic curves: the SNR at a target outage and the BER
//! crossover of two schemes.

use fsorf_core::analytic::{ber, pout};
use fsorf_core::units::db_to_linear;
use fsorf_core::{Result, Scheme, SystemConfig, TurbulenceParams};

/// Bracket searched for read-offs, in dB.
pub const SEARCH_DB: (f64, f64) = (-10.0, 50.0);
const BISECTIONS: usize = 200;

fn at_db(base: &SystemConfig, db: f64) -> SystemConfig {
    let mut c = *base;
    c.mean_snr_rf = db_to_linear(db);
    c.mean_snr_fso = c.mean_snr_rf;
    c
}

/// Root of `f` on `[lo, hi]` by bisection, or `None` without a sign change.
fn bisect(mut f: impl FnMut(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<Option<f64>> {
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if flo == 0.0 {
        return Ok(Some(lo));
    }
    if !(flo.signum() != fhi.signum()) {
        return Ok(None);
    }
    for _ in 0..BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid)?;
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Average SNR (dB, equal on all links) at which the outage of `base` falls to `target`.
pub fn snr_at_outage(base: &SystemConfig, target: f64) -> Result<Option<f64>> {
    let lt = target.ln();
    bisect(|db| Ok(pout(&at_db(base, db), base.gamma_th)?.ln() - lt), SEARCH_DB.0, SEARCH_DB.1)
}

/// Horizontal gap (dB) between the strong- and moderate-turbulence outage curves at `target`.
pub fn regime_gap(scheme: Scheme, n_users: u32, gamma_th: f64, target: f64) -> Result<Option<f64>> {
    let m = SystemConfig::equal_snr(scheme, n_users, 1.0, gamma_th, TurbulenceParams::moderate())?;
    let s = SystemConfig::equal_snr(scheme, n_users, 1.0, gamma_th, TurbulenceParams::strong())?;
    Ok(snr_at_outage(&s, target)?.zip(snr_at_outage(&m, target)?).map(|(a, b)| a - b))
}

/// Where the DF and AF error rates of otherwise equal systems cross.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossover {
    pub gamma_avg_db: f64,
    /// DF has the lower error rate just below the crossing.
    pub df_better_below: bool,
}

/// First crossing of the DF and AF BER curves of `base` inside `[lo_db, hi_db]`.
pub fn ber_crossover(base: &SystemConfig, lo_db: f64, hi_db: f64) -> Result<Option<Crossover>> {
    let df = base.with_scheme(Scheme::KnownCsiDf);
    let af = base.with_scheme(Scheme::UnknownCsiAf);
    let log_ratio = |db: f64| -> Result<f64> { Ok(ber(&at_db(&af, db))?.ln() - ber(&at_db(&df, db))?.ln()) };
    let Some(x) = bisect(log_ratio, lo_db, hi_db)? else {
        return Ok(None);
    };
    Ok(Some(Crossover { gamma_avg_db: x, df_better_below: log_ratio(lo_db)? > 0.0 }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snr_read_off_inverts_pout() {
        let c = SystemConfig::equal_snr(Scheme::KnownCsiDf, 2, 1.0, 10.0, TurbulenceParams::moderate()).unwrap();
        let db = snr_at_outage(&c, 1e-2).unwrap().unwrap();
        let p = pout(&at_db(&c, db), 10.0).unwrap();
        assert!((p / 1e-2 - 1.0).abs() < 1e-9, "{p}");
    }

    #[test]
    fn no_root_without_sign_change() {
        assert_eq!(bisect(|x| Ok(x * x + 1.0), -1.0, 1.0).unwrap(), None);
        let r = bisect(|x| Ok(x - 0.3), 0.0, 1.0).unwrap().unwrap();
        assert!((r - 0.3).abs() < 1e-12);
    }
}
