//! Sweeps behind Figures 2 to 5.

use std::str::FromStr;

use fsorf_core::{Scheme, SystemConfig, TurbulenceParams};

use crate::config::{Metric, Mode, SweepSpec, SweepVariable, DEFAULT_TRIALS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl FromStr for Figure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fig2" => Ok(Figure::Fig2),
            "fig3" => Ok(Figure::Fig3),
            "fig4" => Ok(Figure::Fig4),
            "fig5" => Ok(Figure::Fig5),
            _ => Err(format!("unknown figure \"{s}\"; expected fig2, fig3, fig4 or fig5")),
        }
    }
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
        }
    }
}

pub const GAMMA_TH_DB: f64 = 10.0;
/// User counts for the "various number of users" figures.
pub const USER_SET: [u32; 3] = [1, 2, 4];

pub fn regime_name(t: &TurbulenceParams) -> String {
    let k = t.with_kappa(1.0).expect("unit kappa");
    if k == TurbulenceParams::moderate() {
        "moderate".into()
    } else if k == TurbulenceParams::strong() {
        "strong".into()
    } else {
        format!("a{}_b{}_xi{}", t.alpha, t.beta, t.xi)
    }
}

/// γ_avg grid 0..=30 dB in 1 dB steps.
pub fn default_grid() -> Vec<f64> {
    (0..=30).map(f64::from).collect()
}

pub fn figure_preset(fig: Figure) -> SweepSpec {
    let (regimes, users, metric): (Vec<TurbulenceParams>, &[u32], Metric) = match fig {
        Figure::Fig2 => (vec![TurbulenceParams::moderate(), TurbulenceParams::strong()], &[2], Metric::Outage),
        Figure::Fig3 => (vec![TurbulenceParams::moderate()], &USER_SET, Metric::Outage),
        Figure::Fig4 => (vec![TurbulenceParams::moderate()], &USER_SET, Metric::Ber),
        Figure::Fig5 => (vec![TurbulenceParams::moderate(), TurbulenceParams::strong()], &[2], Metric::Ber),
    };
    let gamma_th = 10f64.powf(GAMMA_TH_DB / 10.0);
    let mut curves = Vec::new();
    for scheme in [Scheme::KnownCsiDf, Scheme::UnknownCsiAf] {
        for t in &regimes {
            for &n in users {
                curves.push(SystemConfig::equal_snr(scheme, n, 1.0, gamma_th, *t).expect("valid preset"));
            }
        }
    }
    let note = matches!(fig, Figure::Fig3 | Figure::Fig4)
        .then(|| format!("preset={} n_users={{1,2,4}} is a preset choice; the figure does not list its user counts", fig.name()))
        .or_else(|| Some(format!("preset={}", fig.name())));
    SweepSpec {
        curves,
        sweep_variable: SweepVariable::GammaAvgDb,
        sweep_values: default_grid(),
        metrics: vec![metric],
        mode: Mode::Analytic,
        trials: DEFAULT_TRIALS,
        seed: 0,
        output_path: None,
        note,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_shapes() {
        let f2 = figure_preset(Figure::Fig2);
        assert_eq!(f2.curves.len(), 4);
        assert_eq!(f2.metrics, vec![Metric::Outage]);
        assert!(f2.curves.iter().all(|c| c.n_users == 2 && (c.gamma_th - 10.0).abs() < 1e-12));
        let f3 = figure_preset(Figure::Fig3);
        assert_eq!(f3.curves.len(), 6);
        assert!(f3.curves.iter().all(|c| c.turbulence == TurbulenceParams::moderate()));
        assert!(f3.note.as_deref().unwrap().contains("n_users={1,2,4}"));
        let f5 = figure_preset(Figure::Fig5);
        assert_eq!(f5.metrics, vec![Metric::Ber]);
        assert_eq!(f5.curves.len(), 4);
        for f in [Figure::Fig2, Figure::Fig3, Figure::Fig4, Figure::Fig5] {
            figure_preset(f).validate().unwrap();
            assert!(figure_preset(f).curves.iter().all(|c| c.eta == 1.0 && c.c_const == 1.0));
        }
        assert!("fig9".parse::<Figure>().is_err());
    }
}
