use fsorf_core::analytic::{cdf_af_fso_branch, cdf_af_rf_branch, pout};
use fsorf_core::channels::{fso_snr_cdf, max_user_cdf, FsoSampler};
use fsorf_core::simulator::{empirical_hop_cdf, estimate_both, Hop, RunPlan};
use fsorf_core::units::db_to_linear;
use fsorf_core::{Scheme, SystemConfig, TurbulenceParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const DRAWS: u64 = 1_000_000;
/// Largest CDF gap allowed at 10^6 draws; the one-sided 99.9% DKW band is 0.00195.
const KS_LIMIT: f64 = 0.002;

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

fn sup_gap(empirical: &[f64], exact: impl Iterator<Item = f64>) -> f64 {
    empirical.iter().zip(exact).map(|(e, x)| (e - x).abs()).fold(0.0, f64::max)
}

fn cfg(scheme: Scheme, n: u32, db: f64, t: TurbulenceParams) -> SystemConfig {
    SystemConfig::equal_snr(scheme, n, db_to_linear(db), 10.0, t).unwrap()
}

#[test]
fn access_point_matches_best_of_n() {
    for n in [1, 4] {
        let c = cfg(Scheme::KnownCsiDf, n, 10.0, TurbulenceParams::moderate());
        let grid = log_grid(0.01, 100.0, 60);
        let emp = empirical_hop_cdf(&c, Hop::AccessPoint, &grid, DRAWS, 11).unwrap();
        let d = sup_gap(&emp, grid.iter().map(|&g| max_user_cdf(g, &c.rf(), n).unwrap()));
        assert!(d <= KS_LIMIT, "N={n}: {d}");
    }
}

#[test]
fn fso_intensity_matches_cdf() {
    for t in [TurbulenceParams::moderate(), TurbulenceParams::strong()] {
        let s = FsoSampler::new(&t);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // γ = γ̄·I² with γ̄ = 1
        let mut draws: Vec<f64> = (0..DRAWS).map(|_| s.sample(&mut rng).powi(2)).collect();
        draws.sort_by(f64::total_cmp);
        let grid = log_grid(1e-3, 20.0, 60);
        let emp: Vec<f64> = grid.iter().map(|&g| draws.partition_point(|&x| x <= g) as f64 / DRAWS as f64).collect();
        let d = sup_gap(&emp, grid.iter().map(|&g| fso_snr_cdf(g, 1.0, &t).unwrap()));
        assert!(d <= KS_LIMIT, "{t:?}: {d}");
    }
}

#[test]
fn af_branches_match_closed_forms() {
    let c = cfg(Scheme::UnknownCsiAf, 2, 15.0, TurbulenceParams::strong());
    let grid = log_grid(0.1, 300.0, 40);
    let fso = empirical_hop_cdf(&c, Hop::FsoBranch, &grid, DRAWS, 3).unwrap();
    let d = sup_gap(&fso, grid.iter().map(|&g| cdf_af_fso_branch(g, &c).unwrap()));
    assert!(d <= KS_LIMIT, "FSO branch: {d}");
    let rf = empirical_hop_cdf(&c, Hop::RfBranch, &grid, DRAWS, 4).unwrap();
    let d = sup_gap(&rf, grid.iter().map(|&g| cdf_af_rf_branch(g, &c).unwrap()));
    assert!(d <= KS_LIMIT, "RF branch: {d}");
}

#[test]
fn end_to_end_cdf_matches_outage_curve() {
    for scheme in [Scheme::KnownCsiDf, Scheme::UnknownCsiAf] {
        let c = cfg(scheme, 2, 15.0, TurbulenceParams::moderate());
        let grid = log_grid(0.1, 200.0, 30);
        let emp = empirical_hop_cdf(&c, Hop::EndToEnd, &grid, DRAWS, 9).unwrap();
        let d = sup_gap(&emp, grid.iter().map(|&g| pout(&c, g).unwrap()));
        assert!(d <= KS_LIMIT, "{scheme:?}: {d}");
    }
}

#[test]
fn rerun_is_bit_identical() {
    let c = cfg(Scheme::UnknownCsiAf, 2, 20.0, TurbulenceParams::strong());
    let plan = RunPlan::with_batch_size(c, 200_000, 42, 10_000).unwrap();
    let (o1, b1) = estimate_both(&plan);
    let (o2, b2) = estimate_both(&plan);
    assert_eq!(o1.value.to_bits(), o2.value.to_bits());
    assert_eq!(b1.value.to_bits(), b2.value.to_bits());
    assert_eq!(b1.stderr.to_bits(), b2.stderr.to_bits());
    let other = RunPlan { seed: 43, ..plan };
    assert_ne!(estimate_both(&other).1.value, b1.value);
}

#[test]
fn unsorted_grid_is_rejected() {
    let c = cfg(Scheme::KnownCsiDf, 1, 10.0, TurbulenceParams::moderate());
    assert!(empirical_hop_cdf(&c, Hop::AccessPoint, &[2.0, 1.0], 10_000, 0).is_err());
}
