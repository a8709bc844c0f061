use fsorf_core::analytic::{ber, pout};
use fsorf_core::simulator::{estimate_both, EstimateCI, RunPlan};
use fsorf_core::units::linear_to_db;
use fsorf_core::SystemConfig;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Metric, SweepSpec, SweepVariable};

/// One output line: one metric of one curve at one sweep value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub scheme: &'static str,
    pub n_users: u32,
    pub alpha: f64,
    pub beta: f64,
    pub xi: f64,
    pub kappa: f64,
    pub gamma_th_db: f64,
    pub gamma_avg_db: f64,
    pub metric: Metric,
    pub analytic_value: Option<f64>,
    pub sim_value: Option<f64>,
    pub sim_stderr: Option<f64>,
    pub trials: Option<u64>,
    /// Set when the cell could not be evaluated.
    pub error: Option<String>,
}

impl SweepRow {
    /// The simulated value as an estimate, if present.
    pub fn estimate(&self) -> Option<EstimateCI> {
        Some(EstimateCI { value: self.sim_value?, stderr: self.sim_stderr?, trials: self.trials? })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    /// Ordered by curve, then sweep value, then metric.
    pub rows: Vec<SweepRow>,
    /// Number of cells (curve × sweep value) with an evaluation error.
    pub failed_cells: usize,
}

/// Seed of cell `index`, decorrelated from neighbouring cells and from the run seed.
pub fn cell_seed(seed: u64, index: u64) -> u64 {
    // SplitMix64 finalizer over the pair.
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct CellResult {
    analytic: Vec<Result<f64, String>>,
    sim: Option<(EstimateCI, EstimateCI)>,
}

fn evaluate(spec: &SweepSpec, cfg: &SystemConfig, index: u64) -> CellResult {
    let analytic = if spec.mode.analytic() {
        spec.metrics
            .iter()
            .map(|m| {
                match m {
                    Metric::Outage => pout(cfg, cfg.gamma_th),
                    Metric::Ber => ber(cfg),
                }
                .map_err(|e| e.to_string())
            })
            .collect()
    } else {
        Vec::new()
    };
    let sim = spec.mode.simulate().then(|| {
        let plan = RunPlan::new(*cfg, spec.trials, cell_seed(spec.seed, index)).expect("validated spec");
        estimate_both(&plan)
    });
    CellResult { analytic, sim }
}

/// Evaluates every cell of `spec`. Cells run concurrently on the current rayon
/// pool; the result depends only on the spec.
pub fn run_sweep(spec: &SweepSpec) -> SweepOutput {
    let nv = spec.sweep_values.len();
    let cells: Vec<(usize, usize)> = (0..spec.curves.len()).flat_map(|c| (0..nv).map(move |v| (c, v))).collect();
    let results: Vec<CellResult> = cells
        .par_iter()
        .enumerate()
        .map(|(i, &(c, v))| evaluate(spec, &spec.point(&spec.curves[c], spec.sweep_values[v]), i as u64))
        .collect();

    let mut rows = Vec::with_capacity(cells.len() * spec.metrics.len());
    let mut failed_cells = 0;
    for (&(c, v), res) in cells.iter().zip(results) {
        let cfg = spec.point(&spec.curves[c], spec.sweep_values[v]);
        let value = spec.sweep_values[v];
        let t = cfg.turbulence;
        let mut cell_failed = false;
        for (k, &metric) in spec.metrics.iter().enumerate() {
            let (analytic_value, error) = match res.analytic.get(k) {
                Some(Ok(x)) => (Some(*x), None),
                Some(Err(e)) => {
                    cell_failed = true;
                    (None, Some(e.clone()))
                }
                None => (None, None),
            };
            let est = res.sim.map(|(o, b)| if metric == Metric::Outage { o } else { b });
            rows.push(SweepRow {
                scheme: cfg.scheme.label(),
                n_users: cfg.n_users,
                alpha: t.alpha,
                beta: t.beta,
                xi: t.xi,
                kappa: t.kappa,
                gamma_th_db: if spec.sweep_variable == SweepVariable::GammaThDb { value } else { linear_to_db(cfg.gamma_th) },
                gamma_avg_db: if spec.sweep_variable == SweepVariable::GammaAvgDb {
                    value
                } else {
                    linear_to_db(cfg.mean_snr_rf)
                },
                metric,
                analytic_value,
                sim_value: est.map(|e| e.value),
                sim_stderr: est.map(|e| e.stderr),
                trials: est.map(|e| e.trials),
                error,
            });
        }
        failed_cells += cell_failed as usize;
    }
    SweepOutput { rows, failed_cells }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config_str;

    #[test]
    fn analytic_single_point() {
        let s = parse_config_str("scheme = \"df\"\nn_users = 2\ngamma_th_db = 10\nsweep_values = [10]\n").unwrap();
        let out = run_sweep(&s);
        assert_eq!(out.rows.len(), 2);
        assert!(out.rows.iter().all(|r| r.analytic_value.is_some() && r.sim_value.is_none() && r.trials.is_none()));
        assert_eq!(out.rows[0].metric, Metric::Outage);
        assert_eq!(out.failed_cells, 0);
    }

    #[test]
    fn row_order() {
        let s = parse_config_str(
            "scheme = [\"df\", \"af\"]\nn_users = 1\ngamma_th_db = 10\nsweep_values = [0, 5]\nmetrics = [\"ber\", \"outage\"]\n",
        )
        .unwrap();
        let r = run_sweep(&s).rows;
        let key: Vec<_> = r.iter().map(|r| (r.scheme, r.gamma_avg_db, r.metric.label())).collect();
        assert_eq!(
            key,
            vec![
                ("df", 0.0, "outage"),
                ("df", 0.0, "ber"),
                ("df", 5.0, "outage"),
                ("df", 5.0, "ber"),
                ("af", 0.0, "outage"),
                ("af", 0.0, "ber"),
                ("af", 5.0, "outage"),
                ("af", 5.0, "ber"),
            ]
        );
    }

    #[test]
    fn cell_seeds_distinct() {
        let mut s: Vec<u64> = (0..1000).map(|i| cell_seed(0, i)).collect();
        s.sort();
        s.dedup();
        assert_eq!(s.len(), 1000);
        assert_ne!(cell_seed(0, 0), cell_seed(1, 0));
    }
}
