//! Closed form against Monte Carlo, cell by cell.

use std::fmt::Write;

use fsorf_core::analytic::{pout_af, pout_af_expanded, pout_df, pout_df_expanded};
use fsorf_core::Scheme;
use serde::Serialize;

use crate::config::{Metric, Mode, SweepSpec};
use crate::sweep::{run_sweep, SweepOutput, SweepRow};

/// Accepted relative gap between the compact and expanded outage forms, on top
/// of the expanded form's own rounding bound.
pub const FORM_TOLERANCE: f64 = 1e-8;

/// Share of checks allowed to exceed the tolerance before the gate fails.
pub const ALLOWED_FAILURE_SHARE: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Accepted distance in standard errors.
    pub stderr_mult: f64,
    /// Test hook: doubles the analytic value of this row before checking.
    pub corrupt_row: Option<usize>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { stderr_mult: 3.0, corrupt_row: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellCheck {
    pub row: usize,
    pub label: String,
    pub analytic: Option<f64>,
    pub sim: Option<f64>,
    pub stderr: Option<f64>,
    /// Accepted `|analytic − sim|`.
    pub tolerance: Option<f64>,
    /// Uses the `3/trials` bound for an outage count of 0 or `trials`.
    pub degenerate: bool,
    pub pass: bool,
}

/// Compact against binomial-expanded outage at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormCheck {
    pub label: String,
    pub compact: Option<f64>,
    pub expanded: Option<f64>,
    /// Rounding bound of the expanded form, which cancels at high SNR.
    pub expanded_bound: Option<f64>,
    pub relative_gap: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub stderr_mult: f64,
    pub checks: Vec<CellCheck>,
    pub failed: usize,
    pub allowed_failures: usize,
    /// Every one of these must pass; there is no statistical allowance.
    pub form_checks: Vec<FormCheck>,
    pub pass: bool,
}

fn label(r: &SweepRow) -> String {
    format!(
        "{} N={} alpha={} beta={} xi={} gamma_th={}dB gamma_avg={}dB {}",
        r.scheme,
        r.n_users,
        r.alpha,
        r.beta,
        r.xi,
        r.gamma_th_db,
        r.gamma_avg_db,
        r.metric.label()
    )
}

/// Checks every row that carries both values; rows with an evaluation error fail.
pub fn check_rows(rows: &[SweepRow], opts: &VerifyOptions) -> VerifyReport {
    let mut checks = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        let analytic = r.analytic_value.map(|a| if opts.corrupt_row == Some(i) { 2.0 * a } else { a });
        let est = r.estimate();
        let degenerate = r.metric == Metric::Outage && est.is_some_and(|e| e.degenerate_bound().is_some());
        let tolerance = est.map(|e| {
            if r.metric == Metric::Outage {
                e.tolerance(opts.stderr_mult)
            } else {
                opts.stderr_mult * e.stderr
            }
        });
        let pass = match (analytic, est, tolerance) {
            (Some(a), Some(e), Some(t)) => r.error.is_none() && (a - e.value).abs() <= t,
            _ => false,
        };
        checks.push(CellCheck {
            row: i,
            label: label(r),
            analytic,
            sim: r.sim_value,
            stderr: r.sim_stderr,
            tolerance,
            degenerate,
            pass,
        });
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    let allowed_failures = (ALLOWED_FAILURE_SHARE * checks.len() as f64).floor() as usize;
    VerifyReport {
        stderr_mult: opts.stderr_mult,
        checks,
        failed,
        allowed_failures,
        form_checks: Vec::new(),
        pass: failed <= allowed_failures,
    }
}

/// Compact and expanded outage forms at every point of `spec`.
pub fn check_forms(spec: &SweepSpec) -> Vec<FormCheck> {
    let mut out = Vec::new();
    for c in &spec.curves {
        for &v in &spec.sweep_values {
            let cfg = spec.point(c, v);
            let (a, b) = match cfg.scheme {
                Scheme::KnownCsiDf => (pout_df(&cfg, cfg.gamma_th), pout_df_expanded(&cfg, cfg.gamma_th)),
                Scheme::UnknownCsiAf => (pout_af(&cfg, cfg.gamma_th), pout_af_expanded(&cfg, cfg.gamma_th)),
            };
            let (compact, expanded) = (a.ok(), b.ok());
            let relative_gap = compact.zip(expanded).map(|(a, b)| if a == b.value { 0.0 } else { (a - b.value).abs() / a.abs().max(b.value.abs()) });
            let pass = compact
                .zip(expanded)
                .is_some_and(|(a, b)| (a - b.value).abs() <= FORM_TOLERANCE * a.abs() + b.error_bound);
            out.push(FormCheck {
                label: format!(
                    "{} N={} xi={} {}={}",
                    cfg.scheme.label(),
                    cfg.n_users,
                    cfg.turbulence.xi,
                    spec.sweep_variable.key(),
                    v
                ),
                compact,
                expanded: expanded.map(|e| e.value),
                expanded_bound: expanded.map(|e| e.error_bound),
                relative_gap,
                pass,
            });
        }
    }
    out
}

/// Runs `spec` in `Both` mode and checks it.
pub fn verify(spec: &SweepSpec, opts: &VerifyOptions) -> (SweepOutput, VerifyReport) {
    let mut s = spec.clone();
    s.mode = Mode::Both;
    let out = run_sweep(&s);
    let mut report = check_rows(&out.rows, opts);
    report.form_checks = check_forms(&s);
    report.pass &= report.form_checks.iter().all(|f| f.pass);
    (out, report)
}

impl VerifyReport {
    /// One line per failing check, then a summary line.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in self.checks.iter().filter(|c| !c.pass) {
            let f = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_else(|| "-".into());
            writeln!(
                s,
                "FAIL row {}: {}: analytic={} sim={} stderr={} tolerance={}",
                c.row,
                c.label,
                f(c.analytic),
                f(c.sim),
                f(c.stderr),
                f(c.tolerance)
            )
            .unwrap();
        }
        for f in self.form_checks.iter().filter(|f| !f.pass) {
            writeln!(s, "FAIL form {}: compact={:?} expanded={:?}", f.label, f.compact, f.expanded).unwrap();
        }
        if !self.form_checks.is_empty() {
            let bad = self.form_checks.iter().filter(|f| !f.pass).count();
            writeln!(s, "outage forms: {} of {} points disagree beyond {FORM_TOLERANCE:e} plus rounding bound", bad, self.form_checks.len()).unwrap();
        }
        writeln!(
            s,
            "verify {}: {} of {} checks outside {}σ (allowed {})",
            if self.pass { "PASS" } else { "FAIL" },
            self.failed,
            self.checks.len(),
            self.stderr_mult,
            self.allowed_failures
        )
        .unwrap();
        s
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut v = serde_json::to_vec_pretty(self).expect("serializable");
        v.push(b'\n');
        v
    }
}
