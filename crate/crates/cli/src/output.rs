//! CSV, metadata sidecar and plot data files.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::SweepSpec;
use crate::sweep::SweepRow;

pub const SCHEMA: &str = "fsorf-sweep/1";

pub const HEADER: [&str; 14] = [
    "scheme",
    "n_users",
    "alpha",
    "beta",
    "xi",
    "kappa",
    "gamma_th_db",
    "gamma_avg_db",
    "metric",
    "analytic_value",
    "sim_value",
    "sim_stderr",
    "trials",
    "error",
];

/// Shortest round-trip scientific form; independent of locale.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

pub fn render_csv(spec: &SweepSpec, rows: &[SweepRow]) -> Vec<u8> {
    let mut buf = Vec::new();
    writeln!(buf, "# schema={SCHEMA}").unwrap();
    if let Some(note) = &spec.note {
        writeln!(buf, "# {note}").unwrap();
    }
    let mut w = csv::Writer::from_writer(buf);
    w.write_record(HEADER).unwrap();
    for r in rows {
        w.write_record([
            r.scheme.to_string(),
            r.n_users.to_string(),
            fmt_f64(r.alpha),
            fmt_f64(r.beta),
            fmt_f64(r.xi),
            fmt_f64(r.kappa),
            fmt_f64(r.gamma_th_db),
            fmt_f64(r.gamma_avg_db),
            r.metric.label().to_string(),
            opt(r.analytic_value, fmt_f64),
            opt(r.sim_value, fmt_f64),
            opt(r.sim_stderr, fmt_f64),
            opt(r.trials, |t| t.to_string()),
            r.error.clone().unwrap_or_default(),
        ])
        .unwrap();
    }
    w.into_inner().expect("in-memory writer")
}

#[derive(Serialize)]
struct Meta<'a> {
    schema: &'a str,
    tool: &'a str,
    version: &'a str,
    seed: u64,
    trials: u64,
    spec: &'a SweepSpec,
}

pub fn render_meta(spec: &SweepSpec) -> Vec<u8> {
    let meta = Meta {
        schema: SCHEMA,
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        seed: spec.seed,
        trials: spec.trials,
        spec,
    };
    let mut v = serde_json::to_vec_pretty(&meta).expect("serializable");
    v.push(b'\n');
    v
}

/// `<path>` with `suffix` appended to the file name.
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}

/// Writes through a temporary file in the target directory and renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Writes the CSV and its `.meta.json` sidecar.
pub fn write_sweep(path: &Path, spec: &SweepSpec, rows: &[SweepRow]) -> std::io::Result<()> {
    write_atomic(path, &render_csv(spec, rows))?;
    write_atomic(&sidecar(path, ".meta.json"), &render_meta(spec))
}

/// Whitespace-separated columns for one curve and metric, readable by gnuplot:
/// `gamma_avg_db analytic [sim stderr]`, blank fields written as `NaN`.
pub fn render_curve(rows: &[&SweepRow]) -> Vec<u8> {
    let mut buf = Vec::new();
    let has_sim = rows.iter().any(|r| r.sim_value.is_some());
    if has_sim {
        writeln!(buf, "# gamma_avg_db analytic sim sim_stderr").unwrap();
    } else {
        writeln!(buf, "# gamma_avg_db analytic").unwrap();
    }
    let f = |v: Option<f64>| v.map(fmt_f64).unwrap_or_else(|| "NaN".into());
    for r in rows {
        write!(buf, "{} {}", fmt_f64(r.gamma_avg_db), f(r.analytic_value)).unwrap();
        if has_sim {
            write!(buf, " {} {}", f(r.sim_value), f(r.sim_stderr)).unwrap();
        }
        writeln!(buf).unwrap();
    }
    buf
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, 3.8334415143e-10, 5.0, 1e-300, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(5.0), "5e0");
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(sidecar(Path::new("a/b.csv"), ".meta.json"), PathBuf::from("a/b.csv.meta.json"));
    }
}
