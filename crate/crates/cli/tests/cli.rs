use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn fsorf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fsorf")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn config(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// CSV data rows, without comments and header.
fn data_rows(csv: &[u8]) -> Vec<String> {
    String::from_utf8_lossy(csv).lines().filter(|l| !l.starts_with('#')).skip(1).map(str::to_owned).collect()
}

#[test]
fn single_point_has_one_row_per_metric() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "a.toml", "scheme = \"df\"\nn_users = 2\ngamma_th_db = 10\nsweep_values = [15]\n");
    let o = fsorf(&["analytic", s(&cfg)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = data_rows(&o.stdout);
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("df,2,") && rows[0].contains(",outage,"));
    assert!(rows[1].contains(",ber,"));
}

#[test]
fn output_file_gets_metadata_sidecar() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "a.toml", "scheme = \"af\"\nn_users = 1\ngamma_th_db = 10\nsweep_values = [0, 10]\nseed = 5\n");
    let out = dir.path().join("r.csv");
    assert_eq!(code(&fsorf(&["analytic", s(&cfg), "--out", s(&out)])), 0);
    assert_eq!(data_rows(&std::fs::read(&out).unwrap()).len(), 4);
    let meta: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("r.csv.meta.json")).unwrap()).unwrap();
    assert!(meta.to_string().contains("\"seed\":5"), "{meta}");
}

#[test]
fn reruns_are_byte_identical_across_workers() {
    let dir = TempDir::new().unwrap();
    let cfg = config(
        &dir,
        "s.toml",
        "scheme = [\"df\", \"af\"]\nn_users = [1, 2]\ngamma_th_db = 10\nsweep_values = [5, 20]\ntrials = 50000\nseed = 3\n",
    );
    let one = fsorf(&["simulate", s(&cfg), "--workers", "1"]);
    let again = fsorf(&["simulate", s(&cfg), "--workers", "1"]);
    let four = fsorf(&["simulate", s(&cfg), "--workers", "4"]);
    assert_eq!(code(&one), 0, "{}", stderr(&one));
    assert_eq!(one.stdout, again.stdout);
    assert_eq!(one.stdout, four.stdout);
    let other = fsorf(&["simulate", s(&cfg), "--workers", "1", "--seed", "4"]);
    assert_ne!(one.stdout, other.stdout);
}

#[test]
fn bad_input_exits_with_code_one() {
    let dir = TempDir::new().unwrap();
    let o = fsorf(&["analytic", s(&dir.path().join("missing.toml"))]);
    assert_eq!(code(&o), 1);

    let cfg = config(&dir, "u.toml", "scheme = \"df\"\nn_users = 1\ngamma_th_db = 10\nsweep_values = [0]\nspeed = 3\n");
    let o = fsorf(&["analytic", s(&cfg)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("speed"), "{}", stderr(&o));

    let cfg = config(&dir, "n.toml", "scheme = \"df\"\nn_users = 1\ngamma_th_linear = -1\nsweep_values = [0]\n");
    assert_eq!(code(&fsorf(&["analytic", s(&cfg)])), 1);

    assert_eq!(code(&fsorf(&["figure", "fig9", "--out", s(dir.path())])), 1);
    assert_eq!(code(&fsorf(&["frobnicate"])), 1);
    assert_eq!(code(&fsorf(&["analytic", s(&cfg), "--workers", "0"])), 1);
    assert_eq!(code(&fsorf(&["--help"])), 0);
}

#[test]
fn verify_passes_and_writes_report() {
    let dir = TempDir::new().unwrap();
    let cfg = config(
        &dir,
        "v.toml",
        "scheme = [\"df\", \"af\"]\nn_users = 2\nturbulence = \"strong\"\ngamma_th_db = 10\nsweep_values = [0, 10]\ntrials = 200000\nseed = 11\n",
    );
    let out = dir.path().join("v.csv");
    let o = fsorf(&["verify", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("verify PASS"));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("v.csv.verify.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["checks"].as_array().unwrap().len(), 8);
    assert!(report["form_checks"].as_array().unwrap().iter().all(|f| f["pass"] == true));
}

#[test]
fn corrupted_analytic_value_fails_verification() {
    let dir = TempDir::new().unwrap();
    let cfg = config(
        &dir,
        "v.toml",
        "scheme = \"df\"\nn_users = 1\ngamma_th_db = 10\nsweep_values = [5]\nmetrics = [\"outage\"]\ntrials = 100000\n",
    );
    // One check, so the 2% allowance is zero.
    let o = fsorf(&["verify", s(&cfg), "--corrupt-row", "0"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("FAIL row 0: df N=1"), "{}", stderr(&o));
}

#[test]
fn empty_outage_count_uses_rule_of_three() {
    let dir = TempDir::new().unwrap();
    let cfg = config(
        &dir,
        "z.toml",
        "scheme = \"df\"\nn_users = 4\ngamma_th_db = 10\nsweep_values = [50]\nmetrics = [\"outage\"]\ntrials = 10000\n",
    );
    let out = dir.path().join("z.csv");
    let o = fsorf(&["verify", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("z.csv.verify.json")).unwrap()).unwrap();
    let check = &report["checks"][0];
    assert_eq!(check["sim"], 0.0);
    assert_eq!(check["degenerate"], true);
    assert!((check["tolerance"].as_f64().unwrap() - 3e-4).abs() < 1e-12);
}

#[test]
fn numerical_failure_exits_with_code_three() {
    let dir = TempDir::new().unwrap();
    // 64 users: the alternating sums cancel past the accuracy contract.
    let cfg = config(
        &dir,
        "f.toml",
        "scheme = \"af\"\nn_users = 64\ngamma_th_db = 10\nsweep_values = [0]\nmetrics = [\"ber\"]\n",
    );
    let o = fsorf(&["analytic", s(&cfg)]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let rows = data_rows(&o.stdout);
    assert_eq!(rows.len(), 1);
    assert!(rows[0].contains(",ber,,") && rows[0].contains("non-convergence"), "{}", rows[0]);
}

#[test]
fn figure_writes_table_and_curves() {
    let dir = TempDir::new().unwrap();
    let o = fsorf(&["figure", "fig2", "--out", s(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("df: strong minus moderate at outage 1e-2"), "{stdout}");
    let csv = std::fs::read(dir.path().join("fig2.csv")).unwrap();
    assert_eq!(data_rows(&csv).len(), 4 * 31);
    assert!(dir.path().join("fig2.csv.meta.json").exists());
    let curve = std::fs::read_to_string(dir.path().join("fig2_af_strong_n2_outage.dat")).unwrap();
    assert_eq!(curve.lines().filter(|l| !l.starts_with('#')).count(), 31);
}
