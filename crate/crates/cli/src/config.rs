//! Strict TOML scenario files.
//!
//! Every key is checked against a fixed schema; unknown keys are errors.
//! Quantities carry their unit in the key (`_db` or `_linear`).
//!
//! ```toml
//! scheme = ["df", "af"]              # or a single string
//! n_users = 2                        # or a list, one curve per entry
//! turbulence = ["moderate", "strong"] # names, or tables {alpha, beta, xi} / {rytov_variance, xi}
//! gamma_th_db = 10.0
//! sweep_variable = "gamma_avg_db"    # default; also "n_users", "gamma_th_db"
//! sweep_values = [0, 5, 10, 15, 20, 25, 30]
//! ```
//!
//! Optional keys and defaults: `kappa = 1`, `eta = 1`, `c_linear = 1`,
//! `metrics = ["outage", "ber"]`, `mode = "analytic"`, `trials = 1000000`,
//! `seed = 0`, `output`.

use std::fmt;
use std::path::{Path, PathBuf};

use fsorf_core::units::db_to_linear;
use fsorf_core::{Scheme, SystemConfig, TurbulenceParams};
use serde::Serialize;
use toml::{Table, Value};

/// Smallest trial count accepted for simulation.
pub const MIN_TRIALS: u64 = 10_000;
pub const DEFAULT_TRIALS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    GammaAvgDb,
    NUsers,
    GammaThDb,
}

impl SweepVariable {
    pub fn key(self) -> &'static str {
        match self {
            SweepVariable::GammaAvgDb => "gamma_avg_db",
            SweepVariable::NUsers => "n_users",
            SweepVariable::GammaThDb => "gamma_th_db",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Outage,
    Ber,
}

impl Metric {
    pub fn label(self) -> &'static str {
        match self {
            Metric::Outage => "outage",
            Metric::Ber => "ber",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Analytic,
    Simulate,
    Both,
}

impl Mode {
    pub fn analytic(self) -> bool {
        self != Mode::Simulate
    }

    pub fn simulate(self) -> bool {
        self != Mode::Analytic
    }
}

/// A validated sweep: one curve per base configuration, each evaluated at
/// every sweep value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    /// Base configurations; the swept quantity is overwritten per point.
    pub curves: Vec<SystemConfig>,
    pub sweep_variable: SweepVariable,
    pub sweep_values: Vec<f64>,
    /// Sorted, without duplicates.
    pub metrics: Vec<Metric>,
    pub mode: Mode,
    pub trials: u64,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
    /// Free-text provenance of preset choices, echoed into the CSV header.
    pub note: Option<String>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.curves.is_empty() {
            return Err(ConfigError::at("scheme", "no curves to evaluate"));
        }
        if self.sweep_values.is_empty() {
            return Err(ConfigError::at("sweep_values", "must not be empty"));
        }
        if let Some(i) = self.sweep_values.windows(2).position(|w| !(w[0] < w[1])) {
            return Err(ConfigError::at(format!("sweep_values[{}]", i + 1), "values must be strictly increasing"));
        }
        if let Some(i) = self.sweep_values.iter().position(|v| !v.is_finite()) {
            return Err(ConfigError::at(format!("sweep_values[{i}]"), "must be finite"));
        }
        if self.sweep_variable == SweepVariable::NUsers {
            if let Some(i) = self.sweep_values.iter().position(|&v| v.fract() != 0.0 || !(1.0..=64.0).contains(&v)) {
                return Err(ConfigError::at(format!("sweep_values[{i}]"), "n_users values must be integers in 1..=64"));
            }
        }
        if self.metrics.is_empty() {
            return Err(ConfigError::at("metrics", "must not be empty"));
        }
        if self.mode.simulate() && self.trials < MIN_TRIALS {
            return Err(ConfigError::at("trials", format!("must be at least {MIN_TRIALS} when simulating")));
        }
        for c in &self.curves {
            for &v in &self.sweep_values {
                self.point(c, v).validate().map_err(|e| ConfigError::at(self.sweep_variable.key(), e.to_string()))?;
            }
        }
        Ok(())
    }

    /// The configuration of `curve` at sweep value `value`.
    pub fn point(&self, curve: &SystemConfig, value: f64) -> SystemConfig {
        let mut c = *curve;
        match self.sweep_variable {
            SweepVariable::GammaAvgDb => {
                let g = db_to_linear(value);
                c.mean_snr_rf = g;
                c.mean_snr_fso = g;
            }
            SweepVariable::NUsers => c.n_users = value as u32,
            SweepVariable::GammaThDb => c.gamma_th = db_to_linear(value),
        }
        c
    }
}

/// A schema violation, tagged with the key path it concerns.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn at(key: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { key: key.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.key.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "`{}`: {}", self.key, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

const TOP_KEYS: &[&str] = &[
    "scheme",
    "n_users",
    "turbulence",
    "kappa",
    "eta",
    "c_linear",
    "gamma_th_db",
    "gamma_th_linear",
    "gamma_avg_db",
    "gamma_avg_linear",
    "sweep_variable",
    "sweep_values",
    "metrics",
    "mode",
    "trials",
    "seed",
    "output",
];

pub fn parse_config(path: &Path) -> Result<SweepSpec, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::at("", format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<SweepSpec, ConfigError> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| ConfigError::at("", format!("invalid TOML: {e}")))?;
    for k in table.keys() {
        if !TOP_KEYS.contains(&k.as_str()) {
            return Err(ConfigError::at(k.clone(), "unknown key"));
        }
    }

    let sweep_variable = match opt_str(&table, "sweep_variable")?.as_deref() {
        None | Some("gamma_avg_db") => SweepVariable::GammaAvgDb,
        Some("n_users") => SweepVariable::NUsers,
        Some("gamma_th_db") => SweepVariable::GammaThDb,
        Some(other) => {
            return Err(ConfigError::at(
                "sweep_variable",
                format!("expected \"gamma_avg_db\", \"n_users\" or \"gamma_th_db\", got \"{other}\""),
            ))
        }
    };
    let sweep_values = match table.get("sweep_values") {
        None => return Err(ConfigError::at("sweep_values", "missing required key")),
        Some(v) => list(v, "sweep_values")?
            .iter()
            .enumerate()
            .map(|(i, x)| number(x, &format!("sweep_values[{i}]")))
            .collect::<Result<Vec<_>, _>>()?,
    };

    let schemes = match table.get("scheme") {
        None => return Err(ConfigError::at("scheme", "missing required key")),
        Some(v) => one_or_many(v, "scheme")?
            .into_iter()
            .map(|(k, x)| parse_scheme(x, &k))
            .collect::<Result<Vec<_>, _>>()?,
    };

    let n_users: Vec<u32> = match (table.get("n_users"), sweep_variable) {
        (Some(_), SweepVariable::NUsers) => {
            return Err(ConfigError::at("n_users", "must not be set when it is the sweep variable"))
        }
        (None, SweepVariable::NUsers) => vec![1],
        (None, _) => return Err(ConfigError::at("n_users", "missing required key")),
        (Some(v), _) => one_or_many(v, "n_users")?
            .into_iter()
            .map(|(k, x)| {
                let n = x.as_integer().ok_or_else(|| ConfigError::at(k.clone(), "expected an integer"))?;
                if !(1..=64).contains(&n) {
                    return Err(ConfigError::at(k, format!("must be in 1..=64, got {n}")));
                }
                Ok(n as u32)
            })
            .collect::<Result<_, _>>()?,
    };

    let kappa = opt_positive(&table, "kappa")?.unwrap_or(1.0);
    let turbulence: Vec<TurbulenceParams> = match table.get("turbulence") {
        None => vec![TurbulenceParams::moderate()],
        Some(v) => one_or_many(v, "turbulence")?
            .into_iter()
            .map(|(k, x)| parse_turbulence(x, &k))
            .collect::<Result<_, _>>()?,
    }
    .into_iter()
    .map(|t| t.with_kappa(kappa).map_err(|e| ConfigError::at("kappa", e.to_string())))
    .collect::<Result<_, _>>()?;

    let eta = opt_positive(&table, "eta")?.unwrap_or(1.0);
    let c_const = opt_positive(&table, "c_linear")?.unwrap_or(1.0);

    let gamma_th = unit_pair(&table, "gamma_th", sweep_variable == SweepVariable::GammaThDb)?.unwrap_or(1.0);
    let gamma_avg = unit_pair(&table, "gamma_avg", sweep_variable == SweepVariable::GammaAvgDb)?.unwrap_or(1.0);

    let metrics = match table.get("metrics") {
        None => vec![Metric::Outage, Metric::Ber],
        Some(v) => {
            let mut m = one_or_many(v, "metrics")?
                .into_iter()
                .map(|(k, x)| match x.as_str() {
                    Some("outage") => Ok(Metric::Outage),
                    Some("ber") => Ok(Metric::Ber),
                    _ => Err(ConfigError::at(k, "expected \"outage\" or \"ber\"")),
                })
                .collect::<Result<Vec<_>, _>>()?;
            m.sort();
            m.dedup();
            m
        }
    };
    let mode = match opt_str(&table, "mode")?.as_deref() {
        None | Some("analytic") => Mode::Analytic,
        Some("simulate") => Mode::Simulate,
        Some("both") => Mode::Both,
        Some(other) => {
            return Err(ConfigError::at("mode", format!("expected \"analytic\", \"simulate\" or \"both\", got \"{other}\"")))
        }
    };
    let trials = opt_u64(&table, "trials")?.unwrap_or(DEFAULT_TRIALS);
    if trials == 0 {
        return Err(ConfigError::at("trials", "must be positive"));
    }
    let seed = opt_u64(&table, "seed")?.unwrap_or(0);
    let output_path = opt_str(&table, "output")?.map(PathBuf::from);

    let mut curves = Vec::new();
    for &scheme in &schemes {
        for t in &turbulence {
            for &n in &n_users {
                curves.push(SystemConfig {
                    scheme,
                    n_users: n,
                    mean_snr_rf: gamma_avg,
                    mean_snr_fso: gamma_avg,
                    eta,
                    c_const,
                    gamma_th,
                    turbulence: *t,
                });
            }
        }
    }
    let spec = SweepSpec { curves, sweep_variable, sweep_values, metrics, mode, trials, seed, output_path, note: None };
    spec.validate()?;
    Ok(spec)
}

fn type_name(v: &Value) -> &'static str {
    v.type_str()
}

fn list<'a>(v: &'a Value, key: &str) -> Result<&'a Vec<Value>, ConfigError> {
    v.as_array().ok_or_else(|| ConfigError::at(key, format!("expected an array, got {}", type_name(v))))
}

/// A scalar or an array, with the key path of each element.
fn one_or_many<'a>(v: &'a Value, key: &str) -> Result<Vec<(String, &'a Value)>, ConfigError> {
    match v {
        Value::Array(a) => {
            if a.is_empty() {
                return Err(ConfigError::at(key, "must not be empty"));
            }
            Ok(a.iter().enumerate().map(|(i, x)| (format!("{key}[{i}]"), x)).collect())
        }
        _ => Ok(vec![(key.to_string(), v)]),
    }
}

fn number(v: &Value, key: &str) -> Result<f64, ConfigError> {
    match v {
        Value::Float(f) if f.is_finite() => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(ConfigError::at(key, format!("expected a finite number, got {}", type_name(v)))),
    }
}

fn positive(v: &Value, key: &str) -> Result<f64, ConfigError> {
    let x = number(v, key)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(ConfigError::at(key, format!("must be positive, got {x}")))
    }
}

fn opt_positive(t: &Table, key: &str) -> Result<Option<f64>, ConfigError> {
    t.get(key).map(|v| positive(v, key)).transpose()
}

fn opt_str(t: &Table, key: &str) -> Result<Option<String>, ConfigError> {
    t.get(key)
        .map(|v| {
            v.as_str().map(str::to_string).ok_or_else(|| ConfigError::at(key, format!("expected a string, got {}", type_name(v))))
        })
        .transpose()
}

fn opt_u64(t: &Table, key: &str) -> Result<Option<u64>, ConfigError> {
    t.get(key)
        .map(|v| match v.as_integer() {
            Some(i) if i >= 0 => Ok(i as u64),
            _ => Err(ConfigError::at(key, "expected a nonnegative integer")),
        })
        .transpose()
}

/// `<base>_db` or `<base>_linear`, at most one of them; absent (and forbidden)
/// when the quantity is swept.
fn unit_pair(t: &Table, base: &str, swept: bool) -> Result<Option<f64>, ConfigError> {
    let db_key = format!("{base}_db");
    let lin_key = format!("{base}_linear");
    let db = t.get(&db_key).map(|v| number(v, &db_key)).transpose()?;
    let lin = t.get(&lin_key).map(|v| positive(v, &lin_key)).transpose()?;
    let key_present = if db.is_some() { &db_key } else { &lin_key };
    match (db, lin) {
        (Some(_), Some(_)) => Err(ConfigError::at(lin_key, format!("conflicts with `{db_key}`; give one of them"))),
        (Some(_), None) | (None, Some(_)) if swept => {
            Err(ConfigError::at(key_present.clone(), "must not be set when it is the sweep variable"))
        }
        (Some(d), None) => Ok(Some(db_to_linear(d))),
        (None, Some(l)) => Ok(Some(l)),
        (None, None) if swept => Ok(None),
        (None, None) => Err(ConfigError::at(db_key, format!("missing required key (or `{lin_key}`)"))),
    }
}

fn parse_scheme(v: &Value, key: &str) -> Result<Scheme, ConfigError> {
    match v.as_str() {
        Some("df") | Some("known_csi") => Ok(Scheme::KnownCsiDf),
        Some("af") | Some("unknown_csi") => Ok(Scheme::UnknownCsiAf),
        _ => Err(ConfigError::at(key, "expected \"df\" (known CSI) or \"af\" (unknown CSI)")),
    }
}

fn parse_turbulence(v: &Value, key: &str) -> Result<TurbulenceParams, ConfigError> {
    match v {
        Value::String(s) => match s.as_str() {
            "moderate" => Ok(TurbulenceParams::moderate()),
            "strong" => Ok(TurbulenceParams::strong()),
            _ => Err(ConfigError::at(key, format!("unknown regime \"{s}\"; expected \"moderate\" or \"strong\""))),
        },
        Value::Table(t) => {
            for k in t.keys() {
                if !["alpha", "beta", "xi", "rytov_variance"].contains(&k.as_str()) {
                    return Err(ConfigError::at(format!("{key}.{k}"), "unknown key"));
                }
            }
            let get = |k: &str| t.get(k).map(|x| positive(x, &format!("{key}.{k}"))).transpose();
            let xi = get("xi")?.ok_or_else(|| ConfigError::at(format!("{key}.xi"), "missing required key"))?;
            let made = match (get("rytov_variance")?, get("alpha")?, get("beta")?) {
                (Some(r), None, None) => TurbulenceParams::from_rytov(r, xi),
                (None, Some(a), Some(b)) => TurbulenceParams::new(a, b, xi),
                _ => {
                    return Err(ConfigError::at(key, "give either `alpha` and `beta`, or `rytov_variance`, together with `xi`"))
                }
            };
            made.map_err(|e| ConfigError::at(key, e.to_string()))
        }
        _ => Err(ConfigError::at(key, format!("expected a regime name or a table, got {}", type_name(v)))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "scheme = \"df\"\nn_users = 2\ngamma_th_db = 10\nsweep_values = [0, 10]\n";

    #[test]
    fn minimal_defaults() {
        let s = parse_config_str(MINIMAL).unwrap();
        assert_eq!(s.curves.len(), 1);
        let c = s.curves[0];
        assert_eq!((c.eta, c.c_const, c.turbulence.kappa), (1.0, 1.0, 1.0));
        assert_eq!(c.turbulence, TurbulenceParams::moderate());
        assert_eq!(s.seed, 0);
        assert_eq!(s.mode, Mode::Analytic);
        assert_eq!(s.metrics, vec![Metric::Outage, Metric::Ber]);
        assert!((c.gamma_th - 10.0).abs() < 1e-12);
    }

    #[test]
    fn rejections_name_the_key() {
        let cases = [
            ("scheme = \"df\"\nn_users = 2\ngamma_th_linear = -1\nsweep_values = [0]\n", "gamma_th_linear"),
            (&format!("{MINIMAL}colour = 1\n"), "colour"),
            ("scheme = \"df\"\nn_users = 0\ngamma_th_db = 10\nsweep_values = [0]\n", "n_users"),
            ("scheme = \"xx\"\nn_users = 1\ngamma_th_db = 10\nsweep_values = [0]\n", "scheme"),
            ("scheme = \"df\"\nn_users = 1\ngamma_th_db = 10\nsweep_values = [5, 1]\n", "sweep_values[1]"),
            ("scheme = \"df\"\nn_users = 1\nsweep_values = [0]\n", "gamma_th_db"),
            (&format!("{MINIMAL}gamma_avg_db = 3\n"), "gamma_avg_db"),
            (&format!("{MINIMAL}mode = \"both\"\ntrials = 10\n"), "trials"),
            (&format!("{MINIMAL}turbulence = {{ alpha = 2.0, xi = 1.0 }}\n"), "turbulence"),
            (&format!("{MINIMAL}turbulence = [\"moderate\", {{ alpha = 2.0, beta = 1.0, xi = 1.0, q = 1 }}]\n"), "turbulence[1].q"),
        ];
        for (text, key) in cases {
            let e = parse_config_str(text).unwrap_err();
            assert_eq!(e.key, key, "{text}: {e}");
        }
    }

    #[test]
    fn syntax_error_reports_line() {
        let e = parse_config_str("scheme = \"df\"\nn_users = \n").unwrap_err();
        assert!(e.message.contains("line 2"), "{e}");
    }

    #[test]
    fn curves_are_cross_product() {
        let s = parse_config_str(
            "scheme = [\"df\", \"af\"]\nn_users = [1, 2, 4]\nturbulence = [\"moderate\", { rytov_variance = 1.0, xi = 2.0 }]\n\
             gamma_th_db = 10\nsweep_values = [0]\n",
        )
        .unwrap();
        assert_eq!(s.curves.len(), 12);
        assert!(s.curves[2].turbulence.rytov_variance.is_none());
        assert!(s.curves[3].turbulence.rytov_variance.is_some());
    }

    #[test]
    fn n_users_sweep() {
        let s = parse_config_str("scheme = \"af\"\ngamma_th_db = 10\ngamma_avg_db = 10\nsweep_variable = \"n_users\"\nsweep_values = [1, 2, 4]\n")
            .unwrap();
        assert_eq!(s.point(&s.curves[0], 4.0).n_users, 4);
        let e = parse_config_str("scheme = \"af\"\ngamma_th_db = 10\ngamma_avg_db = 10\nsweep_variable = \"n_users\"\nsweep_values = [1.5]\n")
            .unwrap_err();
        assert_eq!(e.key, "sweep_values[0]");
    }
}
