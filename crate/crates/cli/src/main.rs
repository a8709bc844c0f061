use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fsorf_cli::analysis::{ber_crossover, regime_gap};
use fsorf_cli::config::{parse_config, Mode, SweepSpec};
use fsorf_cli::output::{render_csv, render_curve, sidecar, write_atomic, write_sweep};
use fsorf_cli::presets::{figure_preset, regime_name, Figure, GAMMA_TH_DB};
use fsorf_cli::sweep::{run_sweep, SweepOutput};
use fsorf_cli::verify::{verify, VerifyOptions};
use fsorf_cli::CliError;
use fsorf_core::units::db_to_linear;
use fsorf_core::{Scheme, SystemConfig, TurbulenceParams};

#[derive(Parser)]
#[command(name = "fsorf", version, about = "Outage and DPSK error rate of dual-hop multiuser FSO/RF links")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// Monte Carlo trials per cell (overrides the config).
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Base seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Accepted distance between closed form and simulation, in standard errors.
    #[arg(long, global = true, default_value_t = 3.0)]
    tolerance_stderr_mult: f64,
    /// Output file (sweeps) or directory (figures).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Test hook: corrupt the analytic value of this verify row.
    #[arg(long, global = true, hide = true)]
    corrupt_row: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the closed forms over a sweep.
    Analytic { config: PathBuf },
    /// Estimate the sweep by Monte Carlo.
    Simulate { config: PathBuf },
    /// Compare closed forms against Monte Carlo.
    Verify { config: PathBuf },
    /// Regenerate the data behind one of the figures.
    Figure { name: String },
}

fn apply_overrides(spec: &mut SweepSpec, g: &Global, take_out: bool) -> Result<(), CliError> {
    if let Some(t) = g.trials {
        spec.trials = t;
    }
    if let Some(s) = g.seed {
        spec.seed = s;
    }
    if let (true, Some(o)) = (take_out, &g.out) {
        spec.output_path = Some(o.clone());
    }
    if !(g.tolerance_stderr_mult > 0.0 && g.tolerance_stderr_mult.is_finite()) {
        return Err(CliError::Usage("--tolerance-stderr-mult must be positive".into()));
    }
    spec.validate()?;
    Ok(())
}

fn emit(spec: &SweepSpec, out: &SweepOutput) -> Result<(), CliError> {
    match &spec.output_path {
        Some(p) => write_sweep(p, spec, &out.rows)?,
        None => std::io::stdout().lock().write_all(&render_csv(spec, &out.rows))?,
    }
    if out.failed_cells > 0 {
        return Err(CliError::Numerical(out.failed_cells));
    }
    Ok(())
}

fn sweep_command(config: &Path, mode: Mode, g: &Global) -> Result<(), CliError> {
    let mut spec = parse_config(config)?;
    spec.mode = mode;
    apply_overrides(&mut spec, g, true)?;
    emit(&spec, &run_sweep(&spec))
}

fn verify_command(config: &Path, g: &Global) -> Result<(), CliError> {
    let mut spec = parse_config(config)?;
    spec.mode = Mode::Both;
    apply_overrides(&mut spec, g, true)?;
    let opts = VerifyOptions { stderr_mult: g.tolerance_stderr_mult, corrupt_row: g.corrupt_row };
    let (out, report) = verify(&spec, &opts);
    if let Some(p) = &spec.output_path {
        write_sweep(p, &spec, &out.rows)?;
        write_atomic(&sidecar(p, ".verify.json"), &report.to_json())?;
    }
    eprint!("{}", report.summary());
    if out.failed_cells > 0 {
        return Err(CliError::Numerical(out.failed_cells));
    }
    if !report.pass {
        return Err(CliError::Verification);
    }
    Ok(())
}

fn figure_summary(fig: Figure) -> Result<Vec<String>, CliError> {
    let num = |e: fsorf_core::Error| {
        eprintln!("{e}");
        CliError::Numerical(1)
    };
    let show = |v: Option<f64>| v.map(|x| format!("{x:.3} dB")).unwrap_or_else(|| "not found".into());
    let mut lines = Vec::new();
    match fig {
        Figure::Fig2 => {
            let th = db_to_linear(GAMMA_TH_DB);
            for s in [Scheme::KnownCsiDf, Scheme::UnknownCsiAf] {
                let gap = regime_gap(s, 2, th, 1e-2).map_err(num)?;
                lines.push(format!("{}: strong minus moderate at outage 1e-2: {}", s.label(), show(gap)));
            }
        }
        Figure::Fig4 => {
            let base = SystemConfig::equal_snr(Scheme::KnownCsiDf, 2, 1.0, db_to_linear(GAMMA_TH_DB), TurbulenceParams::moderate())
                .map_err(num)?;
            let c = ber_crossover(&base, -10.0, 30.0).map_err(num)?;
            lines.push(match c {
                Some(c) => format!(
                    "N=2 moderate: DF/AF BER crossover at {:.3} dB; {} has the lower BER below it",
                    c.gamma_avg_db,
                    if c.df_better_below { "df" } else { "af" }
                ),
                None => "N=2 moderate: DF and AF BER do not cross in [-10, 30] dB".into(),
            });
        }
        Figure::Fig3 | Figure::Fig5 => {}
    }
    Ok(lines)
}

fn figure_command(name: &str, g: &Global) -> Result<(), CliError> {
    let fig: Figure = name.parse().map_err(CliError::Usage)?;
    let dir = g.out.clone().ok_or_else(|| CliError::Usage("figure requires --out <dir>".into()))?;
    let mut spec = figure_preset(fig);
    if g.trials.is_some() {
        spec.mode = Mode::Both;
    }
    apply_overrides(&mut spec, g, false)?;
    std::fs::create_dir_all(&dir)?;
    let out = run_sweep(&spec);
    write_sweep(&dir.join(format!("{}.csv", fig.name())), &spec, &out.rows)?;

    let nm = spec.metrics.len();
    let nv = spec.sweep_values.len();
    for (ci, curve) in spec.curves.iter().enumerate() {
        for (mi, metric) in spec.metrics.iter().enumerate() {
            let rows: Vec<_> = (0..nv).map(|v| &out.rows[(ci * nv + v) * nm + mi]).collect();
            let file = format!(
                "{}_{}_{}_n{}_{}.dat",
                fig.name(),
                curve.scheme.label(),
                regime_name(&curve.turbulence),
                curve.n_users,
                metric.label()
            );
            write_atomic(&dir.join(file), &render_curve(&rows))?;
        }
    }
    for l in figure_summary(fig)? {
        println!("{l}");
    }
    if out.failed_cells > 0 {
        return Err(CliError::Numerical(out.failed_cells));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let g = &cli.global;
    let pool = match g.workers {
        Some(0) => return Err(CliError::Usage("--workers must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    }
    .map_err(|e| CliError::Usage(e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Analytic { config } => sweep_command(config, Mode::Analytic, g),
        Command::Simulate { config } => sweep_command(config, Mode::Simulate, g),
        Command::Verify { config } => verify_command(config, g),
        Command::Figure { name } => figure_command(name, g),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
