//! Command-line front end: `run`, `classify`, `exponents` and `sweep`.
//!
//! Exit codes: 0 success or bounded, 2 not covered by theory, 3 blow-up
//! suspected, 1 any error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{parse_config, set_parameter, ConfigError, RunSpec, SweepBlock};
use crate::diagnostics::{boundedness_report, BoundednessReport, Thresholds};
use crate::model::{validate_model, Variant};
use crate::solver::{build_grid, init_state, render_snapshot, run, RunOutcome, RunVerdict, SolverError, Stepper};
use crate::theory::{
    classify, classify_exponents, find_pbar, gn_exponents, ExponentSet, Exponents, GnParams, PbarScan, RegimeReport,
    Relation, TheoryError, REGIME_CSV_HEADER,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_COVERED: i32 = 2;
pub const EXIT_BLOWUP: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Solver(#[from] SolverError),
    #[error("{0}")]
    Theory(#[from] TheoryError),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("sweep has {points} points, above the budget of {budget}")]
    BudgetExceeded { points: usize, budget: usize },
    #[error("{0}")]
    Usage(String),
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io { path: path.to_path_buf(), message: e.to_string() }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| io_error(path, e))
}

#[derive(Debug, Parser)]
#[command(name = "chemo", version, about = "Attraction-repulsion chemotaxis simulator and regime checker")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a configuration and write diagnostics.
    Run { config: PathBuf },
    /// Evaluate the boundedness hypotheses for an exponent tuple.
    Classify(ClassifyArgs),
    /// Interpolation exponents at `p`, or the threshold p̄.
    Exponents(ExponentArgs),
    /// Classify (and optionally simulate) a parameter grid.
    Sweep {
        config: PathBuf,
        /// Worker threads; CHEMO_JOBS overrides.
        #[arg(long)]
        jobs: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub tau: u8,
    #[arg(long, default_value = "local")]
    pub variant: Variant,
    #[arg(long, allow_negative_numbers = true)]
    pub m1: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub m2: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub m3: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub k: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub l: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub r: f64,
    #[arg(long)]
    pub n: u32,
    /// Print the CSV header first.
    #[arg(long)]
    pub header: bool,
}

#[derive(Debug, Args)]
pub struct ExponentArgs {
    #[arg(long, allow_negative_numbers = true, required_unless_present = "find_pbar", conflicts_with = "find_pbar")]
    pub p: Option<f64>,
    /// Defaults to max{l, m3+l-1} + 1.
    #[arg(long, allow_negative_numbers = true)]
    pub q: Option<f64>,
    #[arg(long)]
    pub n: u32,
    #[arg(long, allow_negative_numbers = true)]
    pub m1: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub m2: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub m3: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub k: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub l: f64,
    #[arg(long)]
    pub find_pbar: bool,
    /// Relations p̄ must satisfy, comma separated; default all applicable.
    #[arg(long, value_delimiter = ',')]
    pub require: Vec<Relation>,
    #[arg(long)]
    pub header: bool,
}

/// Parses `args` (including the program name) and executes.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli, out, err),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            code
        }
    }
}

pub fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Run { config } => cmd_run(&config, out),
        Command::Classify(args) => cmd_classify(&args, out),
        Command::Exponents(args) => cmd_exponents(&args, out),
        Command::Sweep { config, jobs } => cmd_sweep(&config, jobs, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn load(path: &Path) -> Result<RunSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    Ok(parse_config(&text)?)
}

/// Result of simulating one configuration.
pub struct Simulation {
    pub outcome: RunOutcome,
    pub regime: Result<RegimeReport, TheoryError>,
    pub report: Option<BoundednessReport>,
}

/// Runs `spec`, writing `timeseries.csv`, `regime.csv` and snapshots into
/// `dir`.
pub fn simulate(spec: &RunSpec, dir: &Path) -> Result<Simulation, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let snap_dir = dir.join("snapshots");
    std::fs::create_dir_all(&snap_dir).map_err(|e| io_error(&snap_dir, e))?;

    let grid = build_grid(&spec.domain)?.into_shared();
    let stepper = Stepper::new(spec.model.clone(), grid.clone(), spec.step_settings())?;
    let initial = init_state(&grid, &spec.init, &spec.model)?;

    let every = spec.output.snapshot_every;
    let mut next_snapshot = 0.0;
    let mut written = 0usize;
    let mut last_written_t = f64::NAN;
    let save = |state: &crate::solver::SimState, written: &mut usize| -> Result<(), SolverError> {
        let path = snap_dir.join(format!("snapshot_{:05}.txt", *written));
        std::fs::write(&path, render_snapshot(state))
            .map_err(|e| SolverError::Io(format!("{}: {e}", path.display())))?;
        *written += 1;
        Ok(())
    };
    let outcome = run(&stepper, initial, &spec.run_control(), |state, _| {
        if let Some(every) = every {
            if state.t >= next_snapshot {
                save(state, &mut written)?;
                last_written_t = state.t;
                next_snapshot = every * ((state.t / every).floor() + 1.0);
            }
        } else if written == 0 {
            save(state, &mut written)?;
            last_written_t = state.t;
        }
        Ok(())
    })?;
    if last_written_t != outcome.state.t {
        save(&outcome.state, &mut written)?;
    }

    write_file(&dir.join("timeseries.csv"), &outcome.series.to_csv())?;

    let regime = classify(&spec.model);
    let thresholds =
        Thresholds { blowup_threshold: spec.time.blowup_threshold, dt_min: spec.time.dt_min, ..Thresholds::default() };
    let report = match &regime {
        Ok(r) => Some(
            boundedness_report(&outcome.series, r, &spec.model, grid.measure(), &thresholds)
                .map_err(|e| CliError::Usage(e.to_string()))?,
        ),
        Err(_) => None,
    };
    write_file(&dir.join("regime.csv"), &regime_sidecar(&regime, report.as_ref(), &outcome))?;
    Ok(Simulation { outcome, regime, report })
}

fn regime_sidecar(
    regime: &Result<RegimeReport, TheoryError>,
    report: Option<&BoundednessReport>,
    outcome: &RunOutcome,
) -> String {
    let mut s = String::new();
    s.push_str(REGIME_CSV_HEADER);
    s.push('\n');
    match regime {
        Ok(r) => {
            s.push_str(&r.csv_row());
            s.push('\n');
            for note in &r.notes {
                s.push_str(&format!("# note={note}\n"));
            }
        }
        Err(e) => s.push_str(&format!("# classification refused: {e}\n")),
    }
    s.push_str(&format!("# run_verdict={}\n", outcome.verdict));
    if let Some(v) = outcome.series.verdict {
        s.push_str(&format!("# series_verdict={v}\n"));
    }
    if let Some(rep) = report {
        s.push_str(&format!("# consistency={}\n", rep.consistency));
        if let (Some(m), Some(margin)) = (rep.mass_bound, rep.mass_margin) {
            s.push_str(&format!("# mass_bound={m:.16e}\n# mass_margin={margin:.16e}\n"));
        }
        if let Some(advice) = &rep.advice {
            s.push_str(&format!("# advice={advice}\n"));
        }
    }
    s
}

fn cmd_run(config: &Path, out: &mut dyn Write) -> Result<i32, CliError> {
    let spec = load(config)?;
    let sim = simulate(&spec, &spec.output.dir)?;
    let last = sim.outcome.series.samples.last().expect("run records at least one sample");
    let _ = writeln!(
        out,
        "{} at t={} after {} steps; sup u = {:e}; mass = {:e}; series verdict {}",
        sim.outcome.verdict,
        sim.outcome.state.t,
        sim.outcome.state.step_count,
        last.sup_u,
        last.mass,
        sim.outcome.series.verdict.map(|v| v.to_string()).unwrap_or_default()
    );
    Ok(match sim.outcome.verdict {
        RunVerdict::Completed => EXIT_OK,
        RunVerdict::BlowupSuspected(_) => EXIT_BLOWUP,
    })
}

fn cmd_classify(args: &ClassifyArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let e = Exponents { m1: args.m1, m2: args.m2, m3: args.m3, k: args.k, l: args.l, r: args.r, n: args.n };
    let report = classify_exponents(args.variant, args.tau, &e)?;
    if args.header {
        let _ = writeln!(out, "{REGIME_CSV_HEADER}");
    }
    let _ = writeln!(out, "{}", report.csv_row());
    Ok(if report.verdict.as_ref().is_some_and(|v| v.is_bounded()) { EXIT_OK } else { EXIT_NOT_COVERED })
}

fn cmd_exponents(args: &ExponentArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let g = GnParams {
        q: args.q.unwrap_or_else(|| GnParams::default_q(args.l, args.m3)),
        n: args.n,
        m1: args.m1,
        m2: args.m2,
        m3: args.m3,
        k: args.k,
        l: args.l,
    };
    let p = if args.find_pbar {
        let cert = find_pbar(&g, &args.require, &PbarScan::default())?;
        let names: Vec<&str> = cert.required.iter().map(|r| r.name()).collect();
        let _ = writeln!(out, "# pbar={} q={} required={}", cert.pbar, g.q, names.join("|"));
        cert.pbar
    } else {
        args.p.ok_or_else(|| CliError::Usage("--p or --find-pbar required".into()))?
    };
    let set = gn_exponents(p, &g)?;
    if args.header {
        let _ = writeln!(out, "{}", ExponentSet::csv_header());
    }
    let _ = writeln!(out, "{}", set.csv_row());
    Ok(EXIT_OK)
}

/// Number of sweep workers: CHEMO_JOBS, then `--jobs`, then all cores.
pub fn resolve_jobs(flag: Option<usize>) -> usize {
    std::env::var("CHEMO_JOBS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&j| j > 0)
        .or(flag.filter(|&j| j > 0))
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Cartesian product of the sweep axes, first axis slowest.
pub fn sweep_points(sweep: &SweepBlock) -> Vec<Vec<f64>> {
    let mut points = vec![Vec::new()];
    for axis in &sweep.axes {
        let values = axis.values();
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    points
}

fn csv_field(s: &str) -> String {
    s.replace([',', '\n'], ";")
}

fn sweep_row(spec: &RunSpec, sweep: &SweepBlock, index: usize, values: &[f64], dir: &Path) -> String {
    let mut model = spec.model.spec().clone();
    let mut cols: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    let empty_regime = ",,,,,,";
    let applied = sweep.axes.iter().zip(values).try_for_each(|(a, &v)| set_parameter(&mut model, &a.param, v));
    let validated = applied.and_then(|_| validate_model(model).map_err(|e| e.to_string()));
    let model = match validated {
        Ok(m) => m,
        Err(msg) => {
            cols.push(format!("{empty_regime},,,,{}", csv_field(&msg)));
            return cols.join(",");
        }
    };
    let regime = match classify(&model) {
        Ok(r) => r,
        Err(e) => {
            cols.push(format!("{empty_regime},,,,{}", csv_field(&e.to_string())));
            return cols.join(",");
        }
    };
    cols.push(regime.csv_row());
    if !sweep.simulate {
        cols.push(",,,".into());
        return cols.join(",");
    }
    let point = RunSpec { model, sweep: None, ..spec.clone() };
    match simulate(&point, &dir.join(format!("point_{index:05}"))) {
        Ok(sim) => {
            let margin = sim.report.as_ref().and_then(|r| r.mass_margin);
            cols.push(format!("{:.16e}", sim.outcome.state.u.sup_abs()));
            cols.push(margin.map(|m| format!("{m:.16e}")).unwrap_or_default());
            cols.push(csv_field(&sim.outcome.series.verdict.map(|v| v.to_string()).unwrap_or_default()));
            cols.push(String::new());
        }
        Err(e) => cols.push(format!(",,,{}", csv_field(&e.to_string()))),
    }
    cols.join(",")
}

/// Rows of `regime_map.csv` (header first, no timestamp).
pub fn sweep_rows(spec: &RunSpec, jobs: usize) -> Result<Vec<String>, CliError> {
    let sweep = spec.sweep.as_ref().ok_or_else(|| CliError::Usage("config has no [sweep] section".into()))?;
    let points = sweep.total_points();
    if points > sweep.budget {
        return Err(CliError::BudgetExceeded { points, budget: sweep.budget });
    }
    let grid = sweep_points(sweep);
    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().map_err(|e| CliError::Usage(e.to_string()))?;
    let dir = spec.output.dir.clone();
    let body: Vec<String> = pool
        .install(|| grid.par_iter().enumerate().map(|(i, values)| sweep_row(spec, sweep, i, values, &dir)).collect());
    let mut header: Vec<String> = sweep.axes.iter().map(|a| a.param.clone()).collect();
    header.push(REGIME_CSV_HEADER.to_string());
    header.push("sup_u,mass_margin,run_verdict,note".to_string());
    let mut rows = vec![header.join(",")];
    rows.extend(body);
    Ok(rows)
}

fn cmd_sweep(config: &Path, jobs: Option<usize>, out: &mut dyn Write) -> Result<i32, CliError> {
    let spec = load(config)?;
    let rows = sweep_rows(&spec, resolve_jobs(jobs))?;
    let dir = &spec.output.dir;
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut text = format!("# generated={stamp}\n");
    for row in &rows {
        text.push_str(row);
        text.push('\n');
    }
    let path = dir.join("regime_map.csv");
    write_file(&path, &text)?;
    let _ = writeln!(out, "wrote {} rows to {}", rows.len() - 1, path.display());
    Ok(EXIT_OK)
}
