//! Command-line front end: `solve`, `sweep`, `evolve`, `phase` and `fit`.
//!
//! Exit codes: 0 on success, 2 when a solve stops at `max_iter`, 1 on error.

mod config;
mod files;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analysis::{self, FitResult, SweepRow, SweepSpec};
use crate::error::{Error, Result};
use crate::evolution::{self, Trajectory};
use crate::extrapolation::{accelerated_solve, ExtrapolationConfig};
use crate::petviashvili::{self, ProfileSolution, StopReason};
use crate::spectral::DispersionSymbol;

pub use config::{
    DomainConfig, EquationConfig, EvolutionConfig, OutputConfig, RunConfig, SolverConfig,
    OUTPUT_DIR_ENV,
};
pub use files::{
    parse_points, parse_profile, profile_csv, read_points, read_profile, write_profile,
};

#[derive(Debug, Parser)]
#[command(
    name = "fkdv",
    version,
    about = "Solitary waves of fractional KdV-type equations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute one solitary-wave profile.
    Solve(CommonArgs),
    /// Speed–amplitude table over lists of α, p and c.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Fit amplitude = a c^b per (α, p) group and write fit.json.
        #[arg(long)]
        fit: bool,
    },
    /// Time-evolve a profile file and track amplitude, speed and invariants.
    Evolve {
        #[command(flatten)]
        common: CommonArgs,
        /// Initial state in profile CSV format.
        #[arg(long)]
        profile: PathBuf,
        /// Also run with dt/2 and report the energy-drift ratio.
        #[arg(long)]
        order_check: bool,
    },
    /// Phase portrait (φ, φ') of a profile file.
    Phase {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        profile: PathBuf,
    },
    /// Power-law fit y = a x^b of a two-column CSV.
    Fit {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        points: PathBuf,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Fractional exponent α (comma-separated list for sweep).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub alpha: Vec<f64>,
    /// Surface tension γ; selects the Whitham symbol.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "alpha")]
    pub gamma: Option<f64>,
    /// Nonlinearity power (comma-separated list for sweep).
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<u32>,
    /// Wave speed (comma-separated list for sweep).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub c: Vec<f64>,
    /// Half-length of the periodic interval.
    #[arg(long, allow_negative_numbers = true)]
    pub l: Option<f64>,
    /// Number of grid nodes (power of two).
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Stabilizing exponent; default (p+1)/p
    #[arg(long, allow_negative_numbers = true)]
    pub eps: Option<f64>,
    /// Stopping tolerance on the residual
    #[arg(long)]
    pub tol: Option<f64>,
    /// Cap on base Petviashvili steps
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Extrapolation width; 0 for the plain iteration.
    #[arg(long)]
    pub mw: Option<usize>,
    /// Accept extrapolants even when they raise the residual
    #[arg(long)]
    pub no_safeguard: bool,
    /// `residual` (default) or `any_control`.
    #[arg(long, value_parser = config::parse_stopping)]
    pub stopping: Option<petviashvili::StoppingRule>,
    /// Time step of the composed integrator
    #[arg(long)]
    pub dt: Option<f64>,
    /// Final time
    #[arg(long)]
    pub tfinal: Option<f64>,
    /// Steps between written snapshots
    #[arg(long)]
    pub snapshot_stride: Option<usize>,
    /// Output directory (overrides FKDV_OUTPUT_DIR and the config file).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweep.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// `key = value` or JSON config file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl CommonArgs {
    /// Config file (or defaults) with single-valued flags applied. List flags
    /// with several entries are left for the sweep.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let [alpha] = self.alpha[..] {
            config.equation.symbol = DispersionSymbol::fractional(alpha);
        }
        if let Some(gamma) = self.gamma {
            config.equation.symbol = DispersionSymbol::whitham(gamma);
        }
        if let [p] = self.p[..] {
            config.equation.p = p;
        }
        if let [c] = self.c[..] {
            config.solver.c = c;
        }
        set(&mut config.domain.l, self.l);
        set(&mut config.domain.n, self.n);
        if self.eps.is_some() {
            config.solver.eps = self.eps;
        }
        set(&mut config.solver.tol, self.tol);
        set(&mut config.solver.max_iter, self.max_iter);
        set(&mut config.solver.mw, self.mw);
        if self.no_safeguard {
            config.solver.safeguard = false;
        }
        set(&mut config.solver.stopping, self.stopping);
        set(&mut config.evolution.dt, self.dt);
        set(&mut config.evolution.t_final, self.tfinal);
        set(&mut config.evolution.snapshot_stride, self.snapshot_stride);
        config.output.directory = Some(config.output_directory(self.out.as_deref()));
        Ok(config)
    }

    fn single_valued(&self, command: &str) -> Result<()> {
        if self.alpha.len() > 1 || self.p.len() > 1 || self.c.len() > 1 {
            return Err(Error::Contract(format!(
                "{command} takes a single value of --alpha, --p and --c"
            )));
        }
        Ok(())
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Whether the command reached its goal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    NotConverged,
}

impl Outcome {
    pub fn exit_code(self) -> ExitCode {
        match self {
            Outcome::Success => ExitCode::SUCCESS,
            Outcome::NotConverged => ExitCode::from(2),
        }
    }
}

/// Parses `args` (program name first), runs the command and maps the result
/// to an exit code, printing errors to standard error.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Solve(common) => cmd_solve(common),
        Command::Sweep { common, fit } => cmd_sweep(common, *fit),
        Command::Evolve {
            common,
            profile,
            order_check,
        } => cmd_evolve(common, profile, *order_check),
        Command::Phase { common, profile } => cmd_phase(common, profile),
        Command::Fit { common, points } => cmd_fit(common, points),
    }
}

fn prepare_output(config: &RunConfig) -> Result<PathBuf> {
    let dir = config
        .output
        .directory
        .clone()
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// Iteration record written to `report.json`.
#[derive(Debug, Serialize)]
struct SolveReport {
    symbol: String,
    p: u32,
    c: f64,
    epsilon: f64,
    converged: bool,
    converged_by: StopReason,
    iterations: usize,
    cycles: usize,
    residual: Option<f64>,
    amplitude: f64,
    min_value: f64,
    m_history: Vec<f64>,
    diff_history: Vec<f64>,
    residual_history: Vec<f64>,
    wall_time_seconds: f64,
}

/// Solves with the config's method: plain iteration for `mw = 0`, cycled
/// extrapolation otherwise.
pub fn solve_config(config: &RunConfig) -> Result<ProfileSolution> {
    config.validate()?;
    let spec = config.problem_spec(&config.grid()?)?;
    match config.extrapolation() {
        Some(x) => accelerated_solve(&spec, &x, None),
        None => petviashvili::solve(&spec, None),
    }
}

fn cmd_solve(common: &CommonArgs) -> Result<Outcome> {
    common.single_valued("solve")?;
    let config = common.resolve()?;
    config.validate()?;
    let dir = prepare_output(&config)?;
    let start = Instant::now();
    let sol = solve_config(&config)?;
    let wall = start.elapsed().as_secs_f64();

    write_profile(
        &dir.join("profile.csv"),
        &sol.profile,
        &[format!(
            "{}, p = {}, c = {}",
            sol.spec.symbol.describe(),
            sol.spec.p,
            sol.spec.c
        )],
    )?;
    let report = SolveReport {
        symbol: sol.spec.symbol.describe(),
        p: sol.spec.p,
        c: sol.spec.c,
        epsilon: sol.spec.epsilon,
        converged: sol.converged(),
        converged_by: sol.report.converged_by,
        iterations: sol.report.iterations,
        cycles: sol.report.cycles,
        residual: sol.report.final_residual(),
        amplitude: sol.amplitude,
        min_value: sol.min_value,
        m_history: sol.report.m_history.clone(),
        diff_history: sol.report.diff_history.clone(),
        residual_history: sol.report.residual_history.clone(),
        wall_time_seconds: wall,
    };
    files::write_json(&dir.join("report.json"), &report)?;
    files::write_json(&dir.join("run.json"), &config)?;
    println!(
        "{}: amplitude {:.12} after {} iterations ({:?}), residual {:.3e}",
        report.symbol,
        report.amplitude,
        report.iterations,
        report.converged_by,
        report.residual.unwrap_or(f64::NAN)
    );
    Ok(if sol.converged() {
        Outcome::Success
    } else {
        Outcome::NotConverged
    })
}

/// One entry of `fit.json`.
#[derive(Debug, Serialize)]
struct GroupFit {
    alpha: f64,
    p: u32,
    n_points: usize,
    fit: Option<FitResult>,
    accepted: bool,
    error: Option<String>,
}

fn sweep_rows(config: &RunConfig, common: &CommonArgs) -> Result<Vec<SweepRow>> {
    let alphas = if common.alpha.is_empty() {
        match config.equation.symbol {
            DispersionSymbol::Fractional { alpha } => vec![alpha],
            DispersionSymbol::WhithamExtended { .. } => {
                return Err(Error::Contract(
                    "sweep supports the fractional symbol only".into(),
                ))
            }
        }
    } else {
        common.alpha.clone()
    };
    let ps = if common.p.is_empty() {
        vec![config.equation.p]
    } else {
        common.p.clone()
    };
    let speeds = if common.c.is_empty() {
        vec![config.solver.c]
    } else {
        common.c.clone()
    };
    let template = config.problem_spec(&config.grid()?)?;
    let extrapolation = config
        .extrapolation()
        .unwrap_or_else(|| ExtrapolationConfig::new(1));
    let mut rows = Vec::new();
    for &p in &ps {
        let sweep = SweepSpec {
            p,
            alphas: alphas.clone(),
            speeds: speeds.clone(),
            template: template.clone(),
            extrapolation,
        };
        rows.extend(analysis::speed_amplitude_sweep(&sweep)?);
    }
    rows.sort_by(|a, b| {
        a.alpha
            .total_cmp(&b.alpha)
            .then(a.p.cmp(&b.p))
            .then(a.c.total_cmp(&b.c))
    });
    Ok(rows)
}

fn cmd_sweep(common: &CommonArgs, fit: bool) -> Result<Outcome> {
    let mut config = common.resolve()?;
    if let Some(&c) = common.c.first() {
        config.solver.c = c;
    }
    if let Some(&p) = common.p.first() {
        config.equation.p = p;
    }
    config.validate()?;
    let dir = prepare_output(&config)?;

    let rows = match common.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| Error::Contract(format!("cannot start {jobs} workers: {e}")))?
            .install(|| sweep_rows(&config, common))?,
        None => sweep_rows(&config, common)?,
    };

    let mut csv = String::from("alpha,p,c,amplitude,iterations,converged\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            files::num(r.alpha),
            r.p,
            files::num(r.c),
            files::num(r.amplitude),
            r.iterations,
            r.converged
        ));
    }
    std::fs::write(dir.join("sweep.csv"), csv)?;
    files::write_json(&dir.join("run.json"), &config)?;

    let converged = rows.iter().filter(|r| r.converged).count();
    println!("{converged} of {} rows converged", rows.len());

    if fit {
        let mut fits = Vec::new();
        for group in rows.chunk_by(|a, b| a.alpha == b.alpha && a.p == b.p) {
            let n_points = group.iter().filter(|r| r.converged).count();
            let (fit, error) = match analysis::fit_sweep_group(group) {
                Ok(f) => (Some(f), None),
                Err(e) => (None, Some(e.to_string())),
            };
            let accepted = fit.is_some_and(|f| f.accepted(analysis::DEFAULT_SSE_THRESHOLD));
            if let Some(f) = &fit {
                println!(
                    "alpha = {}, p = {}: a = {:.6}, b = {:.6}, sse = {:.3e}",
                    group[0].alpha, group[0].p, f.a, f.b, f.sse
                );
            }
            fits.push(GroupFit {
                alpha: group[0].alpha,
                p: group[0].p,
                n_points,
                fit,
                accepted,
                error,
            });
        }
        files::write_json(&dir.join("fit.json"), &fits)?;
    }

    if converged == 0 {
        return Err(Error::Contract("every sweep row failed to converge".into()));
    }
    Ok(Outcome::Success)
}

/// Printed and written to `summary.json` after an evolution.
#[derive(Debug, Serialize)]
struct EvolveSummary {
    dt: f64,
    t_final: f64,
    steps: usize,
    snapshots: usize,
    initial_amplitude: f64,
    amplitude_drift: f64,
    speed: Option<f64>,
    mass_drift: f64,
    energy_drift: f64,
    /// Energy drift at `dt/2`, with `--order-check`.
    energy_drift_half_step: Option<f64>,
    energy_drift_ratio: Option<f64>,
}

fn diagnostics_csv(trajectory: &Trajectory) -> String {
    let mut out = String::from("t,amplitude,peak_position,C,M,E\n");
    for i in 0..trajectory.len() {
        let d = trajectory.diagnostics[i];
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            files::num(trajectory.times[i]),
            files::num(trajectory.amplitude_series[i]),
            files::num(trajectory.peak_position_series[i]),
            files::num(d.c),
            files::num(d.m),
            files::num(d.e)
        ));
    }
    out
}

fn absolute_energy_drift(trajectory: &Trajectory) -> f64 {
    let e0 = trajectory.diagnostics[0].e;
    trajectory
        .diagnostics
        .iter()
        .fold(0.0_f64, |m, d| m.max((d.e - e0).abs()))
}

fn cmd_evolve(common: &CommonArgs, profile: &Path, order_check: bool) -> Result<Outcome> {
    common.single_valued("evolve")?;
    let config = common.resolve()?;
    config.validate()?;
    let initial = read_profile(profile)?;
    let grid = config.grid()?;
    if !initial.grid().same_as(&grid) {
        return Err(Error::Contract(format!(
            "profile grid (l = {}, N = {}) does not match the configured grid (l = {}, N = {})",
            initial.grid().half_length(),
            initial.grid().size(),
            grid.half_length(),
            grid.size()
        )));
    }
    let dir = prepare_output(&config)?;
    let spec = config.evolution_spec(initial.grid())?;
    let trajectory = evolution::evolve(&initial, &spec)?;

    std::fs::write(dir.join("diagnostics.csv"), diagnostics_csv(&trajectory))?;
    let snapshots = dir.join("snapshots");
    std::fs::create_dir_all(&snapshots)?;
    for (i, (t, u)) in trajectory
        .times
        .iter()
        .zip(&trajectory.snapshots)
        .enumerate()
    {
        write_profile(
            &snapshots.join(format!("snapshot_{i:05}.csv")),
            u,
            &[format!("t = {t}")],
        )?;
    }

    let (half, ratio) = if order_check {
        let mut fine = spec.clone();
        fine.dt = spec.dt / 2.0;
        fine.snapshot_stride = spec.snapshot_stride * 2;
        let fine_traj = evolution::evolve(&initial, &fine)?;
        let coarse = absolute_energy_drift(&trajectory);
        let half = absolute_energy_drift(&fine_traj);
        (Some(half), Some(coarse / half))
    } else {
        (None, None)
    };

    let summary = EvolveSummary {
        dt: spec.dt,
        t_final: spec.t_final,
        steps: spec.steps(),
        snapshots: trajectory.len(),
        initial_amplitude: trajectory.amplitude_series[0],
        amplitude_drift: trajectory.relative_amplitude_drift(),
        speed: evolution::measure_speed(&trajectory).ok(),
        mass_drift: trajectory.relative_mass_drift(),
        energy_drift: trajectory.relative_energy_drift(),
        energy_drift_half_step: half,
        energy_drift_ratio: ratio,
    };
    files::write_json(&dir.join("summary.json"), &summary)?;
    files::write_json(&dir.join("run.json"), &config)?;
    println!(
        "amplitude drift {:.3e}, speed {}, mass drift {:.3e}, energy drift {:.3e}",
        summary.amplitude_drift,
        summary
            .speed
            .map_or_else(|| "undefined".to_string(), |s| format!("{s:.10}")),
        summary.mass_drift,
        summary.energy_drift
    );
    if let Some(r) = ratio {
        println!("energy drift ratio dt : dt/2 = {r:.3}");
    }
    Ok(Outcome::Success)
}

fn cmd_phase(common: &CommonArgs, profile: &Path) -> Result<Outcome> {
    let config = common.resolve()?;
    let dir = prepare_output(&config)?;
    let field = read_profile(profile)?;
    let mut csv = String::from("phi,dphi\n");
    for (phi, dphi) in analysis::phase_portrait(&field)? {
        csv.push_str(&format!("{},{}\n", files::num(phi), files::num(dphi)));
    }
    std::fs::write(dir.join("phase.csv"), csv)?;
    Ok(Outcome::Success)
}

fn cmd_fit(common: &CommonArgs, points: &Path) -> Result<Outcome> {
    let config = common.resolve()?;
    let data = read_points(points)?;
    let fit = analysis::fit_power_law(&data)?;
    let dir = prepare_output(&config)?;
    files::write_json(&dir.join("fit.json"), &fit)?;
    println!(
        "a = {:.10}, b = {:.10}, sse = {:.3e}, r^2 = {:.12}",
        fit.a, fit.b, fit.sse, fit.r_squared
    );
    Ok(Outcome::Success)
}
