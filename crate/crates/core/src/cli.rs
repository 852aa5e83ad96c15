//! Command-line front end.
//!
//! Structured results go to `--out` (or standard output) as JSON, time series
//! as CSV. Diagnostics and human-readable summaries go to standard error.
//!
//! Exit codes: 0 success, 2 invalid physical state, 3 configuration or parse
//! error, 4 verification failure.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::config::{Preset, RunConfig};
use crate::discord::{concurrence, discord_with, nullity_check};
use crate::dynamics::{steady_coherence, steady_coherence_printed, trajectory_with, Trajectory};
use crate::error::{Error, Result};
use crate::minimizer::{minimizer_by_name, MINIMIZERS};
use crate::oracle::{compare, DecayConvention, DeviationReport, FockTruncation, OracleSettings, DEFAULT_DT, DEFAULT_TAIL_BOUND};
use crate::propagator::{propagator_by_name, MasterEquation, PROPAGATORS};
use crate::sweep::{measurement_sweep, SweepReport};
use crate::xstate::XState;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 4;

/// Verification bounds applied by `verify`.
pub const MAX_PROPAGATOR_DEVIATION: f64 = 1e-3;
pub const MAX_TRACE_DRIFT: f64 = 1e-8;
pub const MAX_CONSTANT_DRIFT: f64 = 1e-6;
pub const MAX_OFF_X_RESIDUAL: f64 = 1e-10;
/// Agreement required between a steady-state formula and the target coherence.
pub const STEADY_MATCH_TOL: f64 = 5e-4;

#[derive(Debug, Parser)]
#[command(name = "xdiscord", version, about = "Quantum discord of two-qubit X states under dispersive cavity dynamics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Discord breakdown and nullity verdict for one state, as JSON.
    Discord(DiscordArgs),
    /// Time series of populations, coherences and correlations, as CSV.
    Evolve(DynamicsArgs),
    /// Zero-discord events along a trajectory, as JSON.
    Zeros(DynamicsArgs),
    /// Check the closed-form dynamics and measurement minimum against numeric references.
    Verify(VerifyArgs),
    /// Built-in presets.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum PresetAction {
    List,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub preset: Option<String>,
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Window end in units of 1/λ.
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Discord (bits) below which a sample counts as zero.
    #[arg(long)]
    pub zero_threshold: Option<f64>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also report the steady coherence with the κ² + 16λ² denominator.
    #[arg(long)]
    pub show_eq13_as_printed: bool,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Highest retained photon number; smallest with Poisson tail < 1e-12 by default.
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Integration step in units of 1/λ.
    #[arg(long, default_value_t = DEFAULT_DT)]
    pub dt: f64,
    /// amplitude-rate | energy-rate
    #[arg(long, default_value = "amplitude-rate")]
    pub convention: String,
}

#[derive(Debug, Args)]
pub struct DiscordArgs {
    /// State as JSON, or @path to a JSON file. Read from standard input when
    /// neither this nor a preset/config is given.
    #[arg(long)]
    pub state: Option<String>,
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// closed-form | grid-search
    #[arg(long, default_value = "closed-form")]
    pub minimizer: String,
    #[arg(long, default_value_t = 1e-8)]
    pub nullity_tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DynamicsArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// analytic | master-equation
    #[arg(long, default_value = "analytic")]
    pub propagator: String,
    #[command(flatten)]
    pub oracle: OracleArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub oracle: OracleArgs,
    /// End of the comparison window in units of 1/λ.
    #[arg(long, default_value_t = 20.0)]
    pub t_end: f64,
    /// Comparison samples over [0, t_end].
    #[arg(long, default_value_t = 201)]
    pub compare_samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random states in the measurement-minimum sweep.
    #[arg(long, default_value_t = 1000)]
    pub sweep_states: usize,
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Discord(args) => cmd_discord(&args),
        Command::Evolve(args) => cmd_evolve(&args),
        Command::Zeros(args) => cmd_zeros(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::Preset {
            action: PresetAction::List,
        } => {
            let mut out = io::stdout().lock();
            for p in Preset::ALL {
                writeln!(out, "{:<16} {}", p.name(), p.description())?;
            }
            Ok(EXIT_OK)
        }
    }
}

fn read_config(path: &PathBuf) -> Result<RunConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    RunConfig::from_json(&text)
}

/// Preset or config file, then flag overrides.
pub fn resolve_config(args: &RunArgs) -> Result<RunConfig> {
    let mut config = match (&args.preset, &args.config) {
        (Some(_), Some(_)) => {
            return Err(Error::Config("--preset and --config are mutually exclusive".into()))
        }
        (Some(name), None) => Preset::from_name(name)?.config(),
        (None, Some(path)) => read_config(path)?,
        (None, None) => return Err(Error::Config("one of --preset or --config is required".into())),
    };
    if let Some(t) = args.t_max {
        config.grid.t_max = t;
    }
    if let Some(n) = args.samples {
        config.grid.n_samples = n;
    }
    if let Some(z) = args.zero_threshold {
        config.zero_threshold = z;
    }
    if let Some(out) = &args.out {
        config.output = Some(out.clone());
    }
    config.validate()?;
    Ok(config)
}

fn parse_state(text: &str) -> Result<XState> {
    let text = match text.strip_prefix('@') {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {path}: {e}")))?,
        None => text.to_string(),
    };
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("cannot parse state: {e}")))
}

fn open_output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout())),
    })
}

fn write_json<T: Serialize>(path: Option<&PathBuf>, value: &T) -> Result<()> {
    let mut out = open_output(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn cmd_discord(args: &DiscordArgs) -> Result<i32> {
    let state = match (&args.state, &args.preset, &args.config) {
        (Some(s), None, None) => parse_state(s)?,
        (None, Some(name), None) => Preset::from_name(name)?.config().initial,
        (None, None, Some(path)) => read_config(path)?.initial,
        (None, None, None) => {
            let mut text = String::new();
            io::stdin().read_to_string(&mut text)?;
            parse_state(text.trim())?
        }
        _ => return Err(Error::Config("give only one of --state, --preset, --config".into())),
    };
    state.ensure_valid()?;
    let minimizer = minimizer_by_name(&args.minimizer)?;
    let minimum = minimizer.minimize(&state)?;
    let breakdown = discord_with(&state, minimizer.as_ref())?;
    let report = json!({
        "state": state,
        "minimizer": minimizer.name(),
        "basis": minimum.basis,
        "breakdown": breakdown,
        "nullity": nullity_check(&state, args.nullity_tol)?,
        "concurrence": concurrence(&state)?,
    });
    write_json(args.out.as_ref(), &report)?;
    Ok(EXIT_OK)
}

fn master_equation(oracle: &OracleArgs, lambda: f64) -> Result<MasterEquation> {
    Ok(MasterEquation {
        n_max: oracle.n_max,
        dt: oracle.dt / lambda,
        convention: DecayConvention::from_name(&oracle.convention)?,
    })
}

fn run_trajectory(args: &DynamicsArgs) -> Result<(RunConfig, Trajectory)> {
    let config = resolve_config(&args.run)?;
    let propagator = propagator_by_name(
        &args.propagator,
        master_equation(&args.oracle, config.params.lambda)?,
    )?;
    let traj = trajectory_with(
        &config.initial,
        &config.params,
        config.grid.t_max,
        config.grid.n_samples,
        propagator.as_ref(),
        config.zero_threshold,
    )?;
    if args.run.show_eq13_as_printed {
        eprintln!("{}", steady_summary(&config));
    }
    Ok((config, traj))
}

pub const CSV_HEADER: &str = "lambda_t,rho11,rho22,rho33,rho44,abs_rho14,abs_rho23,mutual_info,c_m1,c_m2,classical_corr,discord,concurrence";

/// CSV rendering of a trajectory, 17 significant digits per value.
pub fn write_csv<W: Write>(out: &mut W, traj: &Trajectory) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for ((t, s), b) in traj.times.iter().zip(&traj.states).zip(&traj.breakdowns) {
        let row = [
            *t,
            s.p1,
            s.p2,
            s.p3,
            s.p4,
            s.r14,
            s.r23,
            b.mutual_info,
            b.c_m1,
            b.c_m2,
            b.classical_corr,
            b.discord,
            concurrence(s)?,
        ];
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn cmd_evolve(args: &DynamicsArgs) -> Result<i32> {
    let (config, traj) = run_trajectory(args)?;
    let mut out = open_output(config.output.as_ref())?;
    write_csv(&mut out, &traj)?;
    out.flush()?;
    Ok(EXIT_OK)
}

pub fn cmd_zeros(args: &DynamicsArgs) -> Result<i32> {
    let (config, traj) = run_trajectory(args)?;
    write_json(config.output.as_ref(), &traj.zero_events)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Serialize)]
pub struct SteadyCoherenceReport {
    pub initial_r14: f64,
    pub initial_r23: f64,
    /// Long-time limit of the closed-form dynamics, denominator κ² + 4λ².
    pub limit_value: f64,
    /// Same expression with denominator κ² + 16λ².
    pub printed_formula_value: f64,
    pub limit_matches_r23: bool,
    pub printed_matches_r23: bool,
}

pub fn steady_report(config: &RunConfig) -> SteadyCoherenceReport {
    let limit_value = steady_coherence(config.initial.r14, &config.params);
    let printed_formula_value = steady_coherence_printed(config.initial.r14, &config.params);
    SteadyCoherenceReport {
        initial_r14: config.initial.r14,
        initial_r23: config.initial.r23,
        limit_value,
        printed_formula_value,
        limit_matches_r23: (limit_value - config.initial.r23).abs() <= STEADY_MATCH_TOL,
        printed_matches_r23: (printed_formula_value - config.initial.r23).abs() <= STEADY_MATCH_TOL,
    }
}

fn steady_summary(config: &RunConfig) -> String {
    let r = steady_report(config);
    format!(
        "steady |rho14|: limit of dynamics (k^2+4l^2) = {:.6}, printed formula (k^2+16l^2) = {:.6}, |rho23(0)| = {:.6}",
        r.limit_value, r.printed_formula_value, r.initial_r23
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &'static str, value: f64, bound: f64) -> Self {
        Check {
            name,
            value,
            bound,
            pass: value <= bound,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub config: RunConfig,
    pub propagator: Option<DeviationReport>,
    pub propagator_error: Option<String>,
    /// Maximum deviation under the other dissipator convention, for reference.
    pub alternate_convention: Option<(DecayConvention, f64)>,
    pub measurement_sweep: SweepReport,
    pub steady_coherence: SteadyCoherenceReport,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Runs every verification and assembles the report.
pub fn verify(config: &RunConfig, args: &VerifyArgs) -> Result<VerifyReport> {
    let lambda = config.params.lambda;
    let convention = DecayConvention::from_name(&args.oracle.convention)?;
    if args.compare_samples < 1 || !(args.t_end >= 0.0) {
        return Err(Error::InvalidGrid("comparison window needs ≥ 1 sample and t_end ≥ 0".into()));
    }
    let trunc = match args.oracle.n_max {
        Some(n) => FockTruncation::new(n, config.params.alpha_sq),
        None => FockTruncation::auto(config.params.alpha_sq, DEFAULT_TAIL_BOUND),
    };
    let last = (args.compare_samples - 1).max(1) as f64;
    let grid: Vec<f64> = (0..args.compare_samples)
        .map(|k| args.t_end * k as f64 / last / lambda)
        .collect();
    let settings = OracleSettings {
        convention,
        ..OracleSettings::new(trunc, args.oracle.dt / lambda)
    };

    let mut checks = Vec::new();
    let (propagator, propagator_error, alternate) = match compare(&config.initial, &config.params, &grid, &settings) {
        Ok(report) => {
            checks.push(Check::at_most("propagator-deviation", report.max_deviation, MAX_PROPAGATOR_DEVIATION));
            checks.push(Check::at_most("trace-drift", report.diagnostics.max_trace_drift, MAX_TRACE_DRIFT));
            checks.push(Check::at_most("constants-of-motion", report.max_constant_drift, MAX_CONSTANT_DRIFT));
            checks.push(Check::at_most("off-x-residual", report.max_off_x_residual, MAX_OFF_X_RESIDUAL));
            let other = match convention {
                DecayConvention::AmplitudeRate => DecayConvention::EnergyRate,
                DecayConvention::EnergyRate => DecayConvention::AmplitudeRate,
            };
            let alt_settings = OracleSettings {
                convention: other,
                spot_check_every: 0,
                ..settings
            };
            let alt = compare(&config.initial, &config.params, &grid, &alt_settings)
                .ok()
                .map(|r| (other, r.max_deviation));
            (Some(report), None, alt)
        }
        Err(e @ (Error::StepSize { .. } | Error::Truncation { .. })) => {
            checks.push(Check {
                name: "oracle-admissible",
                value: f64::NAN,
                bound: f64::NAN,
                pass: false,
            });
            (None, Some(e.to_string()), None)
        }
        Err(e) => return Err(e),
    };

    let sweep = measurement_sweep(args.sweep_states, args.seed)?;
    checks.push(Check::at_most("measurement-max-gap", sweep.max_abs_gap, crate::sweep::DISCREPANCY_MAX));
    checks.push(Check {
        name: "measurement-fraction-within-1e-4",
        value: sweep.fraction_within(),
        bound: crate::sweep::DISCREPANCY_FRACTION,
        pass: sweep.fraction_within() >= crate::sweep::DISCREPANCY_FRACTION,
    });

    let pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport {
        config: config.clone(),
        propagator,
        propagator_error,
        alternate_convention: alternate,
        measurement_sweep: sweep,
        steady_coherence: steady_report(config),
        checks,
        pass,
    })
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<i32> {
    let config = resolve_config(&args.run)?;
    let report = verify(&config, args)?;

    let mut err = io::stderr().lock();
    if let Some(e) = &report.propagator_error {
        writeln!(err, "oracle rejected: {e}")?;
    }
    if let Some(p) = &report.propagator {
        writeln!(
            err,
            "propagator [{}] n_max={} dt={}: max deviation {:.3e} at lambda_t={:.3}",
            p.convention.name(),
            p.n_max,
            p.dt,
            p.max_deviation,
            p.t_at_max * config.params.lambda
        )?;
    }
    if let Some((conv, dev)) = report.alternate_convention {
        writeln!(err, "  under the {} convention: max deviation {:.3e}", conv.name(), dev)?;
    }
    let sweep = &report.measurement_sweep;
    writeln!(
        err,
        "measurement sweep (seed {}, {} states): max gap {:.3e}, {} logged above 1e-4",
        sweep.seed,
        sweep.n_states,
        sweep.max_abs_gap,
        sweep.discrepancies.len()
    )?;
    for d in &sweep.discrepancies {
        writeln!(err, "  #{} gap {:.3e} at theta={:.4} phi={:.4}: {:?}", d.index, d.gap(), d.theta, d.phi, d.state)?;
    }
    writeln!(err, "{}", steady_summary(&config))?;
    if args.run.show_eq13_as_printed {
        let s = &report.steady_coherence;
        writeln!(
            err,
            "  matches |rho23(0)| within {STEADY_MATCH_TOL}: limit {}, printed {}",
            s.limit_matches_r23, s.printed_matches_r23
        )?;
    }
    for c in &report.checks {
        writeln!(err, "[{}] {} = {:.3e} (bound {:.1e})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.bound)?;
    }
    drop(err);

    write_json(config.output.as_ref(), &report)?;
    Ok(if report.pass { EXIT_OK } else { EXIT_VERIFY })
}

/// Names accepted by `--minimizer` and `--propagator`.
pub fn strategy_names() -> (&'static [&'static str], &'static [&'static str]) {
    (MINIMIZERS, PROPAGATORS)
}
