//! Command-line front end: single solves, experiment sweeps and the acceptance gate.
//!
//! Exit status is 0 when every contract passes, 1 when one fails or a run
//! errors out, and 2 on usage or configuration errors.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gauge_dnls::evolver::{solve_direct, solve_gauged, solve_regularized, SolverConfig, Trajectory};
use gauge_dnls::harness::gate::run_gate;
use gauge_dnls::harness::{run_experiment, with_pool, ExperimentConfig, ExperimentKind, Report, Timings};
use gauge_dnls::initial_data::InitialData;
use gauge_dnls::spectral::GridSpec;
use gauge_dnls::{Coefficients, Error};
use serde::Deserialize;

const DEFAULT_GATE_SEED: u64 = 20240611;

#[derive(Parser, Debug)]
#[command(
    name = "gauge-dnls",
    version,
    about = "Gauge-transform solver and diagnostics for the quadratic derivative NLS"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one initial-value problem and write its trajectory.
    Solve(Common),
    /// Convergence rate of the regularized solutions as epsilon goes to 0.
    ConvergeEps(Common),
    /// Joint limit over mollification and regularization.
    JointLimit(Common),
    /// Rates of the Bona-Smith mollifier.
    BonaSmith(Common),
    /// Mass and energy drift in the special case.
    Conserve(Common),
    /// Lipschitz ratios of the flow map.
    Lipschitz(Common),
    /// Frequency-envelope diagnostics.
    Envelope(Common),
    /// Space-time estimates for the free propagator.
    Strichartz(Common),
    /// Direct solver against the gauged one.
    Compare(Common),
    /// Run every acceptance criterion.
    Gate(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// JSON config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the seed of the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Suppress the per-contract summary on stdout.
    #[arg(long)]
    quiet: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum SolveMode {
    /// Gauged solver at epsilon = 0, regularized solver otherwise.
    #[default]
    Auto,
    Regularized,
    Gauged,
    Direct,
}

fn default_grid() -> GridSpec {
    GridSpec {
        n: 512,
        length: 80.0,
        x_left: -40.0,
    }
}

fn default_initial_data() -> InitialData {
    InitialData::gaussian(0.5, 2.0, 0.0)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolveConfig {
    #[serde(default = "default_grid")]
    grid: GridSpec,
    #[serde(default)]
    solver: SolverConfig,
    #[serde(default = "Coefficients::canonical_special")]
    coefficients: Coefficients,
    #[serde(default = "default_initial_data")]
    initial_data: InitialData,
    #[serde(default)]
    mode: SolveMode,
}

/// Failures mapped onto exit codes.
enum Failure {
    Usage(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidParameter(_) | Error::InvalidGrid(_) => Failure::Usage(e.to_string()),
            other => Failure::Run(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

fn read_config(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))
}

fn create_out(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", dir.display())))
}

fn experiment_config(kind: ExperimentKind, args: &Common) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_json(&read_config(path)?)?,
        None => ExperimentConfig::with_defaults(kind),
    };
    if cfg.kind != kind {
        return Err(Failure::Usage(format!(
            "config is for {} but the subcommand runs {}",
            cfg.kind.name(),
            kind.name()
        )));
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn write_report(report: &Report, args: &Common, elapsed: f64) -> Result<(), Failure> {
    let name = report.experiment.name();
    fs::write(args.out.join(format!("{name}.json")), report.to_json()?)?;
    if args.format == Format::Csv {
        report.write_csv(BufWriter::new(File::create(args.out.join(format!("{name}.csv")))?))?;
    }
    let mut timings = Timings::default();
    timings.seconds.insert(name.to_string(), elapsed);
    fs::write(
        args.out.join(format!("{name}.timings.json")),
        serde_json::to_string_pretty(&timings).map_err(Error::from)?,
    )?;
    Ok(())
}

fn run_kind(kind: ExperimentKind, args: &Common) -> Result<bool, Failure> {
    let cfg = experiment_config(kind, args)?;
    create_out(&args.out)?;
    let start = Instant::now();
    let report = run_experiment(&cfg)?;
    write_report(&report, args, start.elapsed().as_secs_f64())?;
    if !args.quiet {
        for c in &report.contracts {
            let status = if c.passed { "PASS" } else { "FAIL" };
            println!("[{status}] {}: {:.4e} {} {:.4e}", c.name, c.value, c.relation, c.bound);
        }
        for f in &report.failures {
            println!("[FAIL] {}: {}", f.point, f.error);
        }
    }
    Ok(report.passed)
}

fn write_trajectory(traj: &Trajectory, args: &Common) -> Result<(), Failure> {
    match args.format {
        Format::Csv => traj.write_csv(BufWriter::new(File::create(args.out.join("trajectory.csv"))?))?,
        Format::Json => fs::write(
            args.out.join("trajectory.json"),
            serde_json::to_string(&traj.to_json_dump()).map_err(Error::from)?,
        )?,
    }
    Ok(())
}

fn run_solve(args: &Common) -> Result<bool, Failure> {
    let cfg: SolveConfig = match &args.config {
        Some(path) => serde_json::from_str(&read_config(path)?).map_err(|e| Failure::Usage(e.to_string()))?,
        None => serde_json::from_str("{}").expect("defaults deserialize"),
    };
    cfg.solver.validate()?;
    let grid = cfg.grid.build()?;
    let phi = cfg.initial_data.build(&grid)?;
    create_out(&args.out)?;
    let result = with_pool(|| match cfg.mode {
        SolveMode::Auto if cfg.solver.epsilon == 0.0 => solve_gauged(&phi, &cfg.coefficients, &cfg.solver),
        SolveMode::Auto | SolveMode::Regularized => solve_regularized(&phi, &cfg.coefficients, &cfg.solver),
        SolveMode::Gauged => solve_gauged(&phi, &cfg.coefficients, &cfg.solver),
        SolveMode::Direct => solve_direct(&phi, &cfg.coefficients, &cfg.solver),
    })?;
    match result {
        Ok(traj) => {
            write_trajectory(&traj, args)?;
            if !args.quiet {
                println!("{} samples, {:?}", traj.len(), traj.termination());
            }
            Ok(true)
        }
        Err(Error::SolveAborted { t, source, partial }) => {
            write_trajectory(&partial, args)?;
            Err(Failure::Run(format!("solve aborted at t = {t}: {source}")))
        }
        Err(e) => Err(e.into()),
    }
}

fn run_gate_command(args: &Common) -> Result<bool, Failure> {
    if args.config.is_some() {
        return Err(Failure::Usage("gate takes no config".into()));
    }
    create_out(&args.out)?;
    let start = Instant::now();
    let report = run_gate(args.seed.unwrap_or(DEFAULT_GATE_SEED))?;
    fs::write(args.out.join("gate.json"), report.to_json()?)?;
    let mut timings = Timings::default();
    timings.seconds.insert("gate".into(), start.elapsed().as_secs_f64());
    fs::write(
        args.out.join("gate.timings.json"),
        serde_json::to_string_pretty(&timings).map_err(Error::from)?,
    )?;
    if !args.quiet {
        for c in &report.criteria {
            println!("{}", c.summary());
        }
    }
    Ok(report.passed)
}

fn dispatch(command: &Command) -> Result<bool, Failure> {
    match command {
        Command::Solve(a) => run_solve(a),
        Command::ConvergeEps(a) => run_kind(ExperimentKind::EpsConvergence, a),
        Command::JointLimit(a) => run_kind(ExperimentKind::JointLimit, a),
        Command::BonaSmith(a) => run_kind(ExperimentKind::BonaSmith, a),
        Command::Conserve(a) => run_kind(ExperimentKind::Conservation, a),
        Command::Lipschitz(a) => run_kind(ExperimentKind::LipschitzFlow, a),
        Command::Envelope(a) => run_kind(ExperimentKind::Envelope, a),
        Command::Strichartz(a) => run_kind(ExperimentKind::Strichartz, a),
        Command::Compare(a) => run_kind(ExperimentKind::DirectVsGauged, a),
        Command::Gate(a) => run_gate_command(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
