//! Command-line front end: `curves`, `interpolate`, `solve`, `bench`.
//!
//! Exit codes: 0 success, 1 input error, 2 numerical failure,
//! 3 determinism failure.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::batch::{
    measure_speedup, solve_batch, verify_determinism, BatchError, BatchJob, ExecutionStrategy,
    JobKind, SolveSpec, SpeedupReport, WorkGeometry, WorkItem,
};
use crate::config::{ConfigError, PressureSpec, RunConfig};
use crate::geometry::{
    make_helix, make_lobe, make_tooth, GeometryError, PolylineSample, StreamlineCurve,
    DEFAULT_TOOTH_S0,
};
use crate::hermite::{batch_interpolate, HermiteError};
use crate::io::{
    format_speedup_table, read_pressure_samples, read_streamlines, write_curve_csv,
    write_solutions_csv, write_speedup_csv, write_spline_coeffs_csv, write_spline_samples_csv,
    IoError,
};
use crate::ode::{
    gear_pump_ode, integrate, FluidProperties, InitialConditions, InverseMapMode, Method, OdeError,
    PressureModel,
};

/// Command failure classified by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad input: files, flags, configuration. Exit code 1.
    Input(String),
    /// Numerical failure: solver, guard, interpolation breakdown. Exit code 2.
    Numerical(String),
    /// Strategies disagreed bitwise. Exit code 3.
    Determinism(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Determinism(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Numerical(m) | CliError::Determinism(m) => m,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<HermiteError> for CliError {
    fn from(e: HermiteError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<OdeError> for CliError {
    fn from(e: OdeError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<BatchError> for CliError {
    fn from(e: BatchError) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "streamflow",
    version,
    about = "Streamline velocity fields: catalog curves, cubic Hermite interpolation, per-streamline solves and batch benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a catalog curve (tooth, lobe, helix) to CSV
    Curves(CurvesArgs),
    /// Interpolate sampled streamlines with C1 cubics
    Interpolate(InterpolateArgs),
    /// Solve the velocity equation along streamlines
    Solve(SolveArgs),
    /// Benchmark batch execution strategies and report speedups
    Bench(BenchArgs),
}

#[derive(Args)]
struct CurvesArgs {
    /// Curve name: tooth, lobe or helix
    #[arg(long)]
    name: String,
    /// Tooth profile parameter (domain starts at pi + atan(s0))
    #[arg(long)]
    s0: Option<f64>,
    /// Curve parameters: lobe expects r,phase,omega; helix expects a1,a2,a3,a4
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    params: Vec<f64>,
    /// Parameter domain lo,hi (helix only)
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    domain: Vec<f64>,
    /// Snapshot time for the lobe profile
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    time: f64,
    /// Number of uniform samples (at least 2)
    #[arg(long)]
    samples: usize,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InterpolateArgs {
    /// Streamline samples: CSV (native or curve export) or JSON
    #[arg(long)]
    input: PathBuf,
    /// Output base path: writes <out>.coeffs.csv and <out>.samples.csv
    #[arg(long)]
    out: PathBuf,
    /// Sample count for the sampled-spline CSV
    #[arg(long, default_value_t = 50)]
    resolution: usize,
}

#[derive(Args)]
struct SolveArgs {
    /// Streamline samples to interpolate and solve along
    #[arg(long)]
    input: Option<PathBuf>,
    /// Solve the a-priori gear-pump equation instead of interpolated input
    #[arg(long)]
    gear_pump: bool,
    /// Run configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Fluid density override
    #[arg(long)]
    rho: Option<f64>,
    /// Fluid viscosity override
    #[arg(long)]
    mu: Option<f64>,
    /// Constant pressure override
    #[arg(long, allow_negative_numbers = true)]
    pressure: Option<f64>,
    /// Initial velocity component value
    #[arg(long, allow_negative_numbers = true)]
    u0: Option<f64>,
    /// Initial du/ds value
    #[arg(long, allow_negative_numbers = true)]
    udot0: Option<f64>,
    /// Velocity component index to solve
    #[arg(long, default_value_t = 0)]
    component: usize,
    /// Integration method override (rk4, adams_moulton_2, bdf2)
    #[arg(long)]
    method: Option<Method>,
    /// Step size override
    #[arg(long)]
    step: Option<f64>,
    /// Integration range lo,hi (gear-pump mode)
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    domain: Vec<f64>,
    /// Inverse-map convention override (pseudoinverse, componentwise)
    #[arg(long)]
    convention: Option<InverseMapMode>,
    /// Execution strategy override (serial, shared_pool:W, partitioned:G:W)
    #[arg(long)]
    strategy: Option<ExecutionStrategy>,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Streamline samples to benchmark on
    #[arg(long)]
    input: Option<PathBuf>,
    /// Generate this many synthetic streamlines instead of reading input
    #[arg(long)]
    synthetic: Option<usize>,
    /// Point couples per synthetic streamline
    #[arg(long, default_value_t = 100)]
    pairs: usize,
    /// Strategies to compare against the implicit serial baseline
    #[arg(long, value_delimiter = ',')]
    strategies: Vec<ExecutionStrategy>,
    /// Work per item: interpolate, solve or both
    #[arg(long, default_value = "interpolate")]
    kind: JobKind,
    /// Batch sizes to sweep
    #[arg(long, value_delimiter = ',')]
    m_sweep: Vec<usize>,
    /// Run configuration (solve parameters for kinds solve/both)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exclude timing fields from the CSV so output bytes are reproducible
    #[arg(long)]
    seed_timings_off: bool,
}

/// Parse `std::env::args` and run; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Curves(args) => cmd_curves(&args),
        Command::Interpolate(args) => cmd_interpolate(&args),
        Command::Solve(args) => cmd_solve(&args),
        Command::Bench(args) => cmd_bench(&args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            CliError::Input(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn build_curve(args: &CurvesArgs) -> Result<StreamlineCurve, CliError> {
    match args.name.as_str() {
        "tooth" => {
            if !args.params.is_empty() {
                return Err(CliError::Input(
                    "tooth takes --s0, not --params".to_string(),
                ));
            }
            Ok(make_tooth(args.s0.unwrap_or(DEFAULT_TOOTH_S0))?)
        }
        "lobe" => {
            let [r, phase, omega] = args.params.as_slice() else {
                return Err(CliError::Input(format!(
                    "lobe expects --params r,phase,omega, got {} values",
                    args.params.len()
                )));
            };
            Ok(make_lobe(*r, *phase, *omega)?.snapshot(args.time)?)
        }
        "helix" => {
            let [a1, a2, a3, a4] = args.params.as_slice() else {
                return Err(CliError::Input(format!(
                    "helix expects --params a1,a2,a3,a4, got {} values",
                    args.params.len()
                )));
            };
            let [lo, hi] = args.domain.as_slice() else {
                return Err(CliError::Input(
                    "helix expects --domain lo,hi".to_string(),
                ));
            };
            Ok(make_helix([*a1, *a2, *a3, *a4], (*lo, *hi))?)
        }
        other => Err(CliError::Input(format!(
            "unknown curve name '{other}' (expected tooth, lobe or helix)"
        ))),
    }
}

fn cmd_curves(args: &CurvesArgs) -> Result<(), CliError> {
    if args.samples < 2 {
        return Err(CliError::Input(format!(
            "need at least 2 samples, got {}",
            args.samples
        )));
    }
    let curve = build_curve(args)?;
    let mut out = open_out(args.out.as_deref())?;
    write_curve_csv(&mut out, &curve, args.samples)?;
    Ok(())
}

fn cmd_interpolate(args: &InterpolateArgs) -> Result<(), CliError> {
    let samples = read_streamlines(&args.input)?;
    let splines = batch_interpolate(&samples)?;

    let coeffs_path = PathBuf::from(format!("{}.coeffs.csv", args.out.display()));
    let samples_path = PathBuf::from(format!("{}.samples.csv", args.out.display()));
    let mut coeffs_out = open_out(Some(&coeffs_path))?;
    write_spline_coeffs_csv(&mut coeffs_out, &splines)?;
    let mut samples_out = open_out(Some(&samples_path))?;
    write_spline_samples_csv(&mut samples_out, &splines, args.resolution)?;
    Ok(())
}

struct SolveSetup {
    config: RunConfig,
    fluid: FluidProperties,
    pressure: PressureModel,
}

fn solve_setup(args: &SolveArgs) -> Result<SolveSetup, CliError> {
    let mut config = match &args.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(rho) = args.rho {
        config.fluid_rho = rho;
    }
    if let Some(mu) = args.mu {
        config.fluid_mu = mu;
    }
    if let Some(p) = args.pressure {
        config.pressure = PressureSpec::Constant(p);
    }
    if let Some(method) = args.method {
        config.solver.method = method;
    }
    if let Some(step) = args.step {
        config.solver.step = step;
    }
    if let Some(mode) = args.convention {
        config.convention = mode;
    }
    if let Some(strategy) = args.strategy {
        config.strategy = strategy;
    }
    config.validate()?;
    let fluid = FluidProperties::constant(config.fluid_rho, config.fluid_mu)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let pressure = match &config.pressure {
        PressureSpec::Constant(v) => PressureModel::constant(*v),
        PressureSpec::Samples(path) => {
            let (s, q) = read_pressure_samples(path)?;
            PressureModel::from_samples(&s, &q).map_err(|e| CliError::Input(e.to_string()))?
        }
    };
    Ok(SolveSetup {
        config,
        fluid,
        pressure,
    })
}

fn require_initial(args: &SolveArgs) -> Result<(f64, f64), CliError> {
    match (args.u0, args.udot0) {
        (Some(u0), Some(udot0)) => Ok((u0, udot0)),
        _ => Err(CliError::Input(
            "solve requires --u0 and --udot0".to_string(),
        )),
    }
}

fn cmd_solve(args: &SolveArgs) -> Result<(), CliError> {
    let setup = solve_setup(args)?;
    if args.gear_pump {
        return solve_gear_pump(args, &setup);
    }

    let input = args
        .input
        .clone()
        .or_else(|| setup.config.input.clone())
        .ok_or_else(|| CliError::Input("solve requires --input (or [io] input)".to_string()))?;
    let (u0, udot0) = require_initial(args)?;
    let samples = read_streamlines(&input)?;
    let items: Vec<WorkItem> = samples
        .into_iter()
        .map(|sample| WorkItem {
            geometry: WorkGeometry::Sample(sample),
            solve: Some(SolveSpec {
                fluid: setup.fluid.clone(),
                pressure: setup.pressure.clone(),
                mode: setup.config.convention,
                component: args.component,
                init: InitialConditions {
                    s_start: 0.0,
                    u0,
                    udot0,
                },
                cfg: setup.config.solver,
            }),
        })
        .collect();
    let job = BatchJob::new(items, JobKind::Solve)?;
    let results = solve_batch(&job, &setup.config.strategy)?;

    let solutions: Vec<(usize, _)> = results
        .outputs()
        .iter()
        .enumerate()
        .filter_map(|(i, r)| {
            r.as_ref()
                .ok()
                .and_then(|o| o.solution.as_ref())
                .map(|sol| (i, sol))
        })
        .collect();
    let out_path = args.out.clone().or_else(|| setup.config.output.clone());
    let mut out = open_out(out_path.as_deref())?;
    write_solutions_csv(&mut out, &solutions)?;
    out.flush().map_err(IoError::from)?;

    let failures = results.failures();
    if failures.is_empty() {
        Ok(())
    } else {
        for failure in &failures {
            eprintln!("error: {failure}");
        }
        Err(CliError::Numerical(format!(
            "{} of {} streamlines failed",
            failures.len(),
            results.len()
        )))
    }
}

fn solve_gear_pump(args: &SolveArgs, setup: &SolveSetup) -> Result<(), CliError> {
    let [lo, hi] = args.domain.as_slice() else {
        return Err(CliError::Input(
            "gear-pump mode expects --domain lo,hi".to_string(),
        ));
    };
    let (u0, udot0) = require_initial(args)?;
    let ode = gear_pump_ode(&setup.fluid)?;
    let solution = integrate(
        &ode,
        InitialConditions {
            s_start: *lo,
            u0,
            udot0,
        },
        *hi,
        &setup.config.solver,
    )?;
    let out_path = args.out.clone().or_else(|| setup.config.output.clone());
    let mut out = open_out(out_path.as_deref())?;
    write_solutions_csv(&mut out, &[(0, &solution)])?;
    Ok(())
}

/// Deterministic synthetic workload shaped like the reference benchmark:
/// helix-family streamlines sampled into `pairs + 1` points each.
pub fn synthetic_streamlines(m: usize, pairs: usize) -> Vec<PolylineSample> {
    (0..m)
        .map(|r| {
            let curve = make_helix(
                [1.0 + 0.01 * r as f64, 0.05, 0.1, 0.5 + 0.001 * r as f64],
                (0.0, 2.0 * std::f64::consts::PI),
            )
            .expect("fixed helix domain is valid");
            PolylineSample::from_curve(&curve, pairs + 1).expect("pairs >= 1 gives >= 2 points")
        })
        .collect()
}

fn cmd_bench(args: &BenchArgs) -> Result<(), CliError> {
    if args.pairs == 0 {
        return Err(CliError::Input("--pairs must be at least 1".to_string()));
    }
    let mut m_sweep = if args.m_sweep.is_empty() {
        vec![1, 10, 50, 100, 200, 300]
    } else {
        args.m_sweep.clone()
    };
    m_sweep.sort_unstable();
    m_sweep.dedup();
    if m_sweep.first() == Some(&0) {
        return Err(CliError::Input("batch sizes must be at least 1".to_string()));
    }

    let pool: Vec<PolylineSample> = match (&args.input, args.synthetic) {
        (Some(path), _) => read_streamlines(path)?,
        (None, synthetic) => {
            let m = synthetic.unwrap_or_else(|| *m_sweep.last().expect("sweep not empty"));
            synthetic_streamlines(m, args.pairs)
        }
    };
    m_sweep.retain(|&m| m <= pool.len());
    if m_sweep.is_empty() {
        return Err(CliError::Input(format!(
            "no batch size in the sweep fits the {} available streamlines",
            pool.len()
        )));
    }

    let solve_spec = if matches!(args.kind, JobKind::Solve | JobKind::Both) {
        let config = match &args.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        let fluid = FluidProperties::constant(config.fluid_rho, config.fluid_mu)
            .map_err(|e| CliError::Input(e.to_string()))?;
        let pressure = match &config.pressure {
            PressureSpec::Constant(v) => PressureModel::constant(*v),
            PressureSpec::Samples(path) => {
                let (s, q) = read_pressure_samples(path)?;
                PressureModel::from_samples(&s, &q).map_err(|e| CliError::Input(e.to_string()))?
            }
        };
        Some(SolveSpec {
            fluid,
            pressure,
            mode: config.convention,
            component: 0,
            init: InitialConditions {
                s_start: 0.0,
                u0: 1.0,
                udot0: 0.0,
            },
            cfg: config.solver,
        })
    } else {
        None
    };

    let items: Vec<WorkItem> = pool
        .into_iter()
        .map(|sample| WorkItem {
            geometry: WorkGeometry::Sample(sample),
            solve: solve_spec.clone(),
        })
        .collect();

    let mut strategies = vec![ExecutionStrategy::Serial];
    let extra = if args.strategies.is_empty() {
        vec![
            ExecutionStrategy::SharedPool { workers: 4 },
            ExecutionStrategy::Partitioned {
                groups: 2,
                workers_per_group: 2,
            },
        ]
    } else {
        args.strategies.clone()
    };
    for strategy in extra {
        if !strategies.contains(&strategy) {
            strategies.push(strategy);
        }
    }

    // results would be meaningless if the strategies disagreed (vacuous for
    // a serial-only run)
    if strategies.len() >= 2 {
        let check_m = *m_sweep.last().expect("sweep not empty");
        let check_job = BatchJob::new(items[..check_m].to_vec(), args.kind)?;
        let outcome = verify_determinism(&check_job, &strategies)?;
        if !outcome.identical {
            let report = outcome.divergence.expect("divergence present when not identical");
            return Err(CliError::Determinism(format!(
                "strategy {} diverges from {} at streamline {}: {}",
                report.strategy, report.baseline, report.item, report.detail
            )));
        }
    }

    let mut reports: Vec<SpeedupReport> = Vec::with_capacity(m_sweep.len());
    for &m in &m_sweep {
        let job = BatchJob::new(items[..m].to_vec(), args.kind)?;
        reports.push(measure_speedup(&job, &strategies)?);
    }

    eprint!("{}", format_speedup_table(&reports));
    for report in &reports {
        if report.m == 1 {
            eprintln!("note: M = 1 speedups at or below 1 are expected (overhead dominates)");
        }
        for warning in &report.warnings {
            eprintln!("warning: M = {}: {}", report.m, warning);
        }
    }
    if let Some(report) = reports.last() {
        for row in &report.rows {
            if let Some(bytes) = row.peak_rss_bytes {
                eprintln!(
                    "note: M = {}: {} peak RSS {:.1} MiB (process high-water mark)",
                    report.m,
                    row.strategy.label(),
                    bytes as f64 / (1024.0 * 1024.0)
                );
            }
        }
    }

    let mut out = open_out(args.out.as_deref())?;
    write_speedup_csv(&mut out, &reports, !args.seed_timings_off)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::error::ErrorKind;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn unknown_subcommand_is_input_error() {
        match Cli::try_parse_from(["streamflow", "frobnicate"]) {
            Err(e) => assert!(!matches!(
                e.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            )),
            Ok(_) => panic!("unknown subcommand parsed"),
        }
    }

    #[test]
    fn synthetic_workload_shape() {
        let lines = synthetic_streamlines(3, 100);
        assert_eq!(lines.len(), 3);
        assert!(lines.iter().all(|l| l.len() == 101));
        assert!(lines.iter().all(|l| l.dim() == 3));
    }

    #[test]
    fn curves_arg_validation() {
        let args = CurvesArgs {
            name: "lobe".into(),
            s0: None,
            params: vec![2.0],
            domain: vec![],
            time: 0.0,
            samples: 8,
            out: None,
        };
        assert!(matches!(build_curve(&args), Err(CliError::Input(_))));

        let args = CurvesArgs {
            name: "helix".into(),
            s0: None,
            params: vec![1.0, 0.0, 0.0, 1.0],
            domain: vec![0.0, 0.0],
            time: 0.0,
            samples: 2,
            out: None,
        };
        // degenerate domain comes back as an input error
        assert!(matches!(build_curve(&args), Err(CliError::Input(_))));
    }
}
