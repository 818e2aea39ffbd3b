//! Embarrassingly parallel batch solving of independent streamlines.
//!
//! A [`BatchJob`] holds `M` independent work items (interpolation and/or
//! chained solving); [`solve_batch`] runs one under an
//! [`ExecutionStrategy`]:
//!
//! - `Serial`: a plain loop, the timing baseline.
//! - `SharedPool(W)`: one pool of `W` workers over the shared item list,
//!   mirroring a single multicore kernel over shared memory.
//! - `Partitioned(G, W_g)`: `G` groups with private copies of their data
//!   chunk, each running `W_g` workers, mirroring independent kernels over
//!   distributed memory. Data is equi-distributed before timing starts and
//!   group results are merged into global order only after the timed region.
//!
//! Work assignment is static round-robin by streamline index, results come
//! back in input order, and every strategy must produce bitwise-identical
//! output (identical code on identical data, no shared mutable state);
//! [`verify_determinism`] checks exactly that. [`measure_speedup`] times the
//! full task per strategy (wall clock around distribution, computation and
//! collection; worker times are never summed) and reports
//! `S = T_serial / T_strategy`.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::geometry::PolylineSample;
use crate::hermite::HermiteSpline;
use crate::ode::{
    chain_solve, FluidProperties, InitialConditions, InverseMapMode, OdeSolution, PressureModel,
    SolverConfig,
};

#[derive(Debug, Error)]
pub enum BatchError {
    #[error("a batch job needs at least one work item")]
    EmptyJob,
    #[error("work item {index} lacks the solve parameters required by job kind {kind}")]
    MissingSolveSpec { index: usize, kind: JobKind },
    #[error("invalid execution strategy: {0}")]
    InvalidStrategy(String),
    #[error("speedup measurement requires the serial strategy as baseline")]
    MissingSerialBaseline,
    #[error("determinism verification needs at least two strategies")]
    NeedTwoStrategies,
}

/// What to compute per streamline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JobKind {
    Interpolate,
    Solve,
    Both,
}

impl JobKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            JobKind::Interpolate => "interpolate",
            JobKind::Solve => "solve",
            JobKind::Both => "both",
        }
    }

    fn needs_solve(&self) -> bool {
        matches!(self, JobKind::Solve | JobKind::Both)
    }
}

impl fmt::Display for JobKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for JobKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "interpolate" => Ok(JobKind::Interpolate),
            "solve" => Ok(JobKind::Solve),
            "both" => Ok(JobKind::Both),
            other => Err(format!(
                "unknown job kind '{other}' (expected interpolate, solve or both)"
            )),
        }
    }
}

/// Geometry of one work item: raw samples or an already interpolated spline.
#[derive(Debug, Clone)]
pub enum WorkGeometry {
    Sample(PolylineSample),
    Spline(HermiteSpline),
}

/// Per-item solve parameters for job kinds `solve` and `both`.
#[derive(Debug, Clone)]
pub struct SolveSpec {
    pub fluid: FluidProperties,
    pub pressure: PressureModel,
    pub mode: InverseMapMode,
    pub component: usize,
    pub init: InitialConditions,
    pub cfg: SolverConfig,
}

/// One independent streamline job.
#[derive(Debug, Clone)]
pub struct WorkItem {
    pub geometry: WorkGeometry,
    pub solve: Option<SolveSpec>,
}

/// `M` independent work items plus the kind of work to perform on each.
#[derive(Debug, Clone)]
pub struct BatchJob {
    items: Vec<WorkItem>,
    kind: JobKind,
}

impl BatchJob {
    pub fn new(items: Vec<WorkItem>, kind: JobKind) -> Result<Self, BatchError> {
        if items.is_empty() {
            return Err(BatchError::EmptyJob);
        }
        if kind.needs_solve() {
            if let Some(index) = items.iter().position(|item| item.solve.is_none()) {
                return Err(BatchError::MissingSolveSpec { index, kind });
            }
        }
        Ok(Self { items, kind })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn kind(&self) -> JobKind {
        self.kind
    }

    pub fn items(&self) -> &[WorkItem] {
        &self.items
    }
}

/// How to distribute the batch across workers. Worker counts are explicit
/// parameters, never ambient state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecutionStrategy {
    Serial,
    SharedPool { workers: usize },
    Partitioned { groups: usize, workers_per_group: usize },
}

impl ExecutionStrategy {
    pub fn label(&self) -> String {
        match self {
            ExecutionStrategy::Serial => "serial".into(),
            ExecutionStrategy::SharedPool { workers } => format!("shared_pool:{workers}"),
            ExecutionStrategy::Partitioned {
                groups,
                workers_per_group,
            } => format!("partitioned:{groups}:{workers_per_group}"),
        }
    }

    pub fn total_workers(&self) -> usize {
        match self {
            ExecutionStrategy::Serial => 1,
            ExecutionStrategy::SharedPool { workers } => *workers,
            ExecutionStrategy::Partitioned {
                groups,
                workers_per_group,
            } => groups * workers_per_group,
        }
    }

    fn validate(&self) -> Result<(), BatchError> {
        let ok = match self {
            ExecutionStrategy::Serial => true,
            ExecutionStrategy::SharedPool { workers } => *workers >= 1,
            ExecutionStrategy::Partitioned {
                groups,
                workers_per_group,
            } => *groups >= 1 && *workers_per_group >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(BatchError::InvalidStrategy(format!(
                "worker counts must be at least 1, got {}",
                self.label()
            )))
        }
    }
}

impl fmt::Display for ExecutionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for ExecutionStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let parse = |x: &str| {
            x.parse::<usize>()
                .map_err(|_| format!("invalid worker count '{x}' in strategy '{s}'"))
        };
        match parts.as_slice() {
            ["serial"] => Ok(ExecutionStrategy::Serial),
            ["shared_pool", w] => Ok(ExecutionStrategy::SharedPool { workers: parse(w)? }),
            ["partitioned", g, w] => Ok(ExecutionStrategy::Partitioned {
                groups: parse(g)?,
                workers_per_group: parse(w)?,
            }),
            _ => Err(format!(
                "unknown strategy '{s}' (expected serial, shared_pool:W or partitioned:G:W)"
            )),
        }
    }
}

/// Output of one work item: the interpolated spline and/or the chained
/// solution, depending on the job kind.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkOutput {
    pub spline: Option<HermiteSpline>,
    pub solution: Option<OdeSolution>,
}

/// Failure of one work item; the rest of the batch still completes.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("streamline {index}: {message}")]
pub struct ItemFailure {
    pub index: usize,
    pub message: String,
}

pub type ItemResult = Result<WorkOutput, ItemFailure>;

/// Per-item results in input order; exactly one entry per input index.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchResults {
    outputs: Vec<ItemResult>,
}

impl BatchResults {
    pub fn from_outputs(outputs: Vec<ItemResult>) -> Self {
        Self { outputs }
    }

    pub fn outputs(&self) -> &[ItemResult] {
        &self.outputs
    }

    pub fn into_outputs(self) -> Vec<ItemResult> {
        self.outputs
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    /// Indices and messages of failed items.
    pub fn failures(&self) -> Vec<&ItemFailure> {
        self.outputs.iter().filter_map(|r| r.as_ref().err()).collect()
    }
}

fn run_item(index: usize, item: &WorkItem, kind: JobKind) -> ItemResult {
    let fail = |message: String| ItemFailure { index, message };
    let spline = match &item.geometry {
        WorkGeometry::Sample(sample) => {
            HermiteSpline::interpolate(sample).map_err(|e| fail(e.to_string()))?
        }
        WorkGeometry::Spline(spline) => spline.clone(),
    };
    let solution = if kind.needs_solve() {
        let spec = item
            .solve
            .as_ref()
            .expect("job construction guarantees solve specs");
        Some(
            chain_solve(
                &spline,
                &spec.fluid,
                &spec.pressure,
                spec.mode,
                spec.component,
                spec.init,
                &spec.cfg,
            )
            .map_err(|e| fail(e.to_string()))?,
        )
    } else {
        None
    };
    Ok(WorkOutput {
        spline: matches!(kind, JobKind::Interpolate | JobKind::Both).then_some(spline),
        solution,
    })
}

fn run_serial(items: &[WorkItem], kind: JobKind) -> Vec<ItemResult> {
    items
        .iter()
        .enumerate()
        .map(|(i, item)| run_item(i, item, kind))
        .collect()
}

/// Round-robin pool over a shared item slice; workers fill only their own
/// output buffers, merged by index after the join barrier.
fn run_pool(items: &[WorkItem], kind: JobKind, workers: usize) -> Vec<ItemResult> {
    if workers <= 1 || items.len() <= 1 {
        return run_serial(items, kind);
    }
    let mut merged: Vec<Option<ItemResult>> = vec![None; items.len()];
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                scope.spawn(move || {
                    let mut out = Vec::with_capacity(items.len() / workers + 1);
                    let mut i = w;
                    while i < items.len() {
                        out.push((i, run_item(i, &items[i], kind)));
                        i += workers;
                    }
                    out
                })
            })
            .collect();
        for handle in handles {
            for (i, result) in handle.join().expect("worker panicked") {
                merged[i] = Some(result);
            }
        }
    });
    merged
        .into_iter()
        .map(|r| r.expect("round-robin covers every index"))
        .collect()
}

/// Contiguous equi-distribution of `m` items over `g` groups.
fn partition_sizes(m: usize, g: usize) -> Vec<usize> {
    let g = g.min(m).max(1);
    let base = m / g;
    let extra = m % g;
    (0..g).map(|i| base + usize::from(i < extra)).collect()
}

struct TimedRun {
    results: Vec<ItemResult>,
    elapsed: Duration,
}

fn run_strategy(job: &BatchJob, strategy: &ExecutionStrategy) -> TimedRun {
    match strategy {
        ExecutionStrategy::Serial => {
            let start = Instant::now();
            let results = run_serial(&job.items, job.kind);
            TimedRun {
                elapsed: start.elapsed(),
                results,
            }
        }
        ExecutionStrategy::SharedPool { workers } => {
            // full task timed: spawning, computing and collecting
            let start = Instant::now();
            let results = run_pool(&job.items, job.kind, *workers);
            TimedRun {
                elapsed: start.elapsed(),
                results,
            }
        }
        ExecutionStrategy::Partitioned {
            groups,
            workers_per_group,
        } => {
            // Private copies are distributed to the groups before the clock
            // starts (the data was "previously equi-distributed"); the global
            // merge happens after it stops.
            let sizes = partition_sizes(job.items.len(), *groups);
            let mut chunks: Vec<Vec<WorkItem>> = Vec::with_capacity(sizes.len());
            let mut offset = 0;
            for size in &sizes {
                chunks.push(job.items[offset..offset + size].to_vec());
                offset += size;
            }

            let start = Instant::now();
            let group_results: Vec<Vec<ItemResult>> = std::thread::scope(|scope| {
                let handles: Vec<_> = chunks
                    .iter()
                    .map(|chunk| {
                        scope.spawn(move || run_pool(chunk, job.kind, *workers_per_group))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("group worker panicked"))
                    .collect()
            });
            let elapsed = start.elapsed();

            // indices are chunk-local; restore global indices while merging
            let mut results = Vec::with_capacity(job.items.len());
            let mut offset = 0usize;
            for (chunk_results, size) in group_results.into_iter().zip(&sizes) {
                results.extend(chunk_results.into_iter().map(|r| {
                    r.map_err(|e| ItemFailure {
                        index: e.index + offset,
                        message: e.message,
                    })
                }));
                offset += size;
            }
            TimedRun { results, elapsed }
        }
    }
}

/// Run the batch under one strategy. Results come back in input order with
/// one entry per item; failed items carry their index and message while the
/// rest complete.
pub fn solve_batch(job: &BatchJob, strategy: &ExecutionStrategy) -> Result<BatchResults, BatchError> {
    strategy.validate()?;
    let run = run_strategy(job, strategy);
    Ok(BatchResults {
        outputs: run.results,
    })
}

/// Wall-clock timing and speedup for one strategy.
#[derive(Debug, Clone)]
pub struct StrategyTiming {
    pub strategy: ExecutionStrategy,
    pub workers: usize,
    pub elapsed: Duration,
    /// `T_serial / T_strategy`.
    pub speedup: f64,
    /// Set when the elapsed time is under 100x the timer resolution.
    pub unreliable: bool,
    /// Process peak RSS after this strategy's runs (a monotone high-water
    /// mark, recorded for context; no failure threshold is attached).
    pub peak_rss_bytes: Option<u64>,
}

fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kib: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kib * 1024)
}

/// Measured timings for one batch job across strategies.
#[derive(Debug, Clone)]
pub struct SpeedupReport {
    pub m: usize,
    pub kind: JobKind,
    /// Available parallelism of the machine the report was taken on.
    pub core_count: usize,
    pub timer_resolution: Duration,
    pub rows: Vec<StrategyTiming>,
    pub warnings: Vec<String>,
}

/// Timed repetitions per strategy (median taken); one warm-up run per
/// strategy is excluded.
pub const SPEEDUP_REPETITIONS: usize = 5;

fn timer_resolution() -> Duration {
    let mut best = Duration::from_secs(1);
    for _ in 0..16 {
        let t0 = Instant::now();
        let mut t1 = Instant::now();
        while t1 == t0 {
            t1 = Instant::now();
        }
        best = best.min(t1 - t0);
    }
    best
}

fn median_duration(mut xs: Vec<Duration>) -> Duration {
    xs.sort();
    xs[xs.len() / 2]
}

/// Time the job under each strategy: one warm-up plus
/// [`SPEEDUP_REPETITIONS`] timed runs each, median elapsed, speedup against
/// the serial baseline (which must be present). Flags rows whose elapsed
/// time is too close to the timer resolution, and warns (never fails) when
/// the shared pool does not reach the partitioned strategy's speedup.
pub fn measure_speedup(
    job: &BatchJob,
    strategies: &[ExecutionStrategy],
) -> Result<SpeedupReport, BatchError> {
    for strategy in strategies {
        strategy.validate()?;
    }
    if !strategies.contains(&ExecutionStrategy::Serial) {
        return Err(BatchError::MissingSerialBaseline);
    }
    let resolution = timer_resolution();

    let mut medians = Vec::with_capacity(strategies.len());
    let mut peaks = Vec::with_capacity(strategies.len());
    for strategy in strategies {
        let _warmup = run_strategy(job, strategy);
        let reps: Vec<Duration> = (0..SPEEDUP_REPETITIONS)
            .map(|_| run_strategy(job, strategy).elapsed)
            .collect();
        medians.push(median_duration(reps));
        peaks.push(peak_rss_bytes());
    }
    let serial_index = strategies
        .iter()
        .position(|s| *s == ExecutionStrategy::Serial)
        .expect("checked above");
    let t_serial = medians[serial_index];

    let mut warnings = Vec::new();
    let rows: Vec<StrategyTiming> = strategies
        .iter()
        .zip(&medians)
        .zip(&peaks)
        .map(|((strategy, &elapsed), &peak)| {
            let unreliable = elapsed < resolution * 100;
            if unreliable {
                warnings.push(format!(
                    "{}: elapsed {:?} is under 100x the timer resolution {:?}; speedup unreliable",
                    strategy.label(),
                    elapsed,
                    resolution
                ));
            }
            // the baseline against itself is exactly 1 by definition; other
            // rows guard against sub-resolution elapsed times
            let speedup = if *strategy == ExecutionStrategy::Serial {
                1.0
            } else {
                t_serial.as_secs_f64() / elapsed.as_secs_f64().max(1e-12)
            };
            StrategyTiming {
                strategy: *strategy,
                workers: strategy.total_workers(),
                elapsed,
                speedup,
                unreliable,
                peak_rss_bytes: peak,
            }
        })
        .collect();

    let find = |target: &ExecutionStrategy| rows.iter().find(|r| r.strategy == *target);
    if let (Some(shared), Some(part)) = (
        find(&ExecutionStrategy::SharedPool { workers: 4 }),
        find(&ExecutionStrategy::Partitioned {
            groups: 2,
            workers_per_group: 2,
        }),
    ) {
        if shared.speedup < part.speedup {
            warnings.push(format!(
                "expected shared_pool:4 (S = {:.2}) to reach at least partitioned:2:2 (S = {:.2}); hardware-dependent",
                shared.speedup, part.speedup
            ));
        }
    }

    Ok(SpeedupReport {
        m: job.len(),
        kind: job.kind,
        core_count: std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1),
        timer_resolution: resolution,
        rows,
        warnings,
    })
}

/// First bitwise divergence between two result streams, if any.
pub fn first_divergence(a: &BatchResults, b: &BatchResults) -> Option<(usize, String)> {
    if a.len() != b.len() {
        return Some((
            a.len().min(b.len()),
            format!("result counts differ: {} vs {}", a.len(), b.len()),
        ));
    }
    for (i, (ra, rb)) in a.outputs.iter().zip(&b.outputs).enumerate() {
        match (ra, rb) {
            (Ok(oa), Ok(ob)) => {
                if let Some(detail) = output_divergence(oa, ob) {
                    return Some((i, detail));
                }
            }
            (Err(ea), Err(eb)) => {
                if ea != eb {
                    return Some((i, format!("errors differ: '{ea}' vs '{eb}'")));
                }
            }
            (Ok(_), Err(e)) => return Some((i, format!("ok vs error '{e}'"))),
            (Err(e), Ok(_)) => return Some((i, format!("error '{e}' vs ok"))),
        }
    }
    None
}

fn bits_differ(x: f64, y: f64) -> bool {
    x.to_bits() != y.to_bits()
}

fn output_divergence(a: &WorkOutput, b: &WorkOutput) -> Option<String> {
    match (&a.spline, &b.spline) {
        (Some(sa), Some(sb)) => {
            if sa.segment_count() != sb.segment_count() {
                return Some(format!(
                    "segment counts differ: {} vs {}",
                    sa.segment_count(),
                    sb.segment_count()
                ));
            }
            for (m, (ga, gb)) in sa.segments().iter().zip(sb.segments()).enumerate() {
                for (c, (qa, qb)) in ga.coeffs().iter().zip(gb.coeffs()).enumerate() {
                    for k in 0..4 {
                        if bits_differ(qa[k], qb[k]) {
                            return Some(format!(
                                "spline segment {m} component {c} coefficient {k}: {} vs {}",
                                qa[k], qb[k]
                            ));
                        }
                    }
                }
            }
        }
        (None, None) => {}
        _ => return Some("spline presence differs".into()),
    }
    match (&a.solution, &b.solution) {
        (Some(sa), Some(sb)) => {
            if sa.samples().len() != sb.samples().len() {
                return Some(format!(
                    "sample counts differ: {} vs {}",
                    sa.samples().len(),
                    sb.samples().len()
                ));
            }
            for (k, (xa, xb)) in sa.samples().iter().zip(sb.samples()).enumerate() {
                if bits_differ(xa.s, xb.s)
                    || bits_differ(xa.u, xb.u)
                    || bits_differ(xa.udot, xb.udot)
                    || xa.segment != xb.segment
                {
                    return Some(format!("solution sample {k}: {xa:?} vs {xb:?}"));
                }
            }
            if sa.diagnostics() != sb.diagnostics() {
                return Some("solver diagnostics differ".into());
            }
        }
        (None, None) => {}
        _ => return Some("solution presence differs".into()),
    }
    None
}

/// Report of the first divergence found by [`verify_determinism`].
#[derive(Debug, Clone)]
pub struct DivergenceReport {
    pub baseline: String,
    pub strategy: String,
    pub item: usize,
    pub detail: String,
}

/// Outcome of a determinism check across strategies.
#[derive(Debug, Clone)]
pub struct DeterminismOutcome {
    pub identical: bool,
    pub divergence: Option<DivergenceReport>,
}

/// Run the job under every strategy and compare the result streams bitwise
/// against the first strategy's stream.
pub fn verify_determinism(
    job: &BatchJob,
    strategies: &[ExecutionStrategy],
) -> Result<DeterminismOutcome, BatchError> {
    if strategies.len() < 2 {
        return Err(BatchError::NeedTwoStrategies);
    }
    let baseline = solve_batch(job, &strategies[0])?;
    for strategy in &strategies[1..] {
        let candidate = solve_batch(job, strategy)?;
        if let Some((item, detail)) = first_divergence(&baseline, &candidate) {
            return Ok(DeterminismOutcome {
                identical: false,
                divergence: Some(DivergenceReport {
                    baseline: strategies[0].label(),
                    strategy: strategy.label(),
                    item,
                    detail,
                }),
            });
        }
    }
    Ok(DeterminismOutcome {
        identical: true,
        divergence: None,
    })
}
