//! Fixed-step integrators for the reduced streamline equations.
//!
//! The second-order scalar equation is advanced as the first-order system
//! `y = (u, udot)`. Three schemes are provided: classical RK4, the
//! second-order Adams-Moulton (trapezoidal) scheme and BDF2; the implicit
//! schemes handle the `u udot` nonlinearity with a full Newton iteration on
//! the stage equation, seeded by an explicit Euler predictor. Step size is
//! fixed (the requested step is shrunk uniformly so the grid lands exactly
//! on the interval end); [`halve_step_order_check`] is the verification
//! harness for the schemes' convergence orders.

use std::fmt;
use std::str::FromStr;

use crate::hermite::HermiteSpline;

use super::{
    build_ode, FluidProperties, InverseMapConvention, InverseMapMode, OdeError, PressureModel,
    StreamlineODE, PROBE_POINTS,
};

/// Integration scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk4,
    AdamsMoulton2,
    Bdf2,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Rk4 => "rk4",
            Method::AdamsMoulton2 => "adams_moulton_2",
            Method::Bdf2 => "bdf2",
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rk4" => Ok(Method::Rk4),
            "adams_moulton_2" => Ok(Method::AdamsMoulton2),
            "bdf2" => Ok(Method::Bdf2),
            other => Err(format!(
                "unknown method '{other}' (expected rk4, adams_moulton_2 or bdf2)"
            )),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Solver parameters. `step` is the requested grid spacing; implicit
/// schemes stop their Newton iteration once the stage residual drops below
/// `newton_tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    pub step: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub max_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: Method::AdamsMoulton2,
            step: 0.01,
            newton_tol: 1e-10,
            newton_max_iter: 25,
            max_steps: 10_000_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), OdeError> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(OdeError::InvalidConfig(format!(
                "step must be positive and finite, got {}",
                self.step
            )));
        }
        if !(self.newton_tol > 0.0) {
            return Err(OdeError::InvalidConfig(format!(
                "newton_tol must be positive, got {}",
                self.newton_tol
            )));
        }
        if self.newton_max_iter == 0 {
            return Err(OdeError::InvalidConfig(
                "newton_max_iter must be at least 1".into(),
            ));
        }
        if self.max_steps == 0 {
            return Err(OdeError::InvalidConfig("max_steps must be at least 1".into()));
        }
        Ok(())
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }
}

/// Starting state `(u, udot)` at `s_start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialConditions {
    pub s_start: f64,
    pub u0: f64,
    pub udot0: f64,
}

/// One solution sample; `segment` is the spline segment index for chained
/// solves (0 for plain integrations).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionSample {
    pub s: f64,
    pub u: f64,
    pub udot: f64,
    pub segment: usize,
}

/// Solver counters. Fixed-step runs never reject steps, so
/// `rejected_steps` stays zero unless a failed run is retained.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Diagnostics {
    pub steps: usize,
    pub newton_iterations: usize,
    pub rejected_steps: usize,
    pub guard_activations: usize,
}

/// Sampled `(s, u, udot)` trajectory plus diagnostics; `s` is strictly
/// increasing and the first sample equals the initial conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolution {
    samples: Vec<SolutionSample>,
    diagnostics: Diagnostics,
}

impl OdeSolution {
    pub fn samples(&self) -> &[SolutionSample] {
        &self.samples
    }

    pub fn diagnostics(&self) -> Diagnostics {
        self.diagnostics
    }

    pub fn last(&self) -> &SolutionSample {
        self.samples.last().expect("solutions are never empty")
    }

    /// Terminal `(u, udot)`, e.g. for checking against known end data or
    /// chaining into the next segment.
    pub fn end_values(&self) -> (f64, f64) {
        let last = self.last();
        (last.u, last.udot)
    }
}

type State = [f64; 2];

fn axpy(y: State, a: f64, x: State) -> State {
    [y[0] + a * x[0], y[1] + a * x[1]]
}

fn eval_system(ode: &StreamlineODE, s: f64, y: State) -> Result<State, OdeError> {
    Ok([y[1], ode.rhs(s, y[0], y[1])?])
}

fn rk4_step(ode: &StreamlineODE, s: f64, h: f64, y: State) -> Result<State, OdeError> {
    let k1 = eval_system(ode, s, y)?;
    let k2 = eval_system(ode, s + 0.5 * h, axpy(y, 0.5 * h, k1))?;
    let k3 = eval_system(ode, s + 0.5 * h, axpy(y, 0.5 * h, k2))?;
    let k4 = eval_system(ode, s + h, axpy(y, h, k3))?;
    Ok([
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ])
}

/// Newton solve of the stage equation `Y = base + gamma f(s1, Y)`,
/// seeded with `predictor`. Returns the solution and iteration count.
fn newton_solve(
    ode: &StreamlineODE,
    s1: f64,
    gamma: f64,
    base: State,
    predictor: State,
    tol: f64,
    max_iter: usize,
) -> Result<(State, usize), OdeError> {
    let residual = |y: State| -> Result<State, OdeError> {
        let f = eval_system(ode, s1, y)?;
        Ok([y[0] - base[0] - gamma * f[0], y[1] - base[1] - gamma * f[1]])
    };

    let mut y = predictor;
    let mut g = residual(y)?;
    for iteration in 0..=max_iter {
        if g[0].abs().max(g[1].abs()) <= tol {
            return Ok((y, iteration));
        }
        if iteration == max_iter {
            break;
        }
        // Jacobian of the residual: I - gamma * df/dy with
        // f = (y2, rhs(s, y1, y2)); rhs partials by central differences.
        let eps0 = f64::EPSILON.sqrt() * (1.0 + y[0].abs());
        let eps1 = f64::EPSILON.sqrt() * (1.0 + y[1].abs());
        let dr_du =
            (ode.rhs(s1, y[0] + eps0, y[1])? - ode.rhs(s1, y[0] - eps0, y[1])?) / (2.0 * eps0);
        let dr_dudot =
            (ode.rhs(s1, y[0], y[1] + eps1)? - ode.rhs(s1, y[0], y[1] - eps1)?) / (2.0 * eps1);
        let j = [
            [1.0, -gamma],
            [-gamma * dr_du, 1.0 - gamma * dr_dudot],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 {
            return Err(OdeError::NewtonDivergence {
                s: s1,
                iterations: iteration,
            });
        }
        let dx = [
            (-g[0] * j[1][1] + g[1] * j[0][1]) / det,
            (-j[0][0] * g[1] + j[1][0] * g[0]) / det,
        ];
        y = [y[0] + dx[0], y[1] + dx[1]];
        g = residual(y)?;
    }
    Err(OdeError::NewtonDivergence {
        s: s1,
        iterations: max_iter,
    })
}

/// Trapezoidal (Adams-Moulton order 2) step.
fn am2_step(
    ode: &StreamlineODE,
    s0: f64,
    s1: f64,
    y: State,
    cfg: &SolverConfig,
) -> Result<(State, usize), OdeError> {
    let h = s1 - s0;
    let f0 = eval_system(ode, s0, y)?;
    let predictor = axpy(y, h, f0);
    let base = axpy(y, 0.5 * h, f0);
    newton_solve(
        ode,
        s1,
        0.5 * h,
        base,
        predictor,
        cfg.newton_tol,
        cfg.newton_max_iter,
    )
}

/// BDF2 step using the two most recent states.
fn bdf2_step(
    ode: &StreamlineODE,
    s0: f64,
    s1: f64,
    y: State,
    y_prev: State,
    cfg: &SolverConfig,
) -> Result<(State, usize), OdeError> {
    let h = s1 - s0;
    let f0 = eval_system(ode, s0, y)?;
    let predictor = axpy(y, h, f0);
    let base = [
        (4.0 * y[0] - y_prev[0]) / 3.0,
        (4.0 * y[1] - y_prev[1]) / 3.0,
    ];
    newton_solve(
        ode,
        s1,
        2.0 * h / 3.0,
        base,
        predictor,
        cfg.newton_tol,
        cfg.newton_max_iter,
    )
}

fn probe_interval(ode: &StreamlineODE, lo: f64, hi: f64) -> Result<(), OdeError> {
    for k in 0..PROBE_POINTS {
        let s = lo + (hi - lo) * k as f64 / (PROBE_POINTS - 1) as f64;
        if let Err(OdeError::GuardTrip { s }) = ode.check_guard(s) {
            return Err(OdeError::GuardAtProbe { s, lo, hi });
        }
    }
    Ok(())
}

/// Integrate from the initial conditions to `s_end` on a uniform grid.
///
/// The grid spacing is `(s_end - s_start) / n` with
/// `n = ceil(span / cfg.step)`, so the last sample lands on `s_end`
/// exactly. The interval is vetted for guard trips at [`PROBE_POINTS`]
/// probe parameters before any stepping; a trip mid-integration returns the
/// partial solution inside the error.
pub fn integrate(
    ode: &StreamlineODE,
    init: InitialConditions,
    s_end: f64,
    cfg: &SolverConfig,
) -> Result<OdeSolution, OdeError> {
    cfg.validate()?;
    if !(s_end > init.s_start) {
        return Err(OdeError::InvalidInterval {
            start: init.s_start,
            end: s_end,
        });
    }
    let (dom_lo, dom_hi) = ode.domain();
    if dom_lo.is_finite() && dom_hi.is_finite() {
        let slack = 1e-12 * (1.0 + dom_hi.abs());
        if init.s_start < dom_lo - slack || init.s_start > dom_hi + slack {
            return Err(OdeError::StartOutsideDomain {
                s: init.s_start,
                lo: dom_lo,
                hi: dom_hi,
            });
        }
    }
    let span = s_end - init.s_start;
    let n = ((span / cfg.step - 1e-9).ceil().max(1.0)) as usize;
    if n > cfg.max_steps {
        return Err(OdeError::MaxStepsExceeded {
            start: init.s_start,
            end: s_end,
            required: n,
            cap: cfg.max_steps,
        });
    }
    probe_interval(ode, init.s_start, s_end)?;

    let h = span / n as f64;
    let grid = |k: usize| {
        if k == n {
            s_end
        } else {
            init.s_start + k as f64 * h
        }
    };

    let mut diagnostics = Diagnostics::default();
    let mut samples = Vec::with_capacity(n + 1);
    samples.push(SolutionSample {
        s: init.s_start,
        u: init.u0,
        udot: init.udot0,
        segment: 0,
    });
    let mut y: State = [init.u0, init.udot0];
    let mut y_prev: Option<State> = None;

    for k in 1..=n {
        let s0 = grid(k - 1);
        let s1 = grid(k);
        let step_result = match cfg.method {
            Method::Rk4 => rk4_step(ode, s0, s1 - s0, y).map(|y| (y, 0)),
            Method::AdamsMoulton2 => am2_step(ode, s0, s1, y, cfg),
            // the first BDF2 step has no history; start with one RK4 step
            Method::Bdf2 => match y_prev {
                Some(prev) => bdf2_step(ode, s0, s1, y, prev, cfg),
                None => rk4_step(ode, s0, s1 - s0, y).map(|y| (y, 0)),
            },
        };
        let (y_next, newton_iters) = match step_result {
            Ok(v) => v,
            Err(OdeError::GuardTrip { s }) => {
                diagnostics.guard_activations += 1;
                diagnostics.rejected_steps += 1;
                return Err(OdeError::GuardMidIntegration {
                    s,
                    partial: Box::new(OdeSolution {
                        samples,
                        diagnostics,
                    }),
                });
            }
            Err(e) => return Err(e),
        };
        diagnostics.steps += 1;
        diagnostics.newton_iterations += newton_iters;
        y_prev = Some(y);
        y = y_next;
        samples.push(SolutionSample {
            s: s1,
            u: y[0],
            udot: y[1],
            segment: 0,
        });
    }

    Ok(OdeSolution {
        samples,
        diagnostics,
    })
}

/// Observed convergence order of `cfg.method`: integrates at `cfg.step` and
/// `cfg.step / 2` against a fine RK4 reference (`cfg.step / 64`) and returns
/// `log2(err_h / err_h/2)` of the terminal-state errors.
pub fn halve_step_order_check(
    ode: &StreamlineODE,
    init: InitialConditions,
    s_end: f64,
    cfg: &SolverConfig,
) -> Result<f64, OdeError> {
    let run = |method: Method, step: f64| -> Result<(f64, f64), OdeError> {
        let sol = integrate(
            ode,
            init,
            s_end,
            &SolverConfig {
                method,
                step,
                ..*cfg
            },
        )?;
        Ok(sol.end_values())
    };
    let (u_ref, udot_ref) = run(Method::Rk4, cfg.step / 64.0)?;
    let err = |(u, udot): (f64, f64)| ((u - u_ref).powi(2) + (udot - udot_ref).powi(2)).sqrt();
    let err_h = err(run(cfg.method, cfg.step)?);
    let err_h2 = err(run(cfg.method, cfg.step / 2.0)?);
    let floor = 1e-13 * (1.0 + u_ref.abs().max(udot_ref.abs()));
    if err_h <= floor || err_h2 <= floor {
        return Err(OdeError::OrderDegenerate);
    }
    Ok((err_h / err_h2).log2())
}

/// Solve along a whole spline: one equation per cubic segment, each built
/// from that segment's geometry, integrated in sequence with each segment's
/// terminal `(u, udot)` becoming the next segment's initial values. The
/// chain is inherently serial; junction values match exactly by
/// construction and junction samples are not duplicated.
pub fn chain_solve(
    spline: &HermiteSpline,
    fluid: &FluidProperties,
    pressure: &PressureModel,
    mode: InverseMapMode,
    component: usize,
    init: InitialConditions,
    cfg: &SolverConfig,
) -> Result<OdeSolution, OdeError> {
    cfg.validate()?;
    if !(0.0..1.0).contains(&init.s_start) {
        return Err(OdeError::InvalidInterval {
            start: init.s_start,
            end: 1.0,
        });
    }
    let count = spline.segment_count();
    let first_segment = ((init.s_start * count as f64).floor() as usize).min(count - 1);

    let mut samples = Vec::new();
    let mut diagnostics = Diagnostics::default();
    let mut current = init;
    for m in first_segment..count {
        let segment_end = (m + 1) as f64 / count as f64;
        let curve = spline
            .segment_curve(m)
            .expect("segment index bounded by segment_count");
        let conv = InverseMapConvention::new(mode, &curve);
        let ode =
            build_ode(&curve, fluid, pressure, &conv, component).map_err(|e| e.in_segment(m))?;
        let part = integrate(&ode, current, segment_end, cfg).map_err(|e| e.in_segment(m))?;

        let skip = usize::from(m != first_segment); // junction sample already recorded
        samples.extend(
            part.samples()
                .iter()
                .skip(skip)
                .map(|sample| SolutionSample {
                    segment: m,
                    ..*sample
                }),
        );
        let d = part.diagnostics();
        diagnostics.steps += d.steps;
        diagnostics.newton_iterations += d.newton_iterations;
        diagnostics.rejected_steps += d.rejected_steps;
        diagnostics.guard_activations += d.guard_activations;

        let (u, udot) = part.end_values();
        current = InitialConditions {
            s_start: segment_end,
            u0: u,
            udot0: udot,
        };
    }

    Ok(OdeSolution {
        samples,
        diagnostics,
    })
}
