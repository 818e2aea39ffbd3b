//! Per-streamline reduced momentum equations and their integration.
//!
//! Along a streamline `phi(s)` the momentum balance reduces, per velocity
//! component `i`, to a scalar second-order ODE
//!
//! ```text
//! rho u udot phidot_i = -qdot dg/dx_i + mu (gradg.gradg uddot + lapg udot)
//! ```
//!
//! where `g` is the inverse of `phi` and `q` the pressure along the curve.
//! The derivatives of `g` are expressed through those of `phi` under a
//! selectable [`InverseMapMode`]; [`build_ode`] assembles the equation for a
//! given curve, fluid and pressure model. The a-priori gear-pump family has
//! its own closed form ([`gear_pump_ode`]), genuinely singular where
//! `cos s = 0` (in particular at the tooth domain's right endpoint `3pi/2`)
//! and at `s = 0`, so every equation carries a singularity guard that is
//! checked before each right-hand-side evaluation and over probe points of
//! an integration interval.

mod solve;

pub use solve::{
    chain_solve, halve_step_order_check, integrate, Diagnostics, InitialConditions, Method,
    OdeSolution, SolutionSample, SolverConfig,
};

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::geometry::{dot, StreamlineCurve};

/// Shared scalar function of the streamline parameter.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;
type RhsFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// Number of uniform probe points used to vet an interval before
/// construction and integration.
pub const PROBE_POINTS: usize = 1001;

/// Relative floor for the `mu * gradg.gradg` coefficient of built equations,
/// scaled by the coefficient's magnitude over the probed interval.
pub const GUARD_EPS_REL: f64 = 1e-6;

/// Absolute guard width on `|cos s|` and `|s|` for the gear-pump equation.
pub const PUMP_GUARD_EPS: f64 = 1e-3;

/// Errors from equation assembly and integration.
#[derive(Debug, Error)]
pub enum OdeError {
    #[error("viscosity must be positive, got mu = {mu} at s = {s}")]
    NonPositiveViscosity { s: f64, mu: f64 },
    #[error("density must be nonnegative, got rho = {rho} at s = {s}")]
    NegativeDensity { s: f64, rho: f64 },
    #[error("component index {index} out of range for a {dim}-D curve")]
    ComponentOutOfRange { index: usize, dim: usize },
    #[error("componentwise inverse map undefined: tangent component {component} vanishes at s = {s}")]
    TangentComponentZero { s: f64, component: usize },
    #[error("coefficient of the second derivative falls below the singularity floor at probe point s = {s}")]
    SingularAtConstruction { s: f64 },
    #[error("singularity guard tripped at s = {s}")]
    GuardTrip { s: f64 },
    #[error("singularity guard trips inside [{lo}, {hi}]: probe point s = {s}")]
    GuardAtProbe { s: f64, lo: f64, hi: f64 },
    #[error("singularity guard tripped mid-integration at s = {s}; partial solution retained")]
    GuardMidIntegration { s: f64, partial: Box<OdeSolution> },
    #[error("Newton iteration did not reach tolerance at s = {s} after {iterations} iterations")]
    NewtonDivergence { s: f64, iterations: usize },
    #[error("integration over [{start}, {end}] needs {required} steps, exceeding the cap of {cap}")]
    MaxStepsExceeded {
        start: f64,
        end: f64,
        required: usize,
        cap: usize,
    },
    #[error("invalid integration interval [{start}, {end}]: end must exceed start")]
    InvalidInterval { start: f64, end: f64 },
    #[error("start parameter {s} outside the equation domain [{lo}, {hi}]")]
    StartOutsideDomain { s: f64, lo: f64, hi: f64 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("gear-pump equation requires constant fluid properties")]
    NonConstantFluid,
    #[error("segment {index}: {source}")]
    Segment {
        index: usize,
        #[source]
        source: Box<OdeError>,
    },
    #[error("observed errors are at round-off level; order undefined")]
    OrderDegenerate,
    #[error("invalid pressure samples: {0}")]
    BadPressureSamples(String),
}

impl OdeError {
    fn in_segment(self, index: usize) -> Self {
        OdeError::Segment {
            index,
            source: Box::new(self),
        }
    }
}

/// Density and dynamic viscosity, constant or varying along the parameter.
#[derive(Clone)]
pub struct FluidProperties {
    rho: ScalarFn,
    mu: ScalarFn,
    constants: Option<(f64, f64)>,
}

impl fmt::Debug for FluidProperties {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.constants {
            Some((rho, mu)) => write!(f, "FluidProperties {{ rho: {rho}, mu: {mu} }}"),
            None => write!(f, "FluidProperties {{ varying }}"),
        }
    }
}

impl FluidProperties {
    pub fn constant(rho: f64, mu: f64) -> Result<Self, OdeError> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(OdeError::NonPositiveViscosity { s: f64::NAN, mu });
        }
        if !(rho >= 0.0) || !rho.is_finite() {
            return Err(OdeError::NegativeDensity { s: f64::NAN, rho });
        }
        Ok(Self {
            rho: Arc::new(move |_| rho),
            mu: Arc::new(move |_| mu),
            constants: Some((rho, mu)),
        })
    }

    /// Parameter-dependent properties; positivity of `mu` is verified at the
    /// probe points of [`build_ode`].
    pub fn varying(
        rho: impl Fn(f64) -> f64 + Send + Sync + 'static,
        mu: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            rho: Arc::new(rho),
            mu: Arc::new(mu),
            constants: None,
        }
    }

    pub fn rho(&self, s: f64) -> f64 {
        (self.rho)(s)
    }

    pub fn mu(&self, s: f64) -> f64 {
        (self.mu)(s)
    }

    /// `(rho, mu)` when constructed as constants.
    pub fn constants(&self) -> Option<(f64, f64)> {
        self.constants
    }
}

/// Pressure along the streamline, `q = p o phi`, with its derivative
/// `qdot = dq/ds` (analytic when given, central finite difference otherwise).
#[derive(Clone)]
pub struct PressureModel {
    q: ScalarFn,
    qdot: ScalarFn,
    constant: bool,
}

impl fmt::Debug for PressureModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PressureModel {{ constant: {} }}", self.constant)
    }
}

impl PressureModel {
    /// Constant pressure: `qdot` is exactly zero.
    pub fn constant(p: f64) -> Self {
        Self {
            q: Arc::new(move |_| p),
            qdot: Arc::new(|_| 0.0),
            constant: true,
        }
    }

    pub fn from_fn(
        q: impl Fn(f64) -> f64 + Send + Sync + 'static,
        qdot: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            q: Arc::new(q),
            qdot: Arc::new(qdot),
            constant: false,
        }
    }

    /// Derivative by central finite difference with h = 1e-6.
    pub fn from_fn_fd(q: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let q = Arc::new(q);
        let q2 = q.clone();
        Self {
            q: Arc::new(move |s| q(s)),
            qdot: Arc::new(move |s| {
                let h = 1e-6;
                (q2(s + h) - q2(s - h)) / (2.0 * h)
            }),
            constant: false,
        }
    }

    /// Piecewise-linear pressure through `(s, q)` samples; `qdot` is the
    /// per-interval slope. Samples must be strictly increasing in `s`.
    pub fn from_samples(s_values: &[f64], q_values: &[f64]) -> Result<Self, OdeError> {
        if s_values.len() != q_values.len() {
            return Err(OdeError::BadPressureSamples(format!(
                "{} parameters vs {} values",
                s_values.len(),
                q_values.len()
            )));
        }
        if s_values.len() < 2 {
            return Err(OdeError::BadPressureSamples(
                "need at least 2 samples".into(),
            ));
        }
        if s_values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(OdeError::BadPressureSamples(
                "parameters must be strictly increasing".into(),
            ));
        }
        let sv: Arc<[f64]> = s_values.into();
        let qv: Arc<[f64]> = q_values.into();
        let (sv2, qv2) = (sv.clone(), qv.clone());
        let locate = |sv: &[f64], s: f64| -> usize {
            match sv.partition_point(|&x| x <= s) {
                0 => 0,
                idx => (idx - 1).min(sv.len() - 2),
            }
        };
        Ok(Self {
            q: Arc::new(move |s| {
                let i = locate(&sv, s);
                let t = (s - sv[i]) / (sv[i + 1] - sv[i]);
                qv[i] + t * (qv[i + 1] - qv[i])
            }),
            qdot: Arc::new(move |s| {
                let i = locate(&sv2, s);
                (qv2[i + 1] - qv2[i]) / (sv2[i + 1] - sv2[i])
            }),
            constant: false,
        })
    }

    pub fn q(&self, s: f64) -> f64 {
        (self.q)(s)
    }

    pub fn qdot(&self, s: f64) -> f64 {
        (self.qdot)(s)
    }

    pub fn is_constant(&self) -> bool {
        self.constant
    }
}

/// Convention for expressing the derivatives of the inverse map `g` through
/// those of `phi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InverseMapMode {
    /// `gradg = phidot / |phidot|^2`, the unique choice parallel to the
    /// tangent with `gradg . phidot = 1`. Default.
    Pseudoinverse,
    /// `dg/dx_j = 1 / phidot_j`, defined only where every tangent component
    /// is nonzero.
    Componentwise,
}

impl InverseMapMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            InverseMapMode::Pseudoinverse => "pseudoinverse",
            InverseMapMode::Componentwise => "componentwise",
        }
    }
}

impl std::str::FromStr for InverseMapMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pseudoinverse" => Ok(InverseMapMode::Pseudoinverse),
            "componentwise" => Ok(InverseMapMode::Componentwise),
            other => Err(format!(
                "unknown inverse-map mode '{other}' (expected pseudoinverse or componentwise)"
            )),
        }
    }
}

impl fmt::Display for InverseMapMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Realized inverse-map derivatives for one curve: `gradg`, the Laplacian
/// `lapg` and the squared gradient `gradg . gradg`.
#[derive(Clone)]
pub struct InverseMapConvention {
    mode: InverseMapMode,
    grad_g: VectorFn,
    lap_g: ScalarFn,
    grad_sq: ScalarFn,
}

impl fmt::Debug for InverseMapConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "InverseMapConvention {{ mode: {} }}", self.mode)
    }
}

impl InverseMapConvention {
    pub fn new(mode: InverseMapMode, curve: &StreamlineCurve) -> Self {
        match mode {
            InverseMapMode::Pseudoinverse => {
                let (c1, c2, c3) = (curve.clone(), curve.clone(), curve.clone());
                Self {
                    mode,
                    grad_g: Arc::new(move |s| {
                        let d = c1.deriv(s);
                        let n2 = dot(&d, &d);
                        d.iter().map(|x| x / n2).collect()
                    }),
                    grad_sq: Arc::new(move |s| {
                        let d = c2.deriv(s);
                        1.0 / dot(&d, &d)
                    }),
                    // along-curve chain rule: sum_j (phidot_j/|phidot|^2) d/ds (phidot_j/|phidot|^2)
                    lap_g: Arc::new(move |s| {
                        let d = c3.deriv(s);
                        let dd = c3.deriv2(s);
                        let n2 = dot(&d, &d);
                        let d_dot_dd = dot(&d, &dd);
                        d.iter()
                            .zip(&dd)
                            .map(|(dj, ddj)| (dj / n2) * (ddj / n2 - 2.0 * dj * d_dot_dd / (n2 * n2)))
                            .sum()
                    }),
                }
            }
            InverseMapMode::Componentwise => {
                let (c1, c2, c3) = (curve.clone(), curve.clone(), curve.clone());
                Self {
                    mode,
                    grad_g: Arc::new(move |s| c1.deriv(s).iter().map(|x| 1.0 / x).collect()),
                    grad_sq: Arc::new(move |s| {
                        c2.deriv(s).iter().map(|x| 1.0 / (x * x)).sum()
                    }),
                    lap_g: Arc::new(move |s| {
                        let d = c3.deriv(s);
                        let dd = c3.deriv2(s);
                        d.iter().zip(&dd).map(|(dj, ddj)| -ddj / (dj * dj * dj)).sum()
                    }),
                }
            }
        }
    }

    pub fn mode(&self) -> InverseMapMode {
        self.mode
    }

    pub fn grad_g(&self, s: f64) -> Vec<f64> {
        (self.grad_g)(s)
    }

    pub fn lap_g(&self, s: f64) -> f64 {
        (self.lap_g)(s)
    }

    pub fn grad_sq(&self, s: f64) -> f64 {
        (self.grad_sq)(s)
    }
}

/// Scalar second-order equation `uddot = F(s, u, udot)` for one velocity
/// component, packaged with its coefficient functions and singularity guard.
#[derive(Clone)]
pub struct StreamlineODE {
    rhs_fn: RhsFn,
    coeff_a: ScalarFn,
    coeff_b: ScalarFn,
    forcing: ScalarFn,
    rho: ScalarFn,
    mu: ScalarFn,
    phidot_i: ScalarFn,
    /// Guard margin: the equation is treated as singular where
    /// `|guard_fn(s)| < guard_eps`.
    guard_fn: ScalarFn,
    guard_eps: f64,
    domain: (f64, f64),
}

impl fmt::Debug for StreamlineODE {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StreamlineODE")
            .field("domain", &self.domain)
            .field("guard_eps", &self.guard_eps)
            .finish()
    }
}

impl StreamlineODE {
    /// Right-hand side `uddot = F(s, u, udot)`; errors where the guard trips.
    pub fn rhs(&self, s: f64, u: f64, udot: f64) -> Result<f64, OdeError> {
        self.check_guard(s)?;
        Ok((self.rhs_fn)(s, u, udot))
    }

    pub fn check_guard(&self, s: f64) -> Result<(), OdeError> {
        if (self.guard_fn)(s).abs() < self.guard_eps {
            Err(OdeError::GuardTrip { s })
        } else {
            Ok(())
        }
    }

    /// Coefficient of `uddot` (times `mu`) in the balance form.
    pub fn coeff_a(&self, s: f64) -> f64 {
        (self.coeff_a)(s)
    }

    /// Coefficient of `udot` (times `mu`) in the balance form.
    pub fn coeff_b(&self, s: f64) -> f64 {
        (self.coeff_b)(s)
    }

    /// Pressure term `-qdot dg/dx_i` as it appears on the right of the
    /// balance form.
    pub fn forcing(&self, s: f64) -> f64 {
        (self.forcing)(s)
    }

    pub fn guard_eps(&self) -> f64 {
        self.guard_eps
    }

    /// Guard measure at `s`; the equation is singular where its magnitude
    /// falls below [`Self::guard_eps`].
    pub fn guard_value(&self, s: f64) -> f64 {
        (self.guard_fn)(s)
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    /// Balance residual of `(s, u, udot, uddot)`:
    /// `rho u udot phidot_i - [forcing + mu (coeff_a uddot + coeff_b udot)]`.
    /// Zero (to round-off) when `uddot` comes from [`Self::rhs`].
    pub fn residual(&self, s: f64, u: f64, udot: f64, uddot: f64) -> f64 {
        let mu = (self.mu)(s);
        (self.rho)(s) * u * udot * (self.phidot_i)(s)
            - ((self.forcing)(s) + mu * ((self.coeff_a)(s) * uddot + (self.coeff_b)(s) * udot))
    }

    /// Wrap an arbitrary right-hand side, e.g. benchmark equations like
    /// `uddot = -u`. No guard; coefficient accessors are trivial.
    pub fn custom(rhs: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            rhs_fn: Arc::new(rhs),
            coeff_a: Arc::new(|_| 1.0),
            coeff_b: Arc::new(|_| 0.0),
            forcing: Arc::new(|_| 0.0),
            rho: Arc::new(|_| 0.0),
            mu: Arc::new(|_| 1.0),
            phidot_i: Arc::new(|_| 0.0),
            guard_fn: Arc::new(|_| 1.0),
            guard_eps: 0.0,
            domain: (f64::NEG_INFINITY, f64::INFINITY),
        }
    }
}

/// Assemble the reduced equation for velocity component `component` of a
/// curve: `coeff_a = gradg.gradg`, `coeff_b = lapg`,
/// `forcing = -qdot dg/dx_i`, solved for `uddot` as
///
/// ```text
/// uddot = (rho u udot phidot_i + qdot dg/dx_i - mu lapg udot) / (mu gradg.gradg)
/// ```
///
/// The domain is probed at [`PROBE_POINTS`] parameters: viscosity must stay
/// positive, the componentwise mode requires nonvanishing tangent
/// components, and `|mu * gradg.gradg|` must stay above a floor of
/// [`GUARD_EPS_REL`] times its maximum over the probes. The same floor
/// becomes the equation's runtime guard.
pub fn build_ode(
    curve: &StreamlineCurve,
    fluid: &FluidProperties,
    pressure: &PressureModel,
    conv: &InverseMapConvention,
    component: usize,
) -> Result<StreamlineODE, OdeError> {
    if component >= curve.dim() {
        return Err(OdeError::ComponentOutOfRange {
            index: component,
            dim: curve.dim(),
        });
    }
    let (lo, hi) = curve.domain();
    let probes: Vec<f64> = (0..PROBE_POINTS)
        .map(|k| lo + (hi - lo) * k as f64 / (PROBE_POINTS - 1) as f64)
        .collect();

    for &s in &probes {
        let mu = fluid.mu(s);
        if !(mu > 0.0) {
            return Err(OdeError::NonPositiveViscosity { s, mu });
        }
        let rho = fluid.rho(s);
        if !(rho >= 0.0) {
            return Err(OdeError::NegativeDensity { s, rho });
        }
        if conv.mode() == InverseMapMode::Componentwise {
            let d = curve.deriv(s);
            let scale = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            for (j, x) in d.iter().enumerate() {
                if x.abs() <= 1e-12 * (1.0 + scale) {
                    return Err(OdeError::TangentComponentZero { s, component: j });
                }
            }
        }
    }

    let coeff_values: Vec<f64> = probes
        .iter()
        .map(|&s| (conv.grad_sq(s) * fluid.mu(s)).abs())
        .collect();
    if let Some(idx) = coeff_values.iter().position(|v| !v.is_finite()) {
        return Err(OdeError::SingularAtConstruction { s: probes[idx] });
    }
    let scale = coeff_values.iter().cloned().fold(0.0f64, f64::max);
    let guard_eps = GUARD_EPS_REL * scale;
    if let Some(idx) = coeff_values.iter().position(|&v| v < guard_eps) {
        return Err(OdeError::SingularAtConstruction { s: probes[idx] });
    }

    let grad_g_i: ScalarFn = {
        let conv = conv.clone();
        Arc::new(move |s| conv.grad_g(s)[component])
    };
    let phidot_i: ScalarFn = {
        let curve = curve.clone();
        Arc::new(move |s| curve.deriv(s)[component])
    };
    let forcing: ScalarFn = {
        let pressure = pressure.clone();
        let grad_g_i = grad_g_i.clone();
        Arc::new(move |s| -pressure.qdot(s) * grad_g_i(s))
    };
    let coeff_a: ScalarFn = {
        let conv = conv.clone();
        Arc::new(move |s| conv.grad_sq(s))
    };
    let coeff_b: ScalarFn = {
        let conv = conv.clone();
        Arc::new(move |s| conv.lap_g(s))
    };
    let guard_fn: ScalarFn = {
        let coeff_a = coeff_a.clone();
        let mu = fluid.mu.clone();
        Arc::new(move |s| coeff_a(s) * mu(s))
    };
    let rhs_fn: RhsFn = {
        let rho = fluid.rho.clone();
        let mu = fluid.mu.clone();
        let pressure = pressure.clone();
        let grad_g_i = grad_g_i.clone();
        let phidot_i = phidot_i.clone();
        let coeff_a = coeff_a.clone();
        let coeff_b = coeff_b.clone();
        Arc::new(move |s, u, udot| {
            let mu_s = mu(s);
            (rho(s) * u * udot * phidot_i(s) + pressure.qdot(s) * grad_g_i(s)
                - mu_s * coeff_b(s) * udot)
                / (mu_s * coeff_a(s))
        })
    };

    Ok(StreamlineODE {
        rhs_fn,
        coeff_a,
        coeff_b,
        forcing,
        rho: fluid.rho.clone(),
        mu: fluid.mu.clone(),
        phidot_i,
        guard_fn,
        guard_eps,
        domain: (lo, hi),
    })
}

/// The a-priori gear-pump equation (constant pressure, tooth-profile
/// streamlines):
///
/// ```text
/// rho u udot = mu cos(s) [ (1+s^2)/s uddot + (s^2-1)/s^2 udot ]
/// ```
///
/// solved for `uddot` as
/// `[rho u udot / (mu cos s) - (s^2-1)/s^2 udot] * s / (1+s^2)`.
///
/// Singular where `cos s = 0` (e.g. the tooth boundary `s = 3pi/2`) and at
/// `s = 0`; guarded with the absolute width [`PUMP_GUARD_EPS`] on `|cos s|`
/// and `|s|`.
pub fn gear_pump_ode(fluid: &FluidProperties) -> Result<StreamlineODE, OdeError> {
    let (rho, mu) = fluid.constants().ok_or(OdeError::NonConstantFluid)?;
    Ok(StreamlineODE {
        rhs_fn: Arc::new(move |s, u, udot| {
            (rho * u * udot / (mu * s.cos()) - (s * s - 1.0) / (s * s) * udot) * s
                / (1.0 + s * s)
        }),
        coeff_a: Arc::new(|s| s.cos() * (1.0 + s * s) / s),
        coeff_b: Arc::new(|s| s.cos() * (s * s - 1.0) / (s * s)),
        forcing: Arc::new(|_| 0.0),
        rho: Arc::new(move |_| rho),
        mu: Arc::new(move |_| mu),
        phidot_i: Arc::new(|_| 1.0),
        guard_fn: Arc::new(|s| s.cos().abs().min(s.abs())),
        guard_eps: PUMP_GUARD_EPS,
        domain: (f64::NEG_INFINITY, f64::INFINITY),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_tooth;

    #[test]
    fn constant_pressure_zero_forcing() {
        let tooth = make_tooth(1.0).unwrap();
        let fluid = FluidProperties::constant(1.0, 1.0).unwrap();
        let pressure = PressureModel::constant(5.0);
        let conv = InverseMapConvention::new(InverseMapMode::Pseudoinverse, &tooth);
        let ode = build_ode(&tooth, &fluid, &pressure, &conv, 0).unwrap();
        for k in 0..20 {
            let s = 4.0 + 0.03 * k as f64;
            assert_eq!(ode.forcing(s), 0.0);
        }
    }

    #[test]
    fn tooth_pseudoinverse_grad_sq() {
        // |phidot|^2 = s^2 for the tooth, so gradg.gradg = 1/s^2
        let tooth = make_tooth(1.0).unwrap();
        let conv = InverseMapConvention::new(InverseMapMode::Pseudoinverse, &tooth);
        for k in 0..20 {
            let s = 4.0 + 0.03 * k as f64;
            assert!((conv.grad_sq(s) - 1.0 / (s * s)).abs() <= 1e-14);
        }
    }

    #[test]
    fn tooth_pseudoinverse_lap_g() {
        // phidot.phiddot = s for the tooth, so lapg = -(phidot.phiddot)/|phidot|^4 = -1/s^3
        let tooth = make_tooth(1.0).unwrap();
        let conv = InverseMapConvention::new(InverseMapMode::Pseudoinverse, &tooth);
        for k in 0..20 {
            let s = 4.0 + 0.03 * k as f64;
            assert!(
                (conv.lap_g(s) + 1.0 / (s * s * s)).abs() <= 1e-14,
                "lapg at s = {s}: {}",
                conv.lap_g(s)
            );
        }
    }

    #[test]
    fn componentwise_derivatives_on_parabola() {
        // curve (s, s^2): gradg = (1, 1/(2s)), gradg.gradg = 1 + 1/(4s^2),
        // lapg = -0/1 - 2/(2s)^3 = -1/(4s^3)
        use crate::geometry::{CurveKind, StreamlineCurve};
        use std::sync::Arc;
        let parabola = StreamlineCurve::from_fns(
            CurveKind::UserDefined,
            (0.5, 2.0),
            2,
            Arc::new(|s: f64| vec![s, s * s]),
            Arc::new(|s: f64| vec![1.0, 2.0 * s]),
            Arc::new(|_| vec![0.0, 2.0]),
        )
        .unwrap();
        let conv = InverseMapConvention::new(InverseMapMode::Componentwise, &parabola);
        for k in 0..10 {
            let s = 0.6 + 0.1 * k as f64;
            let g = conv.grad_g(s);
            assert!((g[0] - 1.0).abs() <= 1e-15);
            assert!((g[1] - 1.0 / (2.0 * s)).abs() <= 1e-15);
            assert!((conv.grad_sq(s) - (1.0 + 1.0 / (4.0 * s * s))).abs() <= 1e-14);
            assert!((conv.lap_g(s) + 1.0 / (4.0 * s * s * s)).abs() <= 1e-14);
        }
    }

    #[test]
    fn pseudoinverse_grad_dot_tangent_is_one() {
        let tooth = make_tooth(1.0).unwrap();
        let conv = InverseMapConvention::new(InverseMapMode::Pseudoinverse, &tooth);
        for k in 0..20 {
            let s = 4.0 + 0.03 * k as f64;
            let g = conv.grad_g(s);
            let d = tooth.deriv(s);
            assert!((dot(&g, &d) - 1.0).abs() <= 1e-14);
        }
    }

    #[test]
    fn constant_state_is_equilibrium() {
        let tooth = make_tooth(1.0).unwrap();
        let fluid = FluidProperties::constant(2.0, 0.3).unwrap();
        let pressure = PressureModel::constant(0.0);
        let conv = InverseMapConvention::new(InverseMapMode::Pseudoinverse, &tooth);
        let ode = build_ode(&tooth, &fluid, &pressure, &conv, 1).unwrap();
        for k in 0..10 {
            let s = 4.0 + 0.05 * k as f64;
            assert_eq!(ode.rhs(s, 3.7, 0.0).unwrap(), 0.0);
            assert_eq!(ode.residual(s, 3.7, 0.0, 0.0), 0.0);
        }
    }

    #[test]
    fn componentwise_rejects_vanishing_tangent() {
        // tooth tangent (s cos s, s sin s) has cos s = 0 at 3pi/2, inside the domain
        let tooth = make_tooth(1.0).unwrap();
        let fluid = FluidProperties::constant(1.0, 1.0).unwrap();
        let pressure = PressureModel::constant(0.0);
        let conv = InverseMapConvention::new(InverseMapMode::Componentwise, &tooth);
        let err = build_ode(&tooth, &fluid, &pressure, &conv, 0).unwrap_err();
        assert!(matches!(err, OdeError::TangentComponentZero { .. }));
    }

    #[test]
    fn build_rejects_bad_component() {
        let tooth = make_tooth(1.0).unwrap();
        let fluid = FluidProperties::constant(1.0, 1.0).unwrap();
        let pressure = PressureModel::constant(0.0);
        let conv = InverseMapConvention::new(InverseMapMode::Pseudoinverse, &tooth);
        assert!(matches!(
            build_ode(&tooth, &fluid, &pressure, &conv, 2),
            Err(OdeError::ComponentOutOfRange { .. })
        ));
    }

    #[test]
    fn fluid_validation() {
        assert!(FluidProperties::constant(1.0, 0.0).is_err());
        assert!(FluidProperties::constant(1.0, -0.1).is_err());
        assert!(FluidProperties::constant(-1.0, 0.1).is_err());
        assert!(FluidProperties::constant(0.0, 0.1).is_ok());
    }

    #[test]
    fn pump_constant_state_is_equilibrium() {
        let fluid = FluidProperties::constant(900.0, 0.05).unwrap();
        let ode = gear_pump_ode(&fluid).unwrap();
        assert_eq!(ode.rhs(4.0, 2.5, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn pump_guard_trips_near_cos_zero() {
        let fluid = FluidProperties::constant(900.0, 0.05).unwrap();
        let ode = gear_pump_ode(&fluid).unwrap();
        // |cos(4.712)| ~ 3.9e-4 < 1e-3: inside the guard band
        assert!(matches!(
            ode.rhs(4.712, 1.0, 0.1),
            Err(OdeError::GuardTrip { .. })
        ));
        // comfortably away from the singularity
        assert!(ode.rhs(4.5, 1.0, 0.1).is_ok());
        // s near zero is guarded too
        assert!(ode.rhs(1e-9, 1.0, 0.1).is_err());
    }

    #[test]
    fn pump_requires_constant_fluid() {
        let fluid = FluidProperties::varying(|_| 900.0, |_| 0.05);
        assert!(matches!(
            gear_pump_ode(&fluid),
            Err(OdeError::NonConstantFluid)
        ));
    }

    #[test]
    fn pump_residual_consistent_with_rhs() {
        let fluid = FluidProperties::constant(900.0, 0.05).unwrap();
        let ode = gear_pump_ode(&fluid).unwrap();
        for k in 0..20 {
            let s = 3.6 + 0.05 * k as f64;
            let (u, udot) = (1.3, -0.4);
            let uddot = ode.rhs(s, u, udot).unwrap();
            let res = ode.residual(s, u, udot, uddot);
            assert!(res.abs() <= 1e-9, "residual {res} at s = {s}");
        }
    }

    #[test]
    fn pressure_samples_interpolate_linearly() {
        let p = PressureModel::from_samples(&[0.0, 1.0, 2.0], &[10.0, 20.0, 0.0]).unwrap();
        assert!((p.q(0.5) - 15.0).abs() < 1e-12);
        assert!((p.qdot(0.5) - 10.0).abs() < 1e-12);
        assert!((p.q(1.5) - 10.0).abs() < 1e-12);
        assert!((p.qdot(1.5) + 20.0).abs() < 1e-12);
        assert!(PressureModel::from_samples(&[0.0, 0.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn pressure_fd_derivative() {
        let p = PressureModel::from_fn_fd(|s| s * s);
        assert!((p.qdot(1.5) - 3.0).abs() < 1e-7);
    }
}
