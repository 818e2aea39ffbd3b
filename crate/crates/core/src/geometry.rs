//! Parametric streamline curves.
//!
//! A [`StreamlineCurve`] is an immutable, C²-evaluable space curve
//! `s -> phi(s)` over a closed parameter interval, together with its first
//! and second derivatives. The catalog constructors ([`make_tooth`],
//! [`make_lobe`], [`make_helix`]) cover the gear-pump profiles and the
//! turbulent suction helix; arbitrary curves can be wrapped with
//! [`StreamlineCurve::from_fns`].
//!
//! Curves are immutable after construction and cheap to clone (closures are
//! shared), so they can be evaluated from any number of concurrent workers.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Shared point-valued function of the curve parameter.
pub type CurveFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// Errors from curve construction and geometric queries.
#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("degenerate parameter domain [{lo}, {hi}]: lower bound must be strictly below upper")]
    DegenerateDomain { lo: f64, hi: f64 },
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("operation requires a {expected}-D curve, got {got}-D")]
    UnsupportedDimension { expected: usize, got: usize },
    #[error("parameter s = {s} outside curve domain [{lo}, {hi}]")]
    OutOfDomain { s: f64, lo: f64, hi: f64 },
    #[error("tangent alignment undefined: {reason}")]
    AlignmentUndefined { reason: &'static str },
    #[error("points and velocities differ in length ({points} vs {velocities})")]
    MismatchedLengths { points: usize, velocities: usize },
    #[error("a polyline needs at least 2 points, got {got}")]
    TooFewPoints { got: usize },
    #[error("consecutive points {index} and {} coincide", index + 1)]
    DuplicatePoint { index: usize },
    #[error("inconsistent point dimension at index {index}: expected {expected}, got {got}")]
    InconsistentDimension {
        index: usize,
        expected: usize,
        got: usize,
    },
}

/// Tag describing where a curve came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    Tooth,
    Lobe,
    Helix,
    SplineBacked,
    UserDefined,
}

/// Parametric space curve with analytic first and second derivatives.
#[derive(Clone)]
pub struct StreamlineCurve {
    domain: (f64, f64),
    dim: usize,
    kind: CurveKind,
    eval: CurveFn,
    deriv: CurveFn,
    deriv2: CurveFn,
}

impl fmt::Debug for StreamlineCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StreamlineCurve")
            .field("kind", &self.kind)
            .field("domain", &self.domain)
            .field("dim", &self.dim)
            .finish()
    }
}

impl StreamlineCurve {
    /// Wrap user-supplied evaluation closures as a curve.
    ///
    /// The closures must all return `dim`-length vectors; `deriv` and
    /// `deriv2` are trusted to be the true derivatives of `eval` (the test
    /// suite checks catalog curves against central finite differences).
    pub fn from_fns(
        kind: CurveKind,
        domain: (f64, f64),
        dim: usize,
        eval: CurveFn,
        deriv: CurveFn,
        deriv2: CurveFn,
    ) -> Result<Self, GeometryError> {
        if !(domain.0 < domain.1) {
            return Err(GeometryError::DegenerateDomain {
                lo: domain.0,
                hi: domain.1,
            });
        }
        Ok(Self {
            domain,
            dim,
            kind,
            eval,
            deriv,
            deriv2,
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    /// Position `phi(s)`.
    pub fn eval(&self, s: f64) -> Vec<f64> {
        (self.eval)(s)
    }

    /// First derivative `dphi/ds`.
    pub fn deriv(&self, s: f64) -> Vec<f64> {
        (self.deriv)(s)
    }

    /// Second derivative `d2phi/ds2`.
    pub fn deriv2(&self, s: f64) -> Vec<f64> {
        (self.deriv2)(s)
    }

    pub fn contains(&self, s: f64) -> bool {
        s >= self.domain.0 && s <= self.domain.1
    }

    /// `n` uniform parameter values spanning the domain, with positions and
    /// first derivatives. Used by the CSV export and the samplers.
    pub fn sample_uniform(&self, n: usize) -> Vec<(f64, Vec<f64>, Vec<f64>)> {
        assert!(n >= 2, "need at least 2 samples");
        let (lo, hi) = self.domain;
        (0..n)
            .map(|i| {
                let s = if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                };
                (s, self.eval(s), self.deriv(s))
            })
            .collect()
    }
}

/// Default lower-bound parameter for the tooth profile; the profile domain
/// starts at `pi + atan(s0)`.
pub const DEFAULT_TOOTH_S0: f64 = 1.0;

/// Involute tooth flank: `(cos s + s sin s, sin s - s cos s)` on
/// `[pi + atan(s0), 3pi/2]`.
///
/// The tangent is `(s cos s, s sin s)` with `|tangent| = s > 0` everywhere on
/// the domain, so the curve is regular.
pub fn make_tooth(s0: f64) -> Result<StreamlineCurve, GeometryError> {
    if !(s0 > 0.0) {
        return Err(GeometryError::InvalidParameter {
            name: "s0",
            value: s0,
            reason: "must be positive so the domain lower bound stays below 3pi/2",
        });
    }
    StreamlineCurve::from_fns(
        CurveKind::Tooth,
        (PI + s0.atan(), 1.5 * PI),
        2,
        Arc::new(|s: f64| vec![s.cos() + s * s.sin(), s.sin() - s * s.cos()]),
        Arc::new(|s: f64| vec![s * s.cos(), s * s.sin()]),
        Arc::new(|s: f64| vec![s.cos() - s * s.sin(), s.sin() + s * s.cos()]),
    )
}

/// 3-D suction-channel streamline:
/// `s -> ([a1 + a2 s] sin s + a3 s, [a1 + a2 s] cos s, a4 s)`.
pub fn make_helix(a: [f64; 4], domain: (f64, f64)) -> Result<StreamlineCurve, GeometryError> {
    let [a1, a2, a3, a4] = a;
    StreamlineCurve::from_fns(
        CurveKind::Helix,
        domain,
        3,
        Arc::new(move |s: f64| {
            let radial = a1 + a2 * s;
            vec![radial * s.sin() + a3 * s, radial * s.cos(), a4 * s]
        }),
        Arc::new(move |s: f64| {
            let radial = a1 + a2 * s;
            vec![
                a2 * s.sin() + radial * s.cos() + a3,
                a2 * s.cos() - radial * s.sin(),
                a4,
            ]
        }),
        Arc::new(move |s: f64| {
            let radial = a1 + a2 * s;
            vec![
                2.0 * a2 * s.cos() - radial * s.sin(),
                -2.0 * a2 * s.sin() - radial * s.cos(),
                0.0,
            ]
        }),
    )
}

fn lobe_circle(radius: f64) -> StreamlineCurve {
    StreamlineCurve::from_fns(
        CurveKind::Lobe,
        (0.0, 2.0 * PI),
        2,
        Arc::new(move |s: f64| vec![radius * (PI + s).cos(), radius * (PI + s).sin()]),
        Arc::new(move |s: f64| vec![-radius * (PI + s).sin(), radius * (PI + s).cos()]),
        Arc::new(move |s: f64| vec![-radius * (PI + s).cos(), -radius * (PI + s).sin()]),
    )
    .expect("lobe domain is fixed and non-degenerate")
}

/// How a [`RotationEvolution`] produces time snapshots.
#[derive(Debug, Clone, Copy)]
enum EvolutionProfile {
    /// Snapshot is the base curve rotated rigidly by `omega * t`.
    Rigid,
    /// Lobe profile: snapshot is the circle of radius `r + sin(phase + omega t)`.
    PulsingLobe { r: f64, phase: f64 },
}

/// Time evolution of a streamline profile at angular speed `omega`.
///
/// At `t = 0` the snapshot equals the base curve pointwise. Rigid evolutions
/// preserve all distances; the lobe profile instead re-evaluates its radial
/// factor per snapshot (its radius genuinely changes in time), while
/// [`rotate_snapshot`] always applies the pure rotation to the base.
#[derive(Clone)]
pub struct RotationEvolution {
    omega: f64,
    base: StreamlineCurve,
    profile: EvolutionProfile,
}

impl fmt::Debug for RotationEvolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RotationEvolution")
            .field("omega", &self.omega)
            .field("profile", &self.profile)
            .field("base", &self.base)
            .finish()
    }
}

impl RotationEvolution {
    /// Rigid rotation of an arbitrary 2-D base curve.
    pub fn rigid(base: StreamlineCurve, omega: f64) -> Result<Self, GeometryError> {
        if base.dim() != 2 {
            return Err(GeometryError::UnsupportedDimension {
                expected: 2,
                got: base.dim(),
            });
        }
        Ok(Self {
            omega,
            base,
            profile: EvolutionProfile::Rigid,
        })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn base(&self) -> &StreamlineCurve {
        &self.base
    }

    /// Curve snapshot at time `t`, following the construction semantics
    /// (rigid rotation, or radius re-evaluation for the lobe).
    pub fn snapshot(&self, t: f64) -> Result<StreamlineCurve, GeometryError> {
        match self.profile {
            EvolutionProfile::Rigid => rotate_snapshot(self, t),
            EvolutionProfile::PulsingLobe { r, phase } => {
                Ok(lobe_circle(r + (phase + self.omega * t).sin()))
            }
        }
    }
}

/// Lobe-pump rotor profile: `(x, y) = [r + sin(phase + omega t)] (cos(pi+s), sin(pi+s))`
/// swept over `s in [0, 2pi]`, with the radial factor re-evaluated per snapshot.
///
/// Requires `r > 1` so the radius `r + sin(...)` stays positive.
pub fn make_lobe(r: f64, phase: f64, omega: f64) -> Result<RotationEvolution, GeometryError> {
    if !(r > 1.0) {
        return Err(GeometryError::InvalidParameter {
            name: "r",
            value: r,
            reason: "must exceed 1 so the radius r + sin(...) cannot vanish",
        });
    }
    Ok(RotationEvolution {
        omega,
        base: lobe_circle(r + phase.sin()),
        profile: EvolutionProfile::PulsingLobe { r, phase },
    })
}

/// Rigid rotation snapshot: `Phi(s, t) = R(omega t) phi(s)` with `R` the 2x2
/// rotation matrix. Rotation commutes with `d/ds`, so the returned curve's
/// derivatives are the rotated base derivatives.
pub fn rotate_snapshot(ev: &RotationEvolution, t: f64) -> Result<StreamlineCurve, GeometryError> {
    let base = &ev.base;
    if base.dim() != 2 {
        return Err(GeometryError::UnsupportedDimension {
            expected: 2,
            got: base.dim(),
        });
    }
    let angle = ev.omega * t;
    let (sin_a, cos_a) = angle.sin_cos();
    let rotate = move |p: Vec<f64>| vec![cos_a * p[0] - sin_a * p[1], sin_a * p[0] + cos_a * p[1]];

    let (e, d, d2) = (base.eval.clone(), base.deriv.clone(), base.deriv2.clone());
    StreamlineCurve::from_fns(
        base.kind,
        base.domain,
        2,
        Arc::new(move |s| rotate((e)(s))),
        Arc::new(move |s| rotate((d)(s))),
        Arc::new(move |s| rotate((d2)(s))),
    )
}

/// Normalized residual of the streamline/velocity alignment relation
/// `v_i phidot_j = v_j phidot_i`: the norm of all pairwise cross terms
/// divided by `|v| |phidot|`. Zero iff `v` is parallel to the tangent; 1 for
/// orthogonal vectors in 2-D.
pub fn check_tangent_alignment(
    curve: &StreamlineCurve,
    s: f64,
    v: &[f64],
) -> Result<f64, GeometryError> {
    if !curve.contains(s) {
        return Err(GeometryError::OutOfDomain {
            s,
            lo: curve.domain.0,
            hi: curve.domain.1,
        });
    }
    if v.len() != curve.dim() {
        return Err(GeometryError::UnsupportedDimension {
            expected: curve.dim(),
            got: v.len(),
        });
    }
    let tangent = curve.deriv(s);
    let v_norm = norm(v);
    let t_norm = norm(&tangent);
    if v_norm == 0.0 {
        return Err(GeometryError::AlignmentUndefined {
            reason: "candidate vector is zero",
        });
    }
    if t_norm == 0.0 {
        return Err(GeometryError::AlignmentUndefined {
            reason: "curve tangent vanishes at this parameter",
        });
    }
    let mut cross_sq = 0.0;
    for i in 0..v.len() {
        for j in (i + 1)..v.len() {
            let c = v[i] * tangent[j] - v[j] * tangent[i];
            cross_sq += c * c;
        }
    }
    Ok(cross_sq.sqrt() / (v_norm * t_norm))
}

/// Ordered point/velocity samples along one streamline, as produced by an
/// upstream field solve. Consecutive points must be distinct and the two
/// lists must have equal length `N >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolylineSample {
    points: Vec<Vec<f64>>,
    velocities: Vec<Vec<f64>>,
}

impl PolylineSample {
    pub fn new(points: Vec<Vec<f64>>, velocities: Vec<Vec<f64>>) -> Result<Self, GeometryError> {
        if points.len() != velocities.len() {
            return Err(GeometryError::MismatchedLengths {
                points: points.len(),
                velocities: velocities.len(),
            });
        }
        if points.len() < 2 {
            return Err(GeometryError::TooFewPoints { got: points.len() });
        }
        let dim = points[0].len();
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(GeometryError::InconsistentDimension {
                    index: i,
                    expected: dim,
                    got: p.len(),
                });
            }
        }
        for (i, v) in velocities.iter().enumerate() {
            if v.len() != dim {
                return Err(GeometryError::InconsistentDimension {
                    index: i,
                    expected: dim,
                    got: v.len(),
                });
            }
        }
        for i in 0..points.len() - 1 {
            if points[i] == points[i + 1] {
                return Err(GeometryError::DuplicatePoint { index: i });
            }
        }
        Ok(Self { points, velocities })
    }

    /// Sample a curve at `n` uniform parameters, taking velocities as the
    /// curve derivative scaled by the knot spacing. With that scaling each
    /// consecutive couple is parametrized consistently over its own unit
    /// interval, so Hermite interpolation of the sample reproduces the curve
    /// to the cubic's approximation order.
    pub fn from_curve(curve: &StreamlineCurve, n: usize) -> Result<Self, GeometryError> {
        if n < 2 {
            return Err(GeometryError::TooFewPoints { got: n });
        }
        let raw = curve.sample_uniform(n);
        let (lo, hi) = curve.domain();
        let spacing = (hi - lo) / (n - 1) as f64;
        let points = raw.iter().map(|(_, p, _)| p.clone()).collect();
        let velocities = raw
            .iter()
            .map(|(_, _, d)| d.iter().map(|x| x * spacing).collect())
            .collect();
        Self::new(points, velocities)
    }

    /// Number of sample points `N`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees N >= 2
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn velocities(&self) -> &[Vec<f64>] {
        &self.velocities
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Central finite difference of a curve's position, for derivative checks.
pub fn central_difference(curve: &StreamlineCurve, s: f64, h: f64) -> Vec<f64> {
    let fwd = curve.eval(s + h);
    let bwd = curve.eval(s - h);
    fwd.iter()
        .zip(&bwd)
        .map(|(a, b)| (a - b) / (2.0 * h))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOOTH_END: f64 = 1.5 * PI;

    fn assert_vec_close(got: &[f64], want: &[f64], tol: f64) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!(
                (g - w).abs() <= tol,
                "expected {want:?}, got {got:?} (tol {tol})"
            );
        }
    }

    #[test]
    fn tooth_eval_at_domain_end() {
        let tooth = make_tooth(1.0).unwrap();
        assert_vec_close(&tooth.eval(TOOTH_END), &[-1.5 * PI, -1.0], 1e-14);
    }

    #[test]
    fn tooth_deriv_at_domain_end() {
        let tooth = make_tooth(1.0).unwrap();
        assert_vec_close(&tooth.deriv(TOOTH_END), &[0.0, -1.5 * PI], 1e-14);
    }

    #[test]
    fn tooth_deriv_matches_finite_difference() {
        let tooth = make_tooth(1.0).unwrap();
        let fd = central_difference(&tooth, 4.0, 1e-5);
        assert_vec_close(&tooth.deriv(4.0), &fd, 1e-8);
    }

    #[test]
    fn tooth_rejects_nonpositive_s0() {
        assert!(matches!(
            make_tooth(0.0),
            Err(GeometryError::InvalidParameter { name: "s0", .. })
        ));
        assert!(make_tooth(-2.0).is_err());
    }

    #[test]
    fn tooth_domain_lower_bound() {
        let tooth = make_tooth(1.0).unwrap();
        assert!((tooth.domain().0 - (PI + 1f64.atan())).abs() < 1e-15);
        assert_eq!(tooth.domain().1, TOOTH_END);
    }

    #[test]
    fn lobe_base_point() {
        let lobe = make_lobe(2.0, 0.0, 1.0).unwrap();
        let snap = lobe.snapshot(0.0).unwrap();
        assert_vec_close(&snap.eval(0.0), &[-2.0, 0.0], 1e-14);
    }

    #[test]
    fn lobe_snapshot_radius_tracks_time() {
        // omega * t = pi/2, phase = 0 -> radius r + 1
        let lobe = make_lobe(2.0, 0.0, 1.0).unwrap();
        let snap = lobe.snapshot(PI / 2.0).unwrap();
        for k in 0..8 {
            let s = 2.0 * PI * k as f64 / 8.0;
            assert!((norm(&snap.eval(s)) - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lobe_profile_radius_constant_in_s() {
        let lobe = make_lobe(2.5, 0.3, 2.0).unwrap();
        let t: f64 = 0.7;
        let expected = 2.5 + (0.3 + 2.0 * t).sin();
        let snap = lobe.snapshot(t).unwrap();
        for k in 0..17 {
            let s = 2.0 * PI * k as f64 / 17.0;
            assert!((norm(&snap.eval(s)) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn lobe_rejects_small_radius() {
        assert!(make_lobe(1.0, 0.0, 1.0).is_err());
        assert!(make_lobe(0.5, 0.0, 1.0).is_err());
    }

    #[test]
    fn helix_eval_points() {
        let helix = make_helix([1.0, 0.0, 0.0, 1.0], (0.0, 2.0 * PI)).unwrap();
        assert_vec_close(&helix.eval(0.0), &[0.0, 1.0, 0.0], 1e-14);
        assert_vec_close(&helix.eval(PI / 2.0), &[1.0, 0.0, PI / 2.0], 1e-14);
    }

    #[test]
    fn helix_rejects_degenerate_domain() {
        assert!(matches!(
            make_helix([1.0, 0.0, 0.0, 1.0], (0.0, 0.0)),
            Err(GeometryError::DegenerateDomain { .. })
        ));
    }

    #[test]
    fn helix_deriv_matches_finite_difference() {
        let helix = make_helix([1.0, 0.2, 0.5, 0.8], (0.0, 2.0 * PI)).unwrap();
        for k in 0..10 {
            let s = 0.1 + 0.6 * k as f64;
            let fd = central_difference(&helix, s, 1e-6);
            let d = helix.deriv(s);
            for (a, b) in d.iter().zip(&fd) {
                assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn rotation_identity_at_t_zero() {
        let tooth = make_tooth(1.0).unwrap();
        let ev = RotationEvolution::rigid(tooth.clone(), 3.0).unwrap();
        let snap = rotate_snapshot(&ev, 0.0).unwrap();
        for k in 0..10 {
            let s = tooth.domain().0 + 0.07 * k as f64;
            assert_vec_close(&snap.eval(s), &tooth.eval(s), 1e-15);
        }
    }

    #[test]
    fn rotation_quarter_turn() {
        // unit-circle-style base point (1, 0) rotated by pi/2 lands on (0, 1)
        let base = StreamlineCurve::from_fns(
            CurveKind::UserDefined,
            (0.0, 1.0),
            2,
            Arc::new(|_| vec![1.0, 0.0]),
            Arc::new(|_| vec![0.0, 1.0]),
            Arc::new(|_| vec![0.0, 0.0]),
        )
        .unwrap();
        let ev = RotationEvolution::rigid(base, PI / 2.0).unwrap();
        let snap = rotate_snapshot(&ev, 1.0).unwrap();
        assert_vec_close(&snap.eval(0.5), &[0.0, 1.0], 1e-15);
    }

    #[test]
    fn rotation_preserves_norms() {
        let tooth = make_tooth(1.0).unwrap();
        let ev = RotationEvolution::rigid(tooth.clone(), 2.0).unwrap();
        let snap = rotate_snapshot(&ev, 0.37).unwrap();
        for k in 0..25 {
            let s = tooth.domain().0 + 0.03 * k as f64;
            let a = norm(&snap.eval(s));
            let b = norm(&tooth.eval(s));
            assert!((a - b).abs() <= 1e-14 * (1.0 + b));
        }
    }

    #[test]
    fn rotation_preserves_pairwise_distances() {
        let tooth = make_tooth(1.0).unwrap();
        let ev = RotationEvolution::rigid(tooth.clone(), 1.7).unwrap();
        let snap = rotate_snapshot(&ev, 0.83).unwrap();
        let (lo, hi) = tooth.domain();
        let params: Vec<f64> = (0..12).map(|k| lo + (hi - lo) * k as f64 / 11.0).collect();
        for (i, &si) in params.iter().enumerate() {
            for &sj in &params[i + 1..] {
                let before = {
                    let (a, b) = (tooth.eval(si), tooth.eval(sj));
                    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
                };
                let after = {
                    let (a, b) = (snap.eval(si), snap.eval(sj));
                    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
                };
                assert!(
                    (before - after).abs() <= 1e-12 * (1.0 + before),
                    "distance {before} became {after}"
                );
            }
        }
    }

    #[test]
    fn rotation_rejects_3d_base() {
        let helix = make_helix([1.0, 0.0, 0.0, 1.0], (0.0, 1.0)).unwrap();
        assert!(matches!(
            RotationEvolution::rigid(helix, 1.0),
            Err(GeometryError::UnsupportedDimension { .. })
        ));
    }

    #[test]
    fn alignment_zero_for_scaled_tangent() {
        let tooth = make_tooth(1.0).unwrap();
        let s = 4.2;
        let v: Vec<f64> = tooth.deriv(s).iter().map(|x| 2.0 * x).collect();
        let res = check_tangent_alignment(&tooth, s, &v).unwrap();
        assert!(res <= 1e-14);
    }

    #[test]
    fn alignment_one_for_orthogonal() {
        let tooth = make_tooth(1.0).unwrap();
        let s = 4.2;
        let d = tooth.deriv(s);
        let v = vec![-d[1], d[0]];
        let res = check_tangent_alignment(&tooth, s, &v).unwrap();
        assert!((res - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn alignment_tooth_end_vertical_tangent() {
        // tangent at 3pi/2 is (0, -3pi/2); v = (0, -1) is parallel
        let tooth = make_tooth(1.0).unwrap();
        let res = check_tangent_alignment(&tooth, TOOTH_END, &[0.0, -1.0]).unwrap();
        assert!(res <= 1e-14);
    }

    #[test]
    fn alignment_rejects_zero_vector() {
        let tooth = make_tooth(1.0).unwrap();
        assert!(matches!(
            check_tangent_alignment(&tooth, 4.2, &[0.0, 0.0]),
            Err(GeometryError::AlignmentUndefined { .. })
        ));
    }

    #[test]
    fn alignment_rejects_out_of_domain() {
        let tooth = make_tooth(1.0).unwrap();
        assert!(matches!(
            check_tangent_alignment(&tooth, 0.5, &[1.0, 0.0]),
            Err(GeometryError::OutOfDomain { .. })
        ));
    }

    #[test]
    fn polyline_rejects_mismatched_and_short() {
        assert!(PolylineSample::new(vec![vec![0.0, 0.0]], vec![vec![1.0, 0.0]]).is_err());
        assert!(PolylineSample::new(
            vec![vec![0.0, 0.0], vec![1.0, 0.0]],
            vec![vec![1.0, 0.0]]
        )
        .is_err());
    }

    #[test]
    fn polyline_rejects_duplicate_consecutive() {
        let err = PolylineSample::new(
            vec![vec![0.0, 0.0], vec![0.0, 0.0], vec![1.0, 0.0]],
            vec![vec![1.0, 0.0]; 3],
        )
        .unwrap_err();
        assert!(matches!(err, GeometryError::DuplicatePoint { index: 0 }));
    }

    #[test]
    fn catalog_derivatives_match_finite_differences() {
        // module invariant: 100 random parameters per catalog curve
        let tooth = make_tooth(1.0).unwrap();
        let helix = make_helix([1.0, 0.1, 0.3, 0.7], (0.5, 6.0)).unwrap();
        let lobe = make_lobe(2.0, 0.4, 1.3).unwrap().snapshot(0.2).unwrap();
        for curve in [&tooth, &helix, &lobe] {
            let (lo, hi) = curve.domain();
            for k in 0..100 {
                // deterministic low-discrepancy points inside the domain
                let frac = (k as f64 * 0.618_033_988_749_895) % 1.0;
                let s = lo + (hi - lo) * (0.01 + 0.98 * frac);
                let fd = central_difference(curve, s, 1e-6);
                let d = curve.deriv(s);
                for (a, b) in d.iter().zip(&fd) {
                    assert!(
                        (a - b).abs() <= 1e-6 * (1.0 + a.abs()),
                        "kind {:?} at s={s}: analytic {a}, fd {b}",
                        curve.kind()
                    );
                }
            }
        }
    }
}
