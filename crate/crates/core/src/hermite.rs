//! C¹ cubic Hermite interpolation of sampled streamlines.
//!
//! Every couple of consecutive sample points `{P_k, P_k+1}` is interpolated
//! by a cubic `p(t) = a3 t³ + a2 t² + a1 t + a0`, `t in [0, 1]` (`t` is the
//! local segment parameter, not time), subject to
//!
//! ```text
//! p(0) = P_k,  p(1) = P_k+1,  p'(0) = v_k,  p'(1) = v_k+1
//! ```
//!
//! Per spatial component the coefficients are `T · (P_k, P_k+1, v_k, v_k+1)`
//! with the constant 4×4 block [`HERMITE_BLOCK`]. A batch of `M` aligned
//! streamlines is interpolated with `N-1` products of the block-diagonal
//! matrix `A = diag(T, ..., T)` against stacked data vectors; `A` is never
//! materialized densely, its density number is `10/(16M) <= 1/M`.
//!
//! A chain of segments forms a [`HermiteSpline`] with the global parameter
//! `s in [0, 1]`, `s = (m + t)/K` over `K` segments, and global derivative
//! `K · df/dt`.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::geometry::{CurveKind, PolylineSample, StreamlineCurve};

/// Errors from segment construction, batching and spline evaluation.
#[derive(Debug, Error)]
pub enum HermiteError {
    #[error("segment endpoint data dimensions disagree: {0:?}")]
    DimensionMismatch([usize; 4]),
    #[error("a block-diagonal matrix needs at least one block")]
    ZeroBlocks,
    #[error("batch vector length {got} does not match 4 x {blocks} blocks")]
    LengthMismatch { got: usize, blocks: usize },
    #[error("batch vector length {0} is not divisible by 4")]
    NotQuadruples(usize),
    #[error("batch of streamlines is empty")]
    EmptyBatch,
    #[error("ragged batch: streamline {index} has {got} points, expected {expected}")]
    RaggedBatch {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("ragged batch: streamline {index} has dimension {got}, expected {expected}")]
    RaggedDimension {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("spline parameter s = {0} outside [0, 1]")]
    ParameterOutOfRange(f64),
    #[error("a spline needs at least one segment")]
    EmptySpline,
    #[error("segment {index} has dimension {got}, expected {expected}")]
    SegmentDimension {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("segment index {index} out of range for {count} segments")]
    SegmentIndex { index: usize, count: usize },
}

/// The constant Hermite block `T`: coefficients `(a3, a2, a1, a0)` are
/// `T · (P_k, P_k+1, v_k, v_k+1)` per spatial component. Ten nonzeros.
pub const HERMITE_BLOCK: [[f64; 4]; 4] = [
    [2.0, -2.0, 1.0, 1.0],
    [-3.0, 3.0, -2.0, -1.0],
    [0.0, 0.0, 1.0, 0.0],
    [1.0, 0.0, 0.0, 0.0],
];

/// Number of nonzero entries in [`HERMITE_BLOCK`].
pub const BLOCK_NONZEROS: usize = 10;

/// One application of the Hermite block. Both the per-segment and the
/// batched path go through this exact function, so their results are
/// bit-identical by construction.
#[inline]
fn apply_block(x: [f64; 4]) -> [f64; 4] {
    let mut y = [0.0; 4];
    for (row, out) in HERMITE_BLOCK.iter().zip(y.iter_mut()) {
        *out = row[0] * x[0] + row[1] * x[1] + row[2] * x[2] + row[3] * x[3];
    }
    y
}

/// Cubic coefficients `(a3, a2, a1, a0)` per spatial component for one
/// segment, local parameter `t in [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSegment {
    coeffs: Vec<[f64; 4]>,
}

impl CubicSegment {
    pub fn from_coeffs(coeffs: Vec<[f64; 4]>) -> Self {
        Self { coeffs }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient quadruples, one `(a3, a2, a1, a0)` per component.
    pub fn coeffs(&self) -> &[[f64; 4]] {
        &self.coeffs
    }

    pub fn eval_local(&self, t: f64) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|[a3, a2, a1, a0]| ((a3 * t + a2) * t + a1) * t + a0)
            .collect()
    }

    pub fn deriv_local(&self, t: f64) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|[a3, a2, a1, _]| (3.0 * a3 * t + 2.0 * a2) * t + a1)
            .collect()
    }

    pub fn deriv2_local(&self, t: f64) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|[a3, a2, _, _]| 6.0 * a3 * t + 2.0 * a2)
            .collect()
    }
}

/// Interpolate one couple of points with endpoint derivatives.
pub fn hermite_segment(
    pk: &[f64],
    pk1: &[f64],
    vk: &[f64],
    vk1: &[f64],
) -> Result<CubicSegment, HermiteError> {
    let dims = [pk.len(), pk1.len(), vk.len(), vk1.len()];
    if dims.iter().any(|&d| d != dims[0]) {
        return Err(HermiteError::DimensionMismatch(dims));
    }
    let coeffs = (0..dims[0])
        .map(|c| apply_block([pk[c], pk1[c], vk[c], vk1[c]]))
        .collect();
    Ok(CubicSegment { coeffs })
}

/// The block-diagonal matrix `A = diag(T, ..., T)` with `M` blocks, stored
/// as the shared block plus the count; the dense `4M x 4M` form exists only
/// logically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockDiagonalMatrix {
    block_count: usize,
}

impl BlockDiagonalMatrix {
    pub fn block(&self) -> &'static [[f64; 4]; 4] {
        &HERMITE_BLOCK
    }

    pub fn block_count(&self) -> usize {
        self.block_count
    }

    /// Logical side length `4M`.
    pub fn logical_size(&self) -> usize {
        4 * self.block_count
    }

    pub fn nonzeros(&self) -> usize {
        BLOCK_NONZEROS * self.block_count
    }
}

pub fn assemble_block_matrix(block_count: usize) -> Result<BlockDiagonalMatrix, HermiteError> {
    if block_count == 0 {
        return Err(HermiteError::ZeroBlocks);
    }
    Ok(BlockDiagonalMatrix { block_count })
}

/// Stacked per-streamline data `(P_r,k, P_r,k+1, v_r,k, v_r,k+1)` for one
/// spatial component at one segment index; length `4M`.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchVector {
    entries: Vec<f64>,
}

impl BatchVector {
    pub fn new(entries: Vec<f64>) -> Result<Self, HermiteError> {
        if entries.len() % 4 != 0 {
            return Err(HermiteError::NotQuadruples(entries.len()));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// `A · b` exploiting the block structure: `M` independent 4×4 products,
/// O(M) work.
pub fn block_matvec(a: &BlockDiagonalMatrix, b: &BatchVector) -> Result<Vec<f64>, HermiteError> {
    if b.len() != a.logical_size() {
        return Err(HermiteError::LengthMismatch {
            got: b.len(),
            blocks: a.block_count,
        });
    }
    let mut out = Vec::with_capacity(b.len());
    for chunk in b.entries.chunks_exact(4) {
        out.extend_from_slice(&apply_block([chunk[0], chunk[1], chunk[2], chunk[3]]));
    }
    Ok(out)
}

/// Exact reduced fraction, used for the sparsity bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DensityNumber {
    numerator: u64,
    denominator: u64,
}

impl DensityNumber {
    fn new(numerator: u64, denominator: u64) -> Self {
        let g = gcd(numerator, denominator);
        Self {
            numerator: numerator / g,
            denominator: denominator / g,
        }
    }

    pub fn numerator(&self) -> u64 {
        self.numerator
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn value(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    /// Exact comparison against the fraction `num/den`.
    pub fn le_fraction(&self, num: u64, den: u64) -> bool {
        // a/b <= c/d  <=>  a d <= c b  (all positive)
        (self.numerator as u128) * (den as u128) <= (num as u128) * (self.denominator as u128)
    }
}

impl fmt::Display for DensityNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// Fraction of nonzero entries of the logical `4M x 4M` matrix:
/// `10M / (4M)² = 10/(16M)`, at most `1/M` for every `M >= 1`.
pub fn density_number(a: &BlockDiagonalMatrix) -> DensityNumber {
    let m = a.block_count as u64;
    DensityNumber::new(BLOCK_NONZEROS as u64 * m, 16 * m * m)
}

/// Chain of `K` cubic segments with the global parameter `s in [0, 1]`,
/// `s = (m + t)/K`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteSpline {
    segments: Vec<CubicSegment>,
    dim: usize,
}

impl HermiteSpline {
    pub fn from_segments(segments: Vec<CubicSegment>) -> Result<Self, HermiteError> {
        let dim = match segments.first() {
            Some(seg) => seg.dim(),
            None => return Err(HermiteError::EmptySpline),
        };
        for (index, seg) in segments.iter().enumerate() {
            if seg.dim() != dim {
                return Err(HermiteError::SegmentDimension {
                    index,
                    expected: dim,
                    got: seg.dim(),
                });
            }
        }
        Ok(Self { segments, dim })
    }

    /// Segment-by-segment interpolation of one sampled streamline. This is
    /// the reference path; [`batch_interpolate`] must agree with it
    /// bit-for-bit.
    pub fn interpolate(sample: &PolylineSample) -> Result<Self, HermiteError> {
        let pts = sample.points();
        let vels = sample.velocities();
        let segments = (0..pts.len() - 1)
            .map(|k| hermite_segment(&pts[k], &pts[k + 1], &vels[k], &vels[k + 1]))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_segments(segments)
    }

    /// Segment count `K`.
    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn segments(&self) -> &[CubicSegment] {
        &self.segments
    }

    /// Locate the segment index `m = floor(s K)` (clamped to `K-1` at
    /// `s = 1`) and the local parameter `t = s K - m`.
    pub fn locate(&self, s: f64) -> Result<(usize, f64), HermiteError> {
        if !(0.0..=1.0).contains(&s) {
            return Err(HermiteError::ParameterOutOfRange(s));
        }
        let k = self.segments.len() as f64;
        let m = ((s * k).floor() as usize).min(self.segments.len() - 1);
        Ok((m, s * k - m as f64))
    }

    pub fn eval(&self, s: f64) -> Result<Vec<f64>, HermiteError> {
        let (m, t) = self.locate(s)?;
        Ok(self.segments[m].eval_local(t))
    }

    /// Global derivative `dphi/ds = K · df/dt` on the located segment.
    pub fn derivative(&self, s: f64) -> Result<Vec<f64>, HermiteError> {
        let (m, t) = self.locate(s)?;
        let k = self.segments.len() as f64;
        Ok(self.segments[m]
            .deriv_local(t)
            .iter()
            .map(|d| k * d)
            .collect())
    }

    /// The whole spline as a curve over the global parameter `[0, 1]`.
    /// Second derivatives are `K² · d²f/dt²`, piecewise (C¹ spline).
    pub fn to_curve(&self) -> StreamlineCurve {
        let spline = Arc::new(self.clone());
        let k = self.segments.len() as f64;
        let (s1, s2, s3) = (spline.clone(), spline.clone(), spline);
        StreamlineCurve::from_fns(
            CurveKind::SplineBacked,
            (0.0, 1.0),
            self.dim,
            Arc::new(move |s| {
                let (m, t) = s1.locate(s).expect("curve domain is [0,1]");
                s1.segments[m].eval_local(t)
            }),
            Arc::new(move |s| {
                let (m, t) = s2.locate(s).expect("curve domain is [0,1]");
                s2.segments[m].deriv_local(t).iter().map(|d| k * d).collect()
            }),
            Arc::new(move |s| {
                let (m, t) = s3.locate(s).expect("curve domain is [0,1]");
                s3.segments[m]
                    .deriv2_local(t)
                    .iter()
                    .map(|d| k * k * d)
                    .collect()
            }),
        )
        .expect("spline domain [0,1] is non-degenerate")
    }

    /// Segment `m` as a curve over its global parameter slice
    /// `[m/K, (m+1)/K]`, with derivatives in the global parametrization.
    pub fn segment_curve(&self, m: usize) -> Result<StreamlineCurve, HermiteError> {
        if m >= self.segments.len() {
            return Err(HermiteError::SegmentIndex {
                index: m,
                count: self.segments.len(),
            });
        }
        let seg = self.segments[m].clone();
        let k = self.segments.len() as f64;
        let lo = m as f64 / k;
        let hi = (m + 1) as f64 / k;
        let (c1, c2, c3) = (seg.clone(), seg.clone(), seg);
        let m_f = m as f64;
        StreamlineCurve::from_fns(
            CurveKind::SplineBacked,
            (lo, hi),
            self.dim,
            Arc::new(move |s| c1.eval_local(s * k - m_f)),
            Arc::new(move |s| c2.deriv_local(s * k - m_f).iter().map(|d| k * d).collect()),
            Arc::new(move |s| {
                c3.deriv2_local(s * k - m_f)
                    .iter()
                    .map(|d| k * k * d)
                    .collect()
            }),
        )
        .map_err(|_| HermiteError::EmptySpline)
    }
}

/// Interpolate `M` aligned streamlines (equal point count `N`) with exactly
/// `N-1` block mat-vecs per spatial component. Equals the per-segment loop
/// bit-for-bit; ragged batches are rejected so the segment indices `k` stay
/// aligned across all `M` streamlines.
pub fn batch_interpolate(samples: &[PolylineSample]) -> Result<Vec<HermiteSpline>, HermiteError> {
    let first = samples.first().ok_or(HermiteError::EmptyBatch)?;
    let n = first.len();
    let dim = first.dim();
    for (index, s) in samples.iter().enumerate() {
        if s.len() != n {
            return Err(HermiteError::RaggedBatch {
                index,
                expected: n,
                got: s.len(),
            });
        }
        if s.dim() != dim {
            return Err(HermiteError::RaggedDimension {
                index,
                expected: dim,
                got: s.dim(),
            });
        }
    }
    let m = samples.len();
    let matrix = assemble_block_matrix(m)?;
    // coeffs[r][k][c] = (a3, a2, a1, a0)
    let mut coeffs = vec![vec![vec![[0.0; 4]; dim]; n - 1]; m];
    let mut stacked = Vec::with_capacity(4 * m);
    for component in 0..dim {
        for k in 0..n - 1 {
            stacked.clear();
            for sample in samples {
                stacked.push(sample.points()[k][component]);
                stacked.push(sample.points()[k + 1][component]);
                stacked.push(sample.velocities()[k][component]);
                stacked.push(sample.velocities()[k + 1][component]);
            }
            let b = BatchVector::new(stacked.clone())?;
            let product = block_matvec(&matrix, &b)?;
            for (r, quad) in product.chunks_exact(4).enumerate() {
                coeffs[r][k][component] = [quad[0], quad[1], quad[2], quad[3]];
            }
        }
    }
    coeffs
        .into_iter()
        .map(|per_segment| {
            HermiteSpline::from_segments(
                per_segment.into_iter().map(CubicSegment::from_coeffs).collect(),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seg1d(pk: f64, pk1: f64, vk: f64, vk1: f64) -> CubicSegment {
        hermite_segment(&[pk], &[pk1], &[vk], &[vk1]).unwrap()
    }

    #[test]
    fn segment_smoothstep() {
        // T · (0, 1, 0, 0) = (-2, 3, 0, 0), i.e. p(t) = -2t³ + 3t²
        let seg = seg1d(0.0, 1.0, 0.0, 0.0);
        assert_eq!(seg.coeffs(), &[[-2.0, 3.0, 0.0, 0.0]]);
    }

    #[test]
    fn segment_constant() {
        let c = 4.25;
        let seg = seg1d(c, c, 0.0, 0.0);
        assert_eq!(seg.coeffs(), &[[0.0, 0.0, 0.0, c]]);
    }

    #[test]
    fn segment_all_ones() {
        let seg = seg1d(1.0, 1.0, 1.0, 1.0);
        assert_eq!(seg.coeffs(), &[[2.0, -3.0, 1.0, 1.0]]);
    }

    #[test]
    fn segment_rejects_dimension_mismatch() {
        assert!(hermite_segment(&[0.0, 0.0], &[1.0], &[1.0, 0.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn block_matrix_m1_equals_t() {
        let a = assemble_block_matrix(1).unwrap();
        assert_eq!(a.logical_size(), 4);
        assert_eq!(a.block(), &HERMITE_BLOCK);
        assert_eq!(a.nonzeros(), 10);
    }

    #[test]
    fn block_matrix_rejects_zero() {
        assert!(matches!(
            assemble_block_matrix(0),
            Err(HermiteError::ZeroBlocks)
        ));
    }

    #[test]
    fn density_values() {
        assert_eq!(
            density_number(&assemble_block_matrix(1).unwrap()).to_string(),
            "5/8"
        );
        let d10 = density_number(&assemble_block_matrix(10).unwrap());
        assert_eq!(d10.to_string(), "1/16");
        assert_eq!(d10.value(), 0.0625);
        assert!(d10.le_fraction(1, 10));
        assert_eq!(assemble_block_matrix(300).unwrap().nonzeros(), 3000);
    }

    #[test]
    fn density_bound_holds() {
        for m in [1usize, 2, 7, 10, 50, 100, 200, 300, 10_000] {
            let d = density_number(&assemble_block_matrix(m).unwrap());
            assert!(d.le_fraction(1, m as u64), "density {d} > 1/{m}");
        }
    }

    #[test]
    fn matvec_single_block() {
        let a = assemble_block_matrix(1).unwrap();
        let b = BatchVector::new(vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(block_matvec(&a, &b).unwrap(), vec![-2.0, 3.0, 0.0, 0.0]);
    }

    #[test]
    fn matvec_identical_blocks() {
        let a = assemble_block_matrix(2).unwrap();
        let b = BatchVector::new(vec![0.5, 1.5, 1.0, -1.0, 0.5, 1.5, 1.0, -1.0]).unwrap();
        let out = block_matvec(&a, &b).unwrap();
        assert_eq!(out[..4], out[4..]);
    }

    #[test]
    fn matvec_zero_vector() {
        let a = assemble_block_matrix(3).unwrap();
        let b = BatchVector::new(vec![0.0; 12]).unwrap();
        assert!(block_matvec(&a, &b).unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn matvec_rejects_length_mismatch() {
        let a = assemble_block_matrix(2).unwrap();
        let b = BatchVector::new(vec![0.0; 4]).unwrap();
        assert!(matches!(
            block_matvec(&a, &b),
            Err(HermiteError::LengthMismatch { .. })
        ));
    }

    fn straight_line_sample() -> PolylineSample {
        PolylineSample::new(
            vec![vec![0.0, 0.0], vec![1.0, 0.0]],
            vec![vec![1.0, 0.0], vec![1.0, 0.0]],
        )
        .unwrap()
    }

    #[test]
    fn batch_straight_line() {
        let splines = batch_interpolate(&[straight_line_sample()]).unwrap();
        assert_eq!(splines.len(), 1);
        let seg = &splines[0].segments()[0];
        assert_eq!(seg.coeffs()[0], [0.0, 0.0, 1.0, 0.0]); // p(t) = t
        assert_eq!(seg.coeffs()[1], [0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn batch_identical_samples_identical_splines() {
        let sample = straight_line_sample();
        let splines = batch_interpolate(&[sample.clone(), sample.clone(), sample]).unwrap();
        assert_eq!(splines[0], splines[1]);
        assert_eq!(splines[1], splines[2]);
    }

    #[test]
    fn batch_rejects_ragged() {
        let a = straight_line_sample();
        let b = PolylineSample::new(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]],
            vec![vec![1.0, 0.0]; 3],
        )
        .unwrap();
        assert!(matches!(
            batch_interpolate(&[a, b]),
            Err(HermiteError::RaggedBatch { index: 1, .. })
        ));
    }

    #[test]
    fn spline_endpoints_and_knots() {
        let sample = PolylineSample::new(
            vec![vec![0.0], vec![1.0], vec![3.0]],
            vec![vec![1.0], vec![2.0], vec![2.0]],
        )
        .unwrap();
        let spline = HermiteSpline::interpolate(&sample).unwrap();
        assert_eq!(spline.eval(0.0).unwrap(), vec![0.0]);
        assert_eq!(spline.eval(1.0).unwrap(), vec![3.0]);
        // interior knot shared by both segments
        let knot = spline.eval(0.5).unwrap();
        assert!((knot[0] - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn spline_rejects_out_of_range() {
        let spline = HermiteSpline::interpolate(&straight_line_sample()).unwrap();
        assert!(spline.eval(-0.1).is_err());
        assert!(spline.eval(1.1).is_err());
    }

    #[test]
    fn straight_line_derivative_global_scaling() {
        // single segment: K = 1, df/dt = (1, 0) -> global derivative (1, 0)
        let spline = HermiteSpline::interpolate(&straight_line_sample()).unwrap();
        for s in [0.0, 0.25, 0.5, 1.0] {
            assert_eq!(spline.derivative(s).unwrap(), vec![1.0, 0.0]);
        }
    }

    #[test]
    fn constant_spline_zero_derivative() {
        let seg = hermite_segment(&[2.0, -1.0], &[2.0, -1.0], &[0.0, 0.0], &[0.0, 0.0]).unwrap();
        let spline = HermiteSpline::from_segments(vec![seg.clone(), seg]).unwrap();
        for s in [0.0, 0.3, 0.5, 0.99, 1.0] {
            assert!(spline.derivative(s).unwrap().iter().all(|&d| d == 0.0));
        }
    }

    #[test]
    fn knot_derivative_continuity() {
        let sample = PolylineSample::new(
            vec![vec![0.0], vec![1.0], vec![1.5], vec![4.0]],
            vec![vec![1.0], vec![0.5], vec![2.0], vec![1.0]],
        )
        .unwrap();
        let spline = HermiteSpline::interpolate(&sample).unwrap();
        let k = spline.segment_count() as f64;
        for m in 1..spline.segment_count() {
            let s = m as f64 / k;
            // left limit: previous segment at t = 1; right: located segment at t = 0
            let left: Vec<f64> = spline.segments()[m - 1]
                .deriv_local(1.0)
                .iter()
                .map(|d| k * d)
                .collect();
            let right = spline.derivative(s).unwrap();
            for (l, r) in left.iter().zip(&right) {
                assert!((l - r).abs() <= 1e-12 * (1.0 + r.abs()));
            }
        }
    }

    #[test]
    fn segment_curve_matches_spline() {
        let sample = PolylineSample::new(
            vec![vec![0.0], vec![1.0], vec![3.0]],
            vec![vec![1.0], vec![2.0], vec![2.0]],
        )
        .unwrap();
        let spline = HermiteSpline::interpolate(&sample).unwrap();
        let curve = spline.segment_curve(1).unwrap();
        assert_eq!(curve.domain(), (0.5, 1.0));
        for s in [0.5, 0.7, 0.9] {
            assert_eq!(curve.eval(s), spline.eval(s).unwrap());
            assert_eq!(curve.deriv(s), spline.derivative(s).unwrap());
        }
        assert!(spline.segment_curve(2).is_err());
    }

    proptest! {
        /// Eq-style endpoint conditions hold for random segment data.
        #[test]
        fn segment_conditions_hold(
            pk in -100.0..100.0f64,
            pk1 in -100.0..100.0f64,
            vk in -100.0..100.0f64,
            vk1 in -100.0..100.0f64,
        ) {
            let seg = seg1d(pk, pk1, vk, vk1);
            let scale = 1.0 + pk.abs().max(pk1.abs()).max(vk.abs()).max(vk1.abs());
            prop_assert!((seg.eval_local(0.0)[0] - pk).abs() <= 1e-12 * scale);
            prop_assert!((seg.eval_local(1.0)[0] - pk1).abs() <= 1e-12 * scale);
            prop_assert!((seg.deriv_local(0.0)[0] - vk).abs() <= 1e-12 * scale);
            prop_assert!((seg.deriv_local(1.0)[0] - vk1).abs() <= 1e-12 * scale);
        }

        /// Batched interpolation equals the per-segment loop exactly.
        #[test]
        fn batch_equals_naive(
            m in 1usize..8,
            n in 2usize..20,
            seed in any::<u64>(),
        ) {
            let mut state = seed | 1;
            let mut next = move || {
                // xorshift64*, plenty for test data
                state ^= state >> 12;
                state ^= state << 25;
                state ^= state >> 27;
                (state.wrapping_mul(0x2545F4914F6CDD1D) >> 11) as f64 / (1u64 << 53) as f64 * 20.0 - 10.0
            };
            let samples: Vec<PolylineSample> = (0..m)
                .map(|_| {
                    let points: Vec<Vec<f64>> = (0..n)
                        .map(|i| vec![i as f64 + next() * 0.25, next()])
                        .collect();
                    let velocities: Vec<Vec<f64>> = (0..n).map(|_| vec![next(), next()]).collect();
                    PolylineSample::new(points, velocities).unwrap()
                })
                .collect();
            let batched = batch_interpolate(&samples).unwrap();
            for (sample, spline) in samples.iter().zip(&batched) {
                let naive = HermiteSpline::interpolate(sample).unwrap();
                prop_assert_eq!(&naive, spline);
            }
        }
    }
}
