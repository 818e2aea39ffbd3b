//! # streamflow
//!
//! Velocity fields along flow streamlines, computed by reducing the momentum
//! equations to independent per-streamline ODEs:
//!
//! - [`geometry`]: parametric streamline curves (gear-tooth involute, lobe
//!   profile, suction helix), rigid-rotation time evolution and
//!   tangent-field consistency checks.
//! - [`hermite`]: C¹ cubic Hermite interpolation of sampled streamlines,
//!   including the batched block-diagonal matrix formulation that computes
//!   all `4 (N-1) M` coefficients in `N-1` sparse mat-vecs.
//! - [`ode`]: the reduced second-order equations (general geometry and the
//!   closed-form gear-pump case), fixed-step RK4 / Adams-Moulton 2 / BDF2
//!   integrators with Newton-handled implicit stages, and segment chaining.
//! - [`batch`]: embarrassingly parallel batch execution with deterministic
//!   results across serial, shared-pool and partitioned strategies, plus
//!   speedup measurement.
//! - [`cli`], [`io`], [`config`]: the `streamflow` command-line front end
//!   and its file formats.

pub mod batch;
pub mod cli;
pub mod config;
pub mod geometry;
pub mod hermite;
pub mod io;
pub mod ode;

pub use batch::{
    measure_speedup, solve_batch, verify_determinism, BatchJob, ExecutionStrategy, JobKind,
    SpeedupReport, WorkGeometry, WorkItem,
};
pub use geometry::{
    check_tangent_alignment, make_helix, make_lobe, make_tooth, rotate_snapshot, CurveKind,
    PolylineSample, RotationEvolution, StreamlineCurve,
};
pub use hermite::{
    assemble_block_matrix, batch_interpolate, block_matvec, density_number, hermite_segment,
    BatchVector, BlockDiagonalMatrix, CubicSegment, HermiteSpline,
};
pub use ode::{
    build_ode, chain_solve, gear_pump_ode, halve_step_order_check, integrate, FluidProperties,
    InitialConditions, InverseMapConvention, InverseMapMode, Method, OdeSolution, PressureModel,
    SolverConfig, StreamlineODE,
};
