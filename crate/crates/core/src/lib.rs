//! Numerical laboratory for the constrained nonlocal Fokker–Planck equation
//!
//! ```text
//! τ ∂ₜρ = ∂ₓ(ν² ∂ₓρ + (H'(x) − σ(t)) ρ),     ∫ x ρ(t, x) dx = ℓ(t)
//! ```
//!
//! in the fast-reaction regime `τ = exp(−h_#/ν²)`, together with its
//! interacting-particle analogue and the rate-independent hysteresis model
//! obtained as `ν → 0`.

// `!(a < b)` is used on purpose so that NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod fp_solver;
pub mod harness;
pub mod io;
pub mod langevin;
pub mod limit_model;
pub mod potential;
pub mod record;
pub mod roots;

pub use error::{Error, Result};
pub use fp_solver::{ControlSpec, Coupling, Grid, GridDensity, SimState};
pub use limit_model::{LimitState, LimitTrajectory, SegmentLabel};
pub use potential::{
    default_potential, scaling_regime, Branch, DoubleWellPotential, Landmarks, LogQuadratic, PotentialModel,
    ScalingRegime, Tabulated,
};
pub use record::{TrajectoryRecord, TrajectoryRow, SIMULATION_HEADER};
