//! Simulation of continuous time-dependent quantum measurements in finite
//! dimensions.
//!
//! The crate builds discrete repeated-measurement chains, their continuum
//! limit (the measurement differential equations and the time-ordered
//! exponential series that solves them), the Zeno and anti-Zeno closed forms,
//! geometric-phase reductions for finite-rank projectors, and a handful of
//! worked scenarios (von Neumann steering, a continuously measured spin-½,
//! a swept spectral window on a lattice).
//!
//! Units: ħ = 1, dimensionless time.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod antizeno;
pub mod chain;
pub mod continuum;
mod error;
pub mod family;
pub mod linalg;
pub mod measurement;
pub mod operators;
pub mod path;
pub mod random;
pub mod scenarios;
mod tolerance;

pub use error::{Error, Result};
pub use family::{Branch, DerivativeMode, HeisenbergFamily, ProjectorFamily, RotationFactor, UnitaryFamily};
pub use linalg::{mat_exp, CMatrix, CVector};
pub use operators::{DensityOperator, HermitianOperator, Projector, StateVector, UnitaryOperator};
pub use path::ScalarPath;
pub use tolerance::{Tolerances, DEFAULT_MAX_DIM};
