//! Numerics for the radial linearized Ginzburg-Landau system around a
//! degree-d vortex: the vortex profile, canonical solution bases at 0 and at
//! infinity, connection coefficients, and first eigenvalues of the weighted
//! quadratic-form pencil on the unit disc.

// NaN must fail the range checks, hence `!(x > 0.0)` style guards.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod branch;
pub mod connection;
pub mod eigen;
pub mod error;
pub mod farfield;
pub mod interp;
pub mod local_basis;
pub mod ode;
pub mod par;
pub mod params;
pub mod profile;
pub mod quad;
pub mod verify;

pub use error::{Error, Result};
