//! Finite-difference laboratory for microstructure energies with surface
//! energy and a variable well depth on the strip `[0, L] x [0, 1]`.

// `!(a > b)` style guards are used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod calibration;
pub mod cli;
pub mod constructions;
pub mod energy;
pub mod error;
pub mod field;
pub mod landscape;
pub mod quad;
pub mod wsf;

pub use energy::{EnergyBreakdown, EnergyParams, Variant};
pub use error::{Error, Result};
pub use field::{Grid, ScalarField};
