//! Curie-Weiss model of an ideal quantum measurement, end to end: exact
//! truncation dynamics of the tested spin, bath suppression of recurrences,
//! mean-field magnet thermodynamics, registration kinetics of the pointer
//! magnetization, Born-statistics sampling, and brute-force oracles that
//! validate the analytic formulas at small N.
//!
//! Natural units throughout: hbar = k_B = 1 and the quartet coupling J is the
//! energy unit, so times are in hbar/J and temperatures and couplings in J.

// `!(x > 0.0)` guards reject NaN along with the out-of-range values;
// `x <= 0.0` would silently accept NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dephasing;
pub mod error;
pub mod oracle;
pub mod params;
pub mod registration;
pub mod spin;
pub mod table;
pub mod thermo;

pub use error::{Error, Result};
pub use params::{ModelParams, Sector};
pub use spin::{EnsembleWeights, SpinDensityMatrix};
