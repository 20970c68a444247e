//! Library surface of the command-line front end, so scenario execution can
//! be driven directly from integration tests.

// `!(x > 0.0)` guards reject NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod scenario;
