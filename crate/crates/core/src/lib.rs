//! Learning entanglement quantities of spin-chain states from local Pauli
//! measurements.
//!
//! The crate bundles an exact simulator for small registers ([`qcore`]), the
//! entanglement quantities used as regression targets ([`entmetrics`]), the
//! measurement sets that form network inputs ([`measure`]), dataset
//! generators ([`datagen`]), a small dense/LSTM network stack trained with
//! Adam ([`neural`]) and the evaluation statistics ([`eval`]).

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod datagen;
pub mod entmetrics;
pub mod error;
pub mod eval;
pub mod io;
pub mod measure;
pub mod neural;
pub mod qcore;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
