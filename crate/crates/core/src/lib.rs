//! Record processes on leaf-spanned subtrees of the Brownian continuum random
//! tree.
//!
//! The crate grows stick-breaking subtrees `T_n`, runs the separation-time
//! (record) process on them and measures how the number of records `X_n*`
//! fluctuates around its limit. Exact analytic laws live in [`analytics`] and
//! serve as oracles for the Monte Carlo modules; [`experiment`] wires
//! everything into reproducible runs.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod crt;
pub mod discrete;
pub mod error;
pub mod experiment;
pub mod fmt;
pub mod par;
pub mod quad;
pub mod records;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
