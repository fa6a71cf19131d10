//! Graph-Laplacian regularized estimation of a design matrix.
//!
//! The crate covers the full pipeline of the simulation study: random
//! geometric graphs and their Laplacian spectra ([`graph`]), synthetic data
//! from the linear model `Y = Theta X + Omega` ([`synth`]), closed-form
//! Laplacian and ridge estimators with an iterative cross-check ([`solver`]),
//! the error bounds and lemma diagnostics ([`bounds`]), and the seeded
//! experiment engine behind the `glreg` CLI ([`harness`]).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod graph;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod rng;
pub mod solver;
pub mod synth;

pub use error::{Error, Result};
