//! Simulation and estimation toolkit for normal approximation of Poisson
//! functionals: sampling, difference and Mehler operators, Monte Carlo
//! estimates of Stein-bound components, and Berry–Esseen rate experiments.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clt;
pub mod error;
pub mod exec;
pub mod functionals;
pub mod malliavin;
pub mod normal;
pub mod point_process;
pub mod rng;
pub mod stats;
pub mod stein_bounds;
pub mod variance;

pub use error::{Error, Result};
pub use rng::RngStream;
