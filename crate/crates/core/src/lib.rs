//! SPx: a synthetic prior with covariates for borrowing historical control
//! data, with comparator priors, effective sample size, a two-stage adaptive
//! design and a replicated-trial simulation harness.

pub mod design;
pub mod error;
pub mod inference;
pub mod io;
pub mod model;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
