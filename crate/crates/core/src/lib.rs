//! q-values, π₀ estimators and exact permutation tests for discrete
//! uniform P-values, plus a Monte Carlo simulation engine.

pub mod cli;
pub mod error;
pub mod exact;
pub mod io;
pub mod pi0;
pub mod qvalue;
pub mod sim;
pub mod special;
pub mod spline;
pub mod support;

pub use error::{Error, Result};
pub use support::{attach_and_tally, PValueSample, Rational, Support, SupportFrequencies};
