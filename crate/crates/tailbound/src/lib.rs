//! Tail-bound toolkit: closed-form Chernoff-style bounds for sums of
//! bounded random variables, exact oracles that verify every bound at
//! desk scale, the stable-selector and weight-function constructions
//! behind them, and seeded Monte Carlo comparison — all exposed through a
//! batch CLI.

pub mod bounds;
pub mod cli;
pub mod divergence;
pub mod error;
pub mod mechanisms;
pub mod montecarlo;
pub mod oracles;
pub mod verify;

pub use error::{Error, Result};
