//! Skellam-type point processes of order k.
//!
//! Exact probability mass functions, Lévy measures, moments, characteristic
//! exponents, path simulation, and a seeded Monte Carlo harness that checks
//! every analytic formula against simulation and brute-force oracles.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod governing;
pub mod montecarlo;
pub mod process;
pub mod specfun;
pub mod subordinators;
pub mod trajectories;

pub use error::{Error, Result};
