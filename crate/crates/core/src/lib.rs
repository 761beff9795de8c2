//! Simulation and verification toolkit for randomized Euler-product fields
//! and their multiplicative chaos measures.

pub mod chaos_measure;
pub mod cli;
pub mod coupling;
pub mod covariance_kernel;
pub mod critical_chain;
pub mod error;
pub mod field_engine;
pub mod numeric;
pub mod parallel;
pub mod primes;
pub mod rng;
pub mod special;
pub mod stats;
pub mod trig_sum;

pub use error::{Error, Result};
