//! Discrete-event simulator of vehicular multi-fog computing with pluggable
//! task-offloading policies.

pub mod config;
pub mod env;
pub mod episode;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod nn;
pub mod policies;
pub mod sim;
pub mod world;

pub use error::{Error, Result};
