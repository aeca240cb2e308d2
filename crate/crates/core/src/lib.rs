//! Evaluation engine for selective prediction, uncertainty estimation and
//! class-out-of-distribution detection over classifier prediction logs.

pub mod coodgen;
pub mod error;
pub mod kappa;
pub mod metrics;
pub mod oracle;
pub mod predlog;
pub mod report;
pub mod stats;
pub mod synthetic;

pub use error::{Error, Result};
