pub mod datagen;
pub mod cli;
pub mod ddcm;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod metrics;
pub mod model;
pub mod nn;
pub mod phase;
pub mod slp;
pub mod sweep;

pub use error::{Error, Result};
