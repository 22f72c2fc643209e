pub mod classifiers;
pub mod cli;
pub mod data;
pub mod encoders;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod recurrent;

pub use error::{Error, Result};
