pub mod cli;
pub mod config;
pub mod error;
pub mod numeric;
pub mod output;
pub mod region;
pub mod spectral;
pub mod stream;
pub mod vorticity;
pub mod wave;

pub use error::{Error, Result};
