pub mod cli;
pub mod entanglement;
pub mod error;
pub mod langevin;
pub mod numerics;
pub mod parallel;
pub mod params;
pub mod spectrum;
pub mod steady_state;
pub mod sweep;

pub use error::{Error, Result};
