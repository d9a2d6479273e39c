pub mod contraction;
pub mod diagrams;
pub mod error;
pub mod model;
pub mod operators;
pub mod simulator;
pub mod symbolic;

pub use error::{Result, TcgError};
