pub mod cli;
pub mod error;
pub mod gradedness;
pub mod norms;
pub mod properties;
pub mod sampling;
pub(crate) mod solvers;
pub mod suite;
pub mod topk;
pub mod vectors;

pub use error::{Error, Result};
pub use norms::{Norm, NormSpec};
pub use vectors::{IndexSet, Vector};
