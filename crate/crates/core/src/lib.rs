pub mod channel;
pub mod codebook;
pub mod coherence;
pub mod config;
pub mod design;
pub mod dictionary;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod recovery;
pub mod simulator;

pub use error::{Error, Result};
