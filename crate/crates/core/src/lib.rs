pub mod embeddings;
pub mod cli;
pub mod ensemble;
pub mod error;
pub mod imageproc;
pub mod knn;
pub mod metrics;
pub mod pipeline;
pub mod sampling;
pub mod synthgen;

pub use error::{Error, Result};
