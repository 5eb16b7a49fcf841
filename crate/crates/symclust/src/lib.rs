//! File formats, micro-data ingest, synthetic data and the command-line
//! pipeline around [`symclust_core`].

pub mod cli;
pub mod error;
pub mod formats;
pub mod ingest;
pub mod pipeline;
pub mod profile;
pub mod schema_file;
pub mod synth;

pub use error::{Error, Result};
pub use symclust_core as core;
