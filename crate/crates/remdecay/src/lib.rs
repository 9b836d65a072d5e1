//! File formats, configuration and the batch pipeline around `remdecay-core`.

pub mod cli;
pub mod config;
pub mod formats;
pub mod io;
pub mod log;
pub mod pipeline;

pub use config::RunConfig;
