//! Batch commands and the HTTP inspection service for `thermoscan`.

pub mod commands;
pub mod error;
pub mod output;
pub mod service;
pub mod store;

pub use error::CliError;
pub use store::Store;
