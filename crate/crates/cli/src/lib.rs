//! File formats, source specs and the replicated-experiment runner behind the
//! `pinvtte` binary.

pub mod config;
pub mod experiment;
pub mod io;
pub mod output;
pub mod sources;

pub use pinvtte_core as core;
