//! Persistence, HTTP API and command line around `altbudget-core`.

pub mod api;
pub mod cli;
pub mod runs;
pub mod store;
