//! Library surface of the pipeline commands, shared by the `maivar` binary
//! and the integration tests.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
