//! Experiment driver behind the `heis-sio` binary.

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;
