//! Command implementations behind the `fracbubble` binary.

pub mod commands;
pub mod config;
pub mod output;
pub mod svg;
