//! Command-line layer over `distboost-core`: CSV input, model and manifest
//! files, and the bundled simulation experiments.

pub mod args;
pub mod commands;
pub mod csvio;
pub mod manifest;
pub mod model;
