//! Orchestration layer for the simulator: run configuration, parallel
//! trajectory ensembles, and analysis-ready output files.

pub mod check;
pub mod config;
pub mod output;
pub mod report;
pub mod runner;
