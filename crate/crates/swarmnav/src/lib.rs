//! File formats, scenario generation, batch sweeps and the command-line
//! front end around `swarmnav-core`.

pub mod cli;
pub mod config;
pub mod fixtures;
pub mod formats;
pub mod scenario;
pub mod sweep;
pub mod trace;
