//! Experiment definition, driver, and CSV emission for the fastslow
//! transport laboratory.

pub mod config;
pub mod io;
pub mod runner;
