//! Benchmark harness around the `epibo` optimizer: configuration files,
//! (d, fill, seed) sweeps with ratio tables, and CSV/JSON emission. The
//! `epibench` binary is a thin command-line front end over this crate.

pub mod config;
pub mod io;
pub mod sweep;
