//! Monte-Carlo experiment harness around the `see-core` solvers: JSON
//! scenario configs, paired-channel trials across solvers and parameter
//! sweeps, CSV/JSONL output, and a least-squares timing fit for the
//! linear-complexity check.

pub mod config;
pub mod runner;
pub mod timing;
