//! Secrecy energy efficiency (SEE) maximization for IRS-assisted MIMOME
//! wiretap channels.
//!
//! The crate provides:
//! - complex dense linear-algebra primitives ([`linalg`]),
//! - a Rician/free-space-path-loss geometric channel generator ([`channel`]),
//! - the wiretap system model with closed-form Wirtinger gradients ([`model`]),
//! - Euclidean projections onto the feasible sets ([`project`]),
//! - the penalty-dual-decomposition alternating gradient projection solver
//!   ([`solver`]),
//! - baseline schemes: zero-forcing with randomized phases, no-IRS, and
//!   full-power ([`baselines`]),
//! - a finite-difference gradient checker ([`gradcheck`]).

pub mod baselines;
pub mod channel;
pub mod error;
pub mod gradcheck;
pub mod linalg;
pub mod model;
pub mod project;
pub mod solver;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
