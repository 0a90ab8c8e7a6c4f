//! Value functions for long-run-average (Cesàro) and discounted (Abel) payoffs
//! on finite transition systems and explicit trajectory bundles.
//!
//! The crate provides
//!
//! * eventually-periodic trajectories with shift and concatenation
//!   ([`trajectory`]),
//! * exact closed-form payoff evaluation ([`payoff`]),
//! * value maps `V_s`, `V_best` and alternating game values together with the
//!   max-mean-cycle limit oracle ([`valuemap`]),
//! * checkers for the weak Dynamic Programming Principle and the subsolution
//!   inequalities ([`dpp`]),
//! * convergence and uniform-optimality diagnostics relating the two payoff
//!   families ([`tauberian`]),
//! * a catalog of canonical models, including a counterexample bundle whose
//!   Cesàro and Abel limits disagree ([`zoo`]),
//! * a batch CLI front end ([`cli`], binary `uval`).

pub mod cli;
pub mod dpp;
mod error;
pub mod meancycle;
pub mod model;
pub mod payoff;
pub mod tauberian;
pub mod trajectory;
pub mod valuemap;
pub mod zoo;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
