// SPDX-License-Identifier: Apache-2.0

//! Sideband cooling of trapped-ion chains with chiral (nonreciprocal)
//! photon-mediated couplings.
//!
//! The crate offers three independent routes to the steady-state phonon
//! occupation of the strongly driven *target* ion:
//!
//! * the full Lindblad generator on the composite spin ⊗ phonon space and its
//!   null space ([`liouvillian`], [`steady_state`]),
//! * a reduced linear system with `N(N+3)/2` unknowns valid under asymmetric
//!   driving ([`reduced`]),
//! * closed-form expressions for two ions ([`analytic`]).
//!
//! Time evolution from a thermal state and exponential cooling-rate fits live
//! in [`dynamics`] and [`rate_fit`]; [`sweep`] maps any of the solvers over a
//! two-dimensional parameter grid.
//!
//! Units: the trap frequency ν is the frequency unit (ν = 1), times are in
//! ν⁻¹.

pub mod analytic;
pub mod cli;
pub mod dynamics;
mod error;
pub mod liouvillian;
pub mod model;
pub mod operator_algebra;
pub mod rate_fit;
pub mod reduced;
pub mod steady_state;
pub mod sweep;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub use faer::c64;

/// Version string recorded in manifests and sweep provenance.
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");
