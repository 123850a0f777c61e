// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid phonon truncation n_max = {0} (need n_max >= 1)")]
    InvalidTruncation(usize),

    #[error("site {site} out of range for a chain of {n_ions} ions")]
    SiteOutOfRange { site: usize, n_ions: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("superoperator dimension {superop_dim} exceeds the assembly cap {cap}")]
    TooLarge { superop_dim: usize, cap: usize },

    #[error(
        "steady state is not unique: two smallest singular values {smallest:.3e} and {second:.3e}"
    )]
    AmbiguousSteadyState { smallest: f64, second: f64 },

    #[error("null vector has vanishing trace; no normalizable steady state")]
    NoNormalizableSolution,

    #[error("steady state failed a physical check: {0}")]
    NonPhysical(String),

    #[error("normalized occupation undefined for ion {ion}: single-ion reference occupation is zero (Ω = 0)")]
    UndefinedNormalization { ion: usize },

    #[error("outside the validity region of the closed form: {0}")]
    OutOfValidity(String),

    #[error("step size underflow at t = {t:.6e} (h = {h:.3e}); the problem is too stiff for explicit stepping, reduce Γ·dt or use a Krylov propagator")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("cooling-rate fit failed: {0}")]
    FitFailure(String),

    #[error("reduced system is singular (condition number {condition:.3e})")]
    SingularSystem { condition: f64 },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid sweep definition: {0}")]
    InvalidSpec(String),

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),
}

impl Error {
    /// True for errors caused by inputs rather than by a numerical solver.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidTruncation(_)
                | Error::SiteOutOfRange { .. }
                | Error::InvalidConfig(_)
                | Error::UnknownPreset(_)
                | Error::InvalidSpec(_)
                | Error::DimensionMismatch { .. }
        )
    }
}
