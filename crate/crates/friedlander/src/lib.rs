//! Frequency-localized half-wave kernel of the Friedlander half-plane
//! `{x > 0}`, operator `∂²_x + (1 + x)∂²_y`, Dirichlet data on `x = 0`.
//!
//! Two evaluation paths are provided: the gallery-mode sum over Airy
//! eigenmodes ([`spectral`]) and the reflection-indexed oscillatory-integral
//! representation ([`parametrix`]). The two agree identically through the
//! Airy–Poisson summation formula, which [`verify`] checks numerically along
//! with the dispersive envelopes.
//!
//! The crate builds without `std` (it needs `alloc`); the `parallel` feature
//! spreads grid scans over a rayon pool with deterministic reductions.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod airy;
pub mod cutoff;
pub mod gallery;
pub mod math;
pub mod parametrix;
pub mod quad;
pub mod spectral;
pub mod verify;

mod par;

use alloc::string::String;

pub use math::C64;

/// Everything that can go wrong in this crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain { name: &'static str, value: f64, expected: &'static str },
    #[error("index {index} is outside 1..={max}")]
    Range { index: usize, max: usize },
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("no convergence after {evaluations} evaluations (partial value {partial}, error estimate {err_estimate:e})")]
    NonConvergence { partial: C64, err_estimate: f64, evaluations: u64 },
    #[error("regime violated: {0}")]
    Regime(String),
    #[error("non-finite value produced by {0}")]
    NotFinite(&'static str),
    #[error("insufficient range: {0}")]
    InsufficientRange(String),
}

pub type Result<T> = core::result::Result<T, Error>;

/// Direction of propagation, `e^{±it√λ}`; also selects `A₊` or `A₋`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    #[inline]
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}
