//! One-dimensional Gaussian wavepacket colliding with a square potential barrier.
//!
//! During the collision the momentum distribution transiently develops structure
//! that cannot occur classically: the integrated probability of finding momentum
//! above a threshold p exceeds its initial value. The crate computes this excess,
//!
//!   G(p,t) = integral over p' > p of |<p'|psi(t)>|^2 - |<p'|psi(0)>|^2,
//!
//! with two independent engines: a fast analytic one built on a uniform
//! saddle-point approximation (complex saddle + Faddeeva w-function), and a
//! split-operator grid oracle that propagates the Schroedinger equation by brute
//! force. A classical Monte Carlo ensemble with the matching phase-space density
//! provides the negative control: its G never goes significantly positive.
//!
//! Everything works in the scaled unit system of [`units::UnitSystem`]; see
//! `fig1.json` at the repository root for the reference parameter set.

pub mod analytic;
pub mod barrier;
pub mod cli;
pub mod config;
pub mod error;
pub mod faddeeva;
pub mod grid;
pub mod observables;
pub mod output;
pub mod units;

pub use error::Error;

/// Crate result alias used across modules.
pub type Result<T> = std::result::Result<T, Error>;
