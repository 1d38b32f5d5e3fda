//! Numerical laboratory for alpha-harmonic maps from the round 2-sphere into
//! warped-product cylinders S^2 x I with metric psi(t)(ds^2 + dt^2).
//!
//! The crate provides:
//! - warp profiles and the energy-quantization ledger ([`warp`]),
//! - an icosphere finite-element discretization of the domain ([`mesh`]),
//! - the energies E and E_alpha with exact gradients and Euler-Lagrange
//!   residuals ([`energy`]),
//! - projected-descent minimization with alpha-continuation, degree-class
//!   and neck-family initializers ([`solver`]),
//! - concentration detection, bubble extraction, neck oscillation and
//!   energy-identity defect accounting ([`bubbles`]),
//! - arbitrary-precision root finding for the oscillatory warp's critical
//!   points and the accumulation of harmonic-sphere energies at 4 pi
//!   ([`spectrum`]).
//!
//! See the crate examples for one runnable program per capability, and the
//! `warp-harmonic` binary for the scripting interface.

pub mod error;
pub mod geom;
pub mod parallel;
pub mod warp;
pub mod mesh;
pub mod energy;
pub mod spectrum;

pub use error::{Error, Result};
