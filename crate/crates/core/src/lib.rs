//! Quantum Liang information flow (QLIF) and OTOC diagnostics for the open
//! mixed-field Ising chain
//! `H = -J Σ Z_i Z_{i+1} - B Σ X_i - h_z Σ Z_i`.
//!
//! Two engines evolve states: dense exact diagonalization ([`ed`]) for up to
//! 12 sites and matrix product states with TEBD ([`mps`]) for longer chains.
//! [`qlif`] pairs a full and a frozen evolution to produce
//! `T_d(t) = S_full(t) - S_frozen(t)`, [`otoc`] computes infinite-temperature
//! OTOCs, and [`analysis`] fits power laws, light cones and the late-time
//! chaos verdict. [`config`] and [`runner`] drive the `qlif` command-line tool.

pub mod analysis;
pub mod config;
pub mod ed;
pub mod error;
pub mod io;
pub mod linalg;
pub mod mps;
pub mod ops;
pub mod otoc;
pub mod qlif;
pub mod runner;
pub mod spin_model;

pub use error::{Error, Result};
