//! Quantum synchronization of a driven, dissipative two-spin NMR system.
//!
//! The crate models a heteronuclear spin pair coupled to a fermionic bath, drives one
//! spin, and quantifies phase locking through Husimi Q distributions and a
//! synchronization measure. An interferometric circuit reconstructs the reduced Q
//! distribution from a single-spin expectation value.

pub mod cli;
pub mod dissipation;
pub mod error;
pub mod experiments;
pub mod hamiltonians;
pub mod imhd;
pub mod io;
pub mod liouville;
pub mod phase_space;
pub mod random;
pub mod system;

pub use error::{Error, Result};
pub use system::{DensityMatrix, DriveConfig, Level, Operator, SpinSystemConfig, C64};
