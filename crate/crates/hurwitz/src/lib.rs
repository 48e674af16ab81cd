//! Semisimple Frobenius-manifold data on Hurwitz spaces of genus 0 and 1.
//!
//! A point of a Hurwitz space is a branched covering of the sphere: a rational
//! map `λ(z)` in genus 0, an elliptic function in genus 1.  This crate builds
//! the Frobenius-manifold data attached to such a covering — canonical
//! coordinates (the finite critical values), the diagonal flat metric of a
//! primary differential, rotation coefficients from the Bergmann kernel,
//! isomonodromic Hamiltonians — evaluates the Bergmann and isomonodromic
//! tau-functions in closed form together with the G-function, and verifies
//! the defining identities by independent finite-difference oracles.

pub mod descriptor;
pub mod error;
pub mod frobenius;
pub mod genus0;
pub mod genus1;
pub mod series;
pub mod theta;
pub mod verify;

pub use error::{Error, Result};
pub use frobenius::{Covering, Frobenius, FrobeniusData, PrimaryDifferential};
pub use genus0::{BranchData, CoveringG0};
pub use genus1::CoveringG1;
pub use series::TruncatedSeries;
pub use theta::ThetaCache;

/// Complex double-precision scalar used throughout.
pub type C64 = num_complex::Complex64;
