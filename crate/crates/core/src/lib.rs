//! Construction and verification of operators on finite truncations of the
//! full Fock space and of the free-group algebra.
//!
//! The crate builds the left/right creators, the free semicircular families
//! and their commutant generators, the antisymmetric tensor operator that
//! implements the inner derivation, and the coefficient families extracted
//! from it; algebraic identities among these are checked in exact integer
//! arithmetic while norm inequalities are evaluated in floating point with
//! certified-lower-bound estimates.

#![forbid(unsafe_code)]

pub mod checks;
pub mod derivation;
pub mod error;
pub mod fock;
pub mod freegroup;
pub mod linop;
pub mod norm;
pub mod poly;
pub mod rank;
pub mod scalar;
pub mod search;

pub use error::{Error, Result};
pub use linop::{commutator, LinOp};
pub use norm::{spectral_norm, NormEstimate, NormMethod, NormOptions};
pub use scalar::Scalar;
