//! Automorphism groups of integral hyperbolic lattices.
//!
//! A hyperbolic lattice here is `Z^n` with an integral symmetric Gram
//! matrix `A` of signature `(n-1, 1)`. The group `{g ∈ GL_n(Z) : g A g^tr = A}`
//! is generated by running a Voronoi-type algorithm on the dual cones of
//! negative-norm vectors: perfect points are enumerated up to the action
//! of the group, and stabilizers plus connecting elements generate it.

pub mod cone;
pub mod error;
pub mod linalg;
pub mod orbit;
pub mod pdlat;
pub mod polycone;
pub mod voronoi;
pub mod watson;

pub use error::{Error, Result};
pub use linalg::{IntMatrix, IntVector, Rat, RatMatrix, RatVector, UnimodularMap};
