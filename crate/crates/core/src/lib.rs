//! Exact arithmetic differential algebra.
//!
//! p-derivations and Frobenius lifts over truncated Witt rings, arithmetic and
//! Kolchin jets, δ-homomorphisms of the additive and multiplicative groups,
//! and classical δ-cocycles on `GL_n` with their decomposition machinery.

pub mod acceptance;
pub mod cocycles;
pub mod decomp;
pub mod error;
pub mod homs;
pub mod jet;
pub mod matrix;
pub mod rings;
pub mod sampling;

pub use error::{BackendKind, Error, Result};
pub use matrix::{MatrixOps, SquareMatrix};
pub use jet::{JetAlgebra, JetPoint, JetPolynomial, JetPresentation, JetVar, Monomial};
pub use rings::{DeltaRing, RingParams, SeriesElement, SeriesRing, WittElement, WittRing};
