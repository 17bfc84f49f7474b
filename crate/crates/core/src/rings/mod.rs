//! Exact δ-ring backends.
//!
//! Two settings share one contract, [`DeltaRing`]:
//!
//! * [`WittRing`]: `W(F_{p^m}) / p^N`, elements are polynomials of degree `< m`
//!   over `Z/p^N` modulo a lift of an irreducible polynomial. It carries the
//!   Frobenius lift `φ` and the p-derivation `δx = (φ(x) - x^p) / p`.
//! * [`SeriesRing`]: `Q[[t]] / t^M` with the derivation `d/dt`.
//!
//! Every element carries its own precision (p-adic digits, or number of known
//! series coefficients). Binary operations truncate to the smaller precision,
//! `δ` consumes one digit. Nothing is ever padded.

mod fp;
mod series;
mod witt;

pub use series::{SeriesElement, SeriesRing};
pub use witt::{RingParams, WittElement, WittRing};

use std::fmt::Debug;

use num_bigint::BigInt;

use crate::error::{BackendKind, Error, Result};
use crate::sampling::SampleRng;

/// The operation set shared by both backends.
///
/// Arithmetic-only operations (`frobenius`, `div_by_p`, `teichmueller`)
/// return [`Error::Unsupported`] on the Kolchin backend.
pub trait DeltaRing: Clone + Debug + Send + Sync {
    type Elem: Clone + Debug + PartialEq + Send + Sync;

    fn kind(&self) -> BackendKind;

    /// Precision of freshly constructed elements.
    fn max_precision(&self) -> u32;

    fn precision(&self, x: &Self::Elem) -> u32;

    /// Forget digits beyond `prec`. Never raises precision.
    fn truncate(&self, x: &Self::Elem, prec: u32) -> Self::Elem;

    fn from_integer(&self, n: i64) -> Self::Elem;

    fn from_bigint(&self, n: &BigInt) -> Self::Elem;

    fn zero(&self) -> Self::Elem {
        self.from_integer(0)
    }

    fn one(&self) -> Self::Elem {
        self.from_integer(1)
    }

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    fn neg(&self, a: &Self::Elem) -> Self::Elem;

    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    fn pow(&self, x: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut base = x.clone();
        let mut acc = self.truncate(&self.one(), self.precision(x));
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// `x^s` for a signed exponent; negative powers need a unit.
    fn pow_signed(&self, x: &Self::Elem, s: i64) -> Result<Self::Elem> {
        if s >= 0 {
            Ok(self.pow(x, s as u64))
        } else {
            let inv = self.invert(x)?;
            Ok(self.pow(&inv, s.unsigned_abs()))
        }
    }

    fn scale(&self, x: &Self::Elem, n: i64) -> Self::Elem {
        self.mul(x, &self.from_integer(n))
    }

    /// Zero at the element's own precision.
    fn is_zero(&self, x: &Self::Elem) -> bool;

    /// Equality at the minimum of the two precisions.
    fn equal(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        self.is_zero(&self.sub(a, b))
    }

    fn is_unit(&self, x: &Self::Elem) -> bool;

    fn invert(&self, x: &Self::Elem) -> Result<Self::Elem>;

    /// The p-derivation (arithmetic) or d/dt (Kolchin). Consumes one digit.
    fn delta(&self, x: &Self::Elem) -> Result<Self::Elem>;

    /// `δx = 0` at the available precision.
    fn is_constant(&self, x: &Self::Elem) -> Result<bool> {
        Ok(self.is_zero(&self.delta(x)?))
    }

    fn frobenius(&self, x: &Self::Elem) -> Result<Self::Elem>;

    /// Exact division by `p` of an element divisible by `p`; loses one digit.
    fn div_by_p(&self, x: &Self::Elem) -> Result<Self::Elem>;

    /// The residue characteristic on the arithmetic backend.
    fn prime(&self) -> Option<u64>;

    /// p-adic (arithmetic) or t-adic (Kolchin) valuation, capped at the precision.
    fn valuation(&self, x: &Self::Elem) -> u32;

    fn random(&self, rng: &mut SampleRng) -> Self::Elem;

    fn random_unit(&self, rng: &mut SampleRng) -> Self::Elem;

    /// A random element of the constants `{δ = 0}`.
    fn random_constant(&self, rng: &mut SampleRng) -> Self::Elem;

    fn render(&self, x: &Self::Elem) -> String;

    fn to_json(&self, x: &Self::Elem) -> serde_json::Value;

    /// Parse an element; integer inputs are exact and read at full precision.
    fn from_json(&self, v: &serde_json::Value) -> Result<Self::Elem>;
}

pub(crate) fn unsupported(op: &'static str, backend: BackendKind) -> Error {
    Error::Unsupported { op, backend }
}
