//! Exact arithmetic: rationals, complex rationals, polynomials in one to
//! three variables, real root isolation, a real quadratic field tower, and
//! dense linear algebra over any exact field.
//!
//! Everything downstream that makes an equality decision (classifiers,
//! versality predicates, germ reductions) runs on these types; floating
//! point appears only in the numeric pipeline and in diagnostics.

pub mod crat;
pub mod linalg;
pub mod poly1;
pub mod poly2;
pub mod poly3;
pub mod real_roots;
pub mod scalar;
pub mod tower;

pub use crat::CRat;
pub use poly1::Poly1;
pub use poly2::Poly2;
pub use poly3::Poly3;
pub use scalar::{Field, OrderedField, Ring};
pub use tower::{QuadExt, TowerElem};

use num::BigInt;

/// Exact rational scalar used across the library.
pub type Rat = num::BigRational;

/// Shorthand constructor: `rat(n, d)` = n/d.
///
/// Panics when `d == 0` (malformed literal, programmer error).
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Integer as a rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}
