//! Scalar traits for exact arithmetic.
//!
//! `Ring` is what polynomial arithmetic needs; `Field` adds inversion;
//! `OrderedField` adds an exact sign, which is what every classification
//! predicate ultimately consumes.

use super::Rat;
use num::{One, Signed, ToPrimitive, Zero};
use std::fmt::Debug;

/// Commutative ring with exact equality.
pub trait Ring: Clone + PartialEq + Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn from_i64(n: i64) -> Self;
}

/// Ring in which every nonzero element is invertible.
pub trait Field: Ring {
    /// Multiplicative inverse; `None` exactly on zero.
    fn inv(&self) -> Option<Self>;

    /// Embed a rational.
    fn from_rat(r: &Rat) -> Self;

    /// `self / other`; `None` exactly when `other` is zero.
    fn div(&self, other: &Self) -> Option<Self> {
        other.inv().map(|i| self.mul(&i))
    }
}

/// Field with a decidable order, i.e. an exact sign.
pub trait OrderedField: Field {
    /// Exact sign: −1, 0, or +1.
    fn signum(&self) -> i8;

    /// Approximate value for reports and diagnostics.
    fn to_f64(&self) -> f64;

    fn is_positive(&self) -> bool {
        self.signum() > 0
    }
    fn is_negative(&self) -> bool {
        self.signum() < 0
    }
    fn abs(&self) -> Self {
        if self.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }
}

impl Ring for Rat {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_i64(n: i64) -> Self {
        Rat::from_integer(n.into())
    }
}

impl Field for Rat {
    fn inv(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }
}

impl OrderedField for Rat {
    fn signum(&self) -> i8 {
        if Zero::is_zero(self) {
            0
        } else if Signed::is_positive(self) {
            1
        } else {
            -1
        }
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}
