//! Complex numbers with exact rational real and imaginary parts.

use super::scalar::{Field, Ring};
use super::Rat;
use num::complex::Complex64;
use num::{ToPrimitive, Zero};
use std::fmt;

/// Exact complex rational.
#[derive(Clone, PartialEq, Eq)]
pub struct CRat {
    pub re: Rat,
    pub im: Rat,
}

impl CRat {
    pub fn new(re: Rat, im: Rat) -> Self {
        CRat { re, im }
    }

    pub fn from_rat(re: Rat) -> Self {
        CRat {
            re,
            im: Zero::zero(),
        }
    }

    pub fn from_i64(re: i64, im: i64) -> Self {
        CRat {
            re: Rat::from_integer(re.into()),
            im: Rat::from_integer(im.into()),
        }
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        CRat::from_i64(0, 1)
    }

    pub fn conj(&self) -> Self {
        CRat {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    /// |z|² as an exact rational.
    pub fn norm_sq(&self) -> Rat {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn is_real(&self) -> bool {
        Zero::is_zero(&self.im)
    }

    pub fn scale(&self, r: &Rat) -> Self {
        CRat {
            re: &self.re * r,
            im: &self.im * r,
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

impl Ring for CRat {
    fn zero() -> Self {
        CRat::from_i64(0, 0)
    }
    fn one() -> Self {
        CRat::from_i64(1, 0)
    }
    fn add(&self, other: &Self) -> Self {
        CRat {
            re: &self.re + &other.re,
            im: &self.im + &other.im,
        }
    }
    fn sub(&self, other: &Self) -> Self {
        CRat {
            re: &self.re - &other.re,
            im: &self.im - &other.im,
        }
    }
    fn mul(&self, other: &Self) -> Self {
        CRat {
            re: &self.re * &other.re - &self.im * &other.im,
            im: &self.re * &other.im + &self.im * &other.re,
        }
    }
    fn neg(&self) -> Self {
        CRat {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(&self.re) && Zero::is_zero(&self.im)
    }
    fn from_i64(n: i64) -> Self {
        CRat::from_i64(n, 0)
    }
}

impl Field for CRat {
    fn inv(&self) -> Option<Self> {
        let n = self.norm_sq();
        if Zero::is_zero(&n) {
            return None;
        }
        let c = self.conj();
        Some(CRat {
            re: c.re / &n,
            im: c.im / &n,
        })
    }
    fn from_rat(r: &Rat) -> Self {
        CRat::from_rat(r.clone())
    }
}

impl fmt::Debug for CRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}i)", self.re, self.im)
    }
}

impl fmt::Display for CRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if Zero::is_zero(&self.im) {
            write!(f, "{}", self.re)
        } else {
            write!(f, "{}{:+}i", self.re, self.im)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn field_axioms_spotcheck() {
        let a = CRat::new(rat(1, 2), rat(-3, 4));
        let b = CRat::new(rat(2, 5), rat(7, 3));
        let ab = a.mul(&b);
        let ba = b.mul(&a);
        assert_eq!(ab, ba);
        let inv = a.inv().unwrap();
        assert_eq!(a.mul(&inv), CRat::one());
        assert!(CRat::zero().inv().is_none());
    }

    #[test]
    fn conjugation_and_modulus() {
        let a = CRat::from_i64(3, 4);
        assert_eq!(a.norm_sq(), rat(25, 1));
        assert_eq!(a.mul(&a.conj()), CRat::from_i64(25, 0));
    }
}
