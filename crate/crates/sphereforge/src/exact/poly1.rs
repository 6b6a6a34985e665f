//! Dense univariate polynomials over an exact ring or field.
//!
//! Coefficients are stored ascending with trailing zeros trimmed, so the
//! degree of a nonzero polynomial is `coeffs.len() - 1` and the zero
//! polynomial has an empty coefficient vector.

use super::scalar::{Field, Ring};
use std::fmt;

#[derive(Clone, PartialEq)]
pub struct Poly1<T> {
    coeffs: Vec<T>,
}

impl<T: Ring> Poly1<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
            coeffs.pop();
        }
        Poly1 { coeffs }
    }

    pub fn zero() -> Self {
        Poly1 { coeffs: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Poly1::new(vec![c])
    }

    pub fn one() -> Self {
        Poly1::constant(T::one())
    }

    /// The monomial c·xᵏ.
    pub fn monomial(c: T, k: usize) -> Self {
        let mut coeffs = vec![T::zero(); k + 1];
        coeffs[k] = c;
        Poly1::new(coeffs)
    }

    pub fn x() -> Self {
        Poly1::monomial(T::one(), 1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of a nonzero polynomial; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient of xᵏ (zero beyond the stored length).
    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn leading(&self) -> Option<&T> {
        self.coeffs.last()
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(self.coeff(k).add(&other.coeff(k)));
        }
        Poly1::new(out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(self.coeff(k).sub(&other.coeff(k)));
        }
        Poly1::new(out)
    }

    pub fn neg(&self) -> Self {
        Poly1 {
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Poly1::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Poly1::new(out)
    }

    pub fn scale(&self, c: &T) -> Self {
        Poly1::new(self.coeffs.iter().map(|a| a.mul(c)).collect())
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Poly1::zero();
        }
        let mut out = Vec::with_capacity(self.coeffs.len() - 1);
        for (k, c) in self.coeffs.iter().enumerate().skip(1) {
            out.push(c.mul(&T::from_i64(k as i64)));
        }
        Poly1::new(out)
    }

    /// Horner evaluation.
    pub fn eval(&self, at: &T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(at).add(c);
        }
        acc
    }

    /// Drop all terms of degree > k.
    pub fn truncate(&self, k: usize) -> Self {
        Poly1::new(self.coeffs.iter().take(k + 1).cloned().collect())
    }

    /// Lowest degree with a nonzero coefficient (order of vanishing at 0).
    pub fn order_at_zero(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// Substitute `inner` for the variable, truncating past degree `k`.
    pub fn compose_trunc(&self, inner: &Self, k: usize) -> Self {
        // Horner from the top keeps every intermediate truncated.
        let mut acc = Poly1::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(inner).truncate(k).add(&Poly1::constant(c.clone()));
        }
        acc.truncate(k)
    }

    /// Map coefficients into another ring.
    pub fn map<U: Ring>(&self, f: impl Fn(&T) -> U) -> Poly1<U> {
        Poly1::new(self.coeffs.iter().map(f).collect())
    }
}

impl<T: Field> Poly1<T> {
    /// Euclidean division: `self = q·div + r` with deg r < deg div.
    ///
    /// `None` when `div` is zero.
    pub fn divrem(&self, div: &Self) -> Option<(Self, Self)> {
        let dlead = div.leading()?.clone();
        let dinv = dlead.inv()?;
        let ddeg = div.degree()?;
        let mut rem = self.clone();
        let mut quo = Poly1::zero();
        while let Some(rdeg) = rem.degree() {
            if rdeg < ddeg {
                break;
            }
            let factor = rem.leading().unwrap().mul(&dinv);
            let term = Poly1::monomial(factor, rdeg - ddeg);
            quo = quo.add(&term);
            rem = rem.sub(&term.mul(div));
        }
        Some((quo, rem))
    }

    /// Monic gcd (1 for coprime inputs; 0 only when both inputs are 0).
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Divide by the leading coefficient (zero stays zero).
    pub fn monic(&self) -> Self {
        match self.leading() {
            None => Poly1::zero(),
            Some(l) => self.scale(&l.inv().expect("leading coefficient nonzero")),
        }
    }

    /// Exact quotient when `div` divides `self`; `None` otherwise.
    pub fn exact_div(&self, div: &Self) -> Option<Self> {
        let (q, r) = self.divrem(div)?;
        if r.is_zero() {
            Some(q)
        } else {
            None
        }
    }

    /// Multiplicative inverse as a power series mod x^{k+1}.
    ///
    /// `None` when the constant term is zero.
    pub fn series_inv(&self, k: usize) -> Option<Self> {
        let c0inv = self.coeff(0).inv()?;
        let mut inv = Poly1::constant(c0inv.clone());
        // Newton doubling: v ← v(2 − uv).
        let mut prec = 1usize;
        while prec <= k {
            prec *= 2;
            let two = Poly1::constant(T::from_i64(2));
            let uv = self.truncate(prec.min(k)).mul(&inv).truncate(prec.min(k));
            inv = inv.mul(&two.sub(&uv)).truncate(prec.min(k));
        }
        Some(inv.truncate(k))
    }

    /// Formal compositional inverse of a series with `self(0) = 0` and
    /// invertible linear term: returns h with `self(h(x)) ≡ x mod x^{k+1}`.
    pub fn series_reversion(&self, k: usize) -> Option<Self> {
        if !self.coeff(0).is_zero() {
            return None;
        }
        let lin_inv = self.coeff(1).inv()?;
        let mut h = Poly1::monomial(lin_inv.clone(), 1);
        for n in 2..=k {
            // self(h) − x has its lowest error at degree n; cancel it.
            let err = self.compose_trunc(&h, n).sub(&Poly1::x());
            let e = err.coeff(n);
            if !e.is_zero() {
                h = h.sub(&Poly1::monomial(e.mul(&lin_inv), n));
            }
        }
        Some(h)
    }
}

impl<T: Ring + fmt::Debug> fmt::Debug for Poly1<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:?})·x^{}", c, k)?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, CRat, Rat};

    fn p(cs: &[i64]) -> Poly1<Rat> {
        Poly1::new(cs.iter().map(|&c| Rat::from_integer(c.into())).collect())
    }

    #[test]
    fn ring_ops() {
        let a = p(&[1, 2, 3]);
        let b = p(&[0, 1]);
        assert_eq!(a.mul(&b), p(&[0, 1, 2, 3]));
        assert_eq!(a.add(&b), p(&[1, 3, 3]));
        assert_eq!(a.derivative(), p(&[2, 6]));
        assert_eq!(a.eval(&rat(2, 1)), rat(17, 1));
        assert_eq!(a.sub(&a), Poly1::zero());
        assert_eq!(p(&[]).degree(), None);
    }

    #[test]
    fn division_and_gcd() {
        // (x−1)(x−2) and (x−1)(x+3) share exactly x−1.
        let a = p(&[2, -3, 1]);
        let b = p(&[-3, 2, 1]);
        let g = a.gcd(&b);
        assert_eq!(g, p(&[-1, 1]));
        let (q, r) = a.divrem(&g).unwrap();
        assert!(r.is_zero());
        assert_eq!(q, p(&[-2, 1]));
        assert_eq!(a.exact_div(&p(&[7])).unwrap(), a.scale(&rat(1, 7)));
    }

    #[test]
    fn series_inverse_and_reversion() {
        // 1/(1−x) = Σ xᵏ.
        let u = p(&[1, -1]);
        assert_eq!(u.series_inv(4).unwrap(), p(&[1, 1, 1, 1, 1]));
        // Reversion of g(x) = x + x²: h = x − x² + 2x³ − 5x⁴.
        let g = p(&[0, 1, 1]);
        let h = g.series_reversion(4).unwrap();
        assert_eq!(h, p(&[0, 1, -1, 2, -5]));
        assert_eq!(g.compose_trunc(&h, 4), p(&[0, 1]));
    }

    #[test]
    fn complex_coefficients() {
        // (x + i)(x − i) = x² + 1.
        let a = Poly1::new(vec![CRat::i(), CRat::one()]);
        let b = Poly1::new(vec![CRat::i().neg(), CRat::one()]);
        let prod = a.mul(&b);
        assert_eq!(prod, Poly1::new(vec![CRat::one(), CRat::zero(), CRat::one()]));
    }
}
