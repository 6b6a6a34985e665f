//! Sparse bivariate polynomials over an exact ring.
//!
//! Monomials xⁱyʲ are keyed by (i, j) in a BTreeMap, so iteration order — and
//! everything derived from it — is deterministic.

use super::crat::CRat;
use super::poly1::Poly1;
use super::scalar::{Field, Ring};
use super::Rat;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, PartialEq)]
pub struct Poly2<T> {
    terms: BTreeMap<(u32, u32), T>,
}

impl<T: Ring> Poly2<T> {
    pub fn zero() -> Self {
        Poly2 {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: T) -> Self {
        Poly2::monomial(c, 0, 0)
    }

    pub fn one() -> Self {
        Poly2::constant(T::one())
    }

    pub fn monomial(c: T, i: u32, j: u32) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((i, j), c);
        }
        Poly2 { terms }
    }

    pub fn x() -> Self {
        Poly2::monomial(T::one(), 1, 0)
    }

    pub fn y() -> Self {
        Poly2::monomial(T::one(), 0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, i: u32, j: u32) -> T {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(T::zero)
    }

    pub fn set(&mut self, i: u32, j: u32, c: T) {
        if c.is_zero() {
            self.terms.remove(&(i, j));
        } else {
            self.terms.insert((i, j), c);
        }
    }

    pub fn add_term(&mut self, i: u32, j: u32, c: &T) {
        let cur = self.coeff(i, j);
        self.set(i, j, cur.add(c));
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(u32, u32), &T)> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(i, j)| i + j).max()
    }

    /// Smallest total degree with a nonzero term.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(|&(i, j)| i + j).min()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&(i, j), c) in other.terms.iter() {
            out.add_term(i, j, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Poly2 {
            terms: self
                .terms
                .iter()
                .map(|(&k, c)| (k, c.neg()))
                .collect(),
        }
    }

    pub fn scale(&self, c: &T) -> Self {
        let mut out = Poly2::zero();
        for (&(i, j), a) in self.terms.iter() {
            out.add_term(i, j, &a.mul(c));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.mul_trunc(other, u32::MAX)
    }

    /// Product with every term of total degree > `max_total` dropped.
    pub fn mul_trunc(&self, other: &Self, max_total: u32) -> Self {
        let mut out = Poly2::zero();
        for (&(i1, j1), c1) in self.terms.iter() {
            if i1 + j1 > max_total {
                continue;
            }
            for (&(i2, j2), c2) in other.terms.iter() {
                let (i, j) = (i1 + i2, j1 + j2);
                if i + j > max_total {
                    continue;
                }
                out.add_term(i, j, &c1.mul(c2));
            }
        }
        out
    }

    /// Drop all terms of total degree > `max_total`.
    pub fn truncate_total(&self, max_total: u32) -> Self {
        Poly2 {
            terms: self
                .terms
                .iter()
                .filter(|(&(i, j), _)| i + j <= max_total)
                .map(|(&k, c)| (k, c.clone()))
                .collect(),
        }
    }

    /// The degree-d homogeneous part.
    pub fn homogeneous_part(&self, d: u32) -> Self {
        Poly2 {
            terms: self
                .terms
                .iter()
                .filter(|(&(i, j), _)| i + j == d)
                .map(|(&k, c)| (k, c.clone()))
                .collect(),
        }
    }

    /// The nonzero homogeneous part of lowest degree (zero for zero).
    pub fn lowest_form(&self) -> Self {
        match self.order() {
            Some(d) => self.homogeneous_part(d),
            None => Poly2::zero(),
        }
    }

    pub fn dx(&self) -> Self {
        let mut out = Poly2::zero();
        for (&(i, j), c) in self.terms.iter() {
            if i > 0 {
                out.add_term(i - 1, j, &c.mul(&T::from_i64(i as i64)));
            }
        }
        out
    }

    pub fn dy(&self) -> Self {
        let mut out = Poly2::zero();
        for (&(i, j), c) in self.terms.iter() {
            if j > 0 {
                out.add_term(i, j - 1, &c.mul(&T::from_i64(j as i64)));
            }
        }
        out
    }

    pub fn eval(&self, x: &T, y: &T) -> T {
        let imax = self.terms.keys().map(|&(i, _)| i).max().unwrap_or(0);
        let jmax = self.terms.keys().map(|&(_, j)| j).max().unwrap_or(0);
        let xp = powers(x, imax);
        let yp = powers(y, jmax);
        let mut acc = T::zero();
        for (&(i, j), c) in self.terms.iter() {
            acc = acc.add(&c.mul(&xp[i as usize]).mul(&yp[j as usize]));
        }
        acc
    }

    /// Substitute polynomials for both variables, truncating past
    /// `max_total`.
    pub fn substitute(&self, for_x: &Self, for_y: &Self, max_total: u32) -> Self {
        let imax = self.terms.keys().map(|&(i, _)| i).max().unwrap_or(0);
        let jmax = self.terms.keys().map(|&(_, j)| j).max().unwrap_or(0);
        let xp = poly_powers(for_x, imax, max_total);
        let yp = poly_powers(for_y, jmax, max_total);
        let mut out = Poly2::zero();
        for (&(i, j), c) in self.terms.iter() {
            let term = xp[i as usize]
                .mul_trunc(&yp[j as usize], max_total)
                .scale(c);
            out = out.add(&term);
        }
        out
    }

    /// Substitute the linear change x ↦ a·x + b·y, y ↦ c·x + d·y.
    pub fn compose_linear(&self, a: &T, b: &T, c: &T, d: &T) -> Self {
        let fx = Poly2::monomial(a.clone(), 1, 0).add(&Poly2::monomial(b.clone(), 0, 1));
        let fy = Poly2::monomial(c.clone(), 1, 0).add(&Poly2::monomial(d.clone(), 0, 1));
        self.substitute(&fx, &fy, u32::MAX)
    }

    pub fn map<U: Ring>(&self, f: impl Fn(&T) -> U) -> Poly2<U> {
        let mut out = Poly2::zero();
        for (&(i, j), c) in self.terms.iter() {
            let fc = f(c);
            if !fc.is_zero() {
                out.set(i, j, fc);
            }
        }
        out
    }

    /// Restriction to the x-axis: p(x, 0) as a univariate polynomial.
    pub fn restrict_y0(&self) -> Poly1<T> {
        let imax = self.terms.keys().map(|&(i, _)| i).max().unwrap_or(0);
        let mut coeffs = vec![T::zero(); imax as usize + 1];
        for (&(i, j), c) in self.terms.iter() {
            if j == 0 {
                coeffs[i as usize] = c.clone();
            }
        }
        Poly1::new(coeffs)
    }

    /// Substitute a univariate series for y: p(x, g(x)), truncated.
    pub fn substitute_y(&self, g: &Poly1<T>, max_deg: usize) -> Poly1<T> {
        let mut acc = Poly1::zero();
        let jmax = self.terms.keys().map(|&(_, j)| j).max().unwrap_or(0);
        let mut gp: Vec<Poly1<T>> = Vec::with_capacity(jmax as usize + 1);
        gp.push(Poly1::one());
        for _ in 0..jmax {
            let next = gp.last().unwrap().mul(g).truncate(max_deg);
            gp.push(next);
        }
        for (&(i, j), c) in self.terms.iter() {
            let term = Poly1::monomial(c.clone(), i as usize)
                .mul(&gp[j as usize])
                .truncate(max_deg);
            acc = acc.add(&term);
        }
        acc
    }
}

fn powers<T: Ring>(x: &T, n: u32) -> Vec<T> {
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(T::one());
    for _ in 0..n {
        out.push(out.last().unwrap().mul(x));
    }
    out
}

fn poly_powers<T: Ring>(p: &Poly2<T>, n: u32, max_total: u32) -> Vec<Poly2<T>> {
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(Poly2::one());
    for _ in 0..n {
        let next = out.last().unwrap().mul_trunc(p, max_total);
        out.push(next);
    }
    out
}

/// Expand a complex univariate polynomial g(z) with z = x + iy into real and
/// imaginary bivariate parts over the rationals.
pub fn complex_poly_to_re_im(g: &Poly1<CRat>) -> (Poly2<Rat>, Poly2<Rat>) {
    // z^k expands by the binomial theorem; build powers incrementally.
    let z = Poly2::monomial(CRat::one(), 1, 0).add(&Poly2::monomial(CRat::i(), 0, 1));
    let deg = g.degree().unwrap_or(0) as u32;
    let zp = poly_powers(&z, deg, u32::MAX);
    let mut total: Poly2<CRat> = Poly2::zero();
    for (k, c) in g.coeffs().iter().enumerate() {
        total = total.add(&zp[k].scale(c));
    }
    let re = total.map(|c| c.re.clone());
    let im = total.map(|c| c.im.clone());
    (re, im)
}

impl<T: Ring + fmt::Debug> fmt::Debug for Poly2<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(i, j), c) in self.terms.iter() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:?})·x^{}·y^{}", c, i, j)?;
        }
        Ok(())
    }
}

impl<T: Field> Poly2<T> {
    /// Formal branch solve: the series y = γ(x) with p(x, γ(x)) ≡ 0,
    /// γ(0) = 0, requiring p(0,0) = 0 and p_y(0,0) ≠ 0. Truncated at
    /// degree `max_deg`.
    pub fn implicit_branch(&self, max_deg: usize) -> Option<Poly1<T>> {
        if !self.coeff(0, 0).is_zero() {
            return None;
        }
        let py0 = self.coeff(0, 1);
        let py0_inv = py0.inv()?;
        let mut gamma = Poly1::zero();
        for n in 1..=max_deg {
            // Residual p(x, γ) has order ≥ n; kill its degree-n coefficient
            // by adjusting γ at degree n: d/dc [coeff_n] = p_y(0,0).
            let r = self.substitute_y(&gamma, n);
            let e = r.coeff(n);
            if !e.is_zero() {
                gamma = gamma.sub(&Poly1::monomial(e.mul(&py0_inv), n));
            }
        }
        Some(gamma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, Rat};

    fn xy() -> (Poly2<Rat>, Poly2<Rat>) {
        (Poly2::x(), Poly2::y())
    }

    #[test]
    fn arithmetic_and_parts() {
        let (x, y) = xy();
        // p = (x + y)² = x² + 2xy + y².
        let p = x.add(&y).mul(&x.add(&y));
        assert_eq!(p.coeff(2, 0), rat(1, 1));
        assert_eq!(p.coeff(1, 1), rat(2, 1));
        assert_eq!(p.coeff(0, 2), rat(1, 1));
        assert_eq!(p.total_degree(), Some(2));
        assert_eq!(p.homogeneous_part(2), p);
        assert_eq!(p.dx(), x.add(&y).scale(&rat(2, 1)));
        assert_eq!(p.eval(&rat(1, 1), &rat(2, 1)), rat(9, 1));
    }

    #[test]
    fn rotation_by_right_angle() {
        let (x, y) = xy();
        // x² − y² under x ↦ y, y ↦ −x becomes y² − x².
        let p = x.mul(&x).sub(&y.mul(&y));
        let q = p.compose_linear(&rat(0, 1), &rat(1, 1), &rat(-1, 1), &rat(0, 1));
        assert_eq!(q, p.neg());
    }

    #[test]
    fn complex_expansion() {
        use crate::exact::CRat;
        // g(z) = z²: re = x² − y², im = 2xy.
        let g = Poly1::monomial(CRat::one(), 2);
        let (re, im) = complex_poly_to_re_im(&g);
        let (x, y) = xy();
        assert_eq!(re, x.mul(&x).sub(&y.mul(&y)));
        assert_eq!(im, x.mul(&y).scale(&rat(2, 1)));
        // i·z³ at z = 1+i: (1+i)³ = −2+2i, times i = −2−2i.
        let g3 = Poly1::monomial(CRat::i(), 3);
        let (re3, im3) = complex_poly_to_re_im(&g3);
        assert_eq!(re3.eval(&rat(1, 1), &rat(1, 1)), rat(-2, 1));
        assert_eq!(im3.eval(&rat(1, 1), &rat(1, 1)), rat(-2, 1));
    }

    #[test]
    fn implicit_branch_solve() {
        let (x, y) = xy();
        // p = y − x² − x·y: branch γ = x²/(1−x) = x² + x³ + x⁴ + …
        let p = y.sub(&x.mul(&x)).sub(&x.mul(&y));
        let gamma = p.implicit_branch(5).unwrap();
        let expect = Poly1::new(vec![
            rat(0, 1),
            rat(0, 1),
            rat(1, 1),
            rat(1, 1),
            rat(1, 1),
            rat(1, 1),
        ]);
        assert_eq!(gamma, expect);
        // Composition vanishes to the truncation order.
        let r = p.substitute_y(&gamma, 5);
        assert!(r.is_zero());
    }
}
