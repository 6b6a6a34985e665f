//! Sparse trivariate polynomials, used for two-variable families with one
//! deformation parameter: p(x, y, s).

use super::scalar::{Field, Ring};
use std::collections::BTreeMap;
use std::fmt;

/// Variable index for derivative/substitution operations.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Var3 {
    X,
    Y,
    S,
}

#[derive(Clone, PartialEq)]
pub struct Poly3<T> {
    terms: BTreeMap<(u32, u32, u32), T>,
}

impl<T: Ring> Poly3<T> {
    pub fn zero() -> Self {
        Poly3 {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: T) -> Self {
        Poly3::monomial(c, 0, 0, 0)
    }

    pub fn one() -> Self {
        Poly3::constant(T::one())
    }

    pub fn monomial(c: T, i: u32, j: u32, m: u32) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((i, j, m), c);
        }
        Poly3 { terms }
    }

    pub fn var(v: Var3) -> Self {
        match v {
            Var3::X => Poly3::monomial(T::one(), 1, 0, 0),
            Var3::Y => Poly3::monomial(T::one(), 0, 1, 0),
            Var3::S => Poly3::monomial(T::one(), 0, 0, 1),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, i: u32, j: u32, m: u32) -> T {
        self.terms.get(&(i, j, m)).cloned().unwrap_or_else(T::zero)
    }

    pub fn add_term(&mut self, key: (u32, u32, u32), c: &T) {
        let cur = self.terms.get(&key).cloned().unwrap_or_else(T::zero);
        let next = cur.add(c);
        if next.is_zero() {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, next);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(u32, u32, u32), &T)> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(i, j, m)| i + j + m).max()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&k, c) in other.terms.iter() {
            out.add_term(k, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Poly3 {
            terms: self.terms.iter().map(|(&k, c)| (k, c.neg())).collect(),
        }
    }

    pub fn scale(&self, c: &T) -> Self {
        let mut out = Poly3::zero();
        for (&k, a) in self.terms.iter() {
            out.add_term(k, &a.mul(c));
        }
        out
    }

    pub fn mul_trunc(&self, other: &Self, max_total: u32) -> Self {
        let mut out = Poly3::zero();
        for (&(i1, j1, m1), c1) in self.terms.iter() {
            if i1 + j1 + m1 > max_total {
                continue;
            }
            for (&(i2, j2, m2), c2) in other.terms.iter() {
                let key = (i1 + i2, j1 + j2, m1 + m2);
                if key.0 + key.1 + key.2 > max_total {
                    continue;
                }
                out.add_term(key, &c1.mul(c2));
            }
        }
        out
    }

    pub fn truncate_total(&self, max_total: u32) -> Self {
        Poly3 {
            terms: self
                .terms
                .iter()
                .filter(|(&(i, j, m), _)| i + j + m <= max_total)
                .map(|(&k, c)| (k, c.clone()))
                .collect(),
        }
    }

    pub fn derivative(&self, v: Var3) -> Self {
        let mut out = Poly3::zero();
        for (&(i, j, m), c) in self.terms.iter() {
            let (key, n) = match v {
                Var3::X if i > 0 => ((i - 1, j, m), i),
                Var3::Y if j > 0 => ((i, j - 1, m), j),
                Var3::S if m > 0 => ((i, j, m - 1), m),
                _ => continue,
            };
            out.add_term(key, &c.mul(&T::from_i64(n as i64)));
        }
        out
    }

    /// Substitute `value` for variable `v`, truncating past `max_total`.
    pub fn substitute(&self, v: Var3, value: &Self, max_total: u32) -> Self {
        let vmax = self
            .terms
            .keys()
            .map(|&(i, j, m)| match v {
                Var3::X => i,
                Var3::Y => j,
                Var3::S => m,
            })
            .max()
            .unwrap_or(0);
        let mut powers: Vec<Poly3<T>> = Vec::with_capacity(vmax as usize + 1);
        powers.push(Poly3::one());
        for _ in 0..vmax {
            let next = powers.last().unwrap().mul_trunc(value, max_total);
            powers.push(next);
        }
        let mut out = Poly3::zero();
        for (&(i, j, m), c) in self.terms.iter() {
            let (rest, vexp) = match v {
                Var3::X => (Poly3::monomial(c.clone(), 0, j, m), i),
                Var3::Y => (Poly3::monomial(c.clone(), i, 0, m), j),
                Var3::S => (Poly3::monomial(c.clone(), i, j, 0), m),
            };
            out = out.add(&rest.mul_trunc(&powers[vexp as usize], max_total));
        }
        out
    }

    pub fn map<U: Ring>(&self, f: impl Fn(&T) -> U) -> Poly3<U> {
        let mut out = Poly3::zero();
        for (&k, c) in self.terms.iter() {
            let fc = f(c);
            if !fc.is_zero() {
                out.terms.insert(k, fc);
            }
        }
        out
    }
}

impl<T: Field> Poly3<T> {
    /// Reciprocal as a multivariate power series mod total degree
    /// `max_total` + 1; `None` when the constant term is zero.
    pub fn series_inv(&self, max_total: u32) -> Option<Self> {
        let c0 = self.coeff(0, 0, 0);
        let c0inv = c0.inv()?;
        let mut inv = Poly3::constant(c0inv);
        // Newton doubling: v ← v(2 − uv), exact once 2^k > max_total.
        let mut prec = 1u32;
        loop {
            let cap = prec.min(max_total);
            let uv = self.truncate_total(cap).mul_trunc(&inv, cap);
            let two = Poly3::constant(T::from_i64(2));
            inv = inv.mul_trunc(&two.sub(&uv), cap);
            if prec >= max_total {
                break;
            }
            prec = prec.saturating_mul(2);
        }
        Some(inv.truncate_total(max_total))
    }
}

impl<T: Ring + fmt::Debug> fmt::Debug for Poly3<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(i, j, m), c) in self.terms.iter() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:?})·x^{}·y^{}·s^{}", c, i, j, m)?;
        }
        Ok(())
    }
}
