//! A two-story real field tower for exact rotated-coordinate arithmetic.
//!
//! `QuadExt` models ℚ(√d): elements p + q√d with rational p, q and a shared
//! positive rational d. `TowerElem` models a further extension by a positive
//! square root c = √(csq) with csq ∈ ℚ(√d): elements u + v·c.
//!
//! Both types order their elements exactly, with signs decided by comparing
//! squares (no floating point), so predicates evaluated in rotated
//! coordinates remain exact.
//!
//! Elements with a vanishing irrational part store a zero radicand as an
//! "any extension" marker, so ring constants (`zero`, `one`, `from_i64`)
//! need no extension context and mixed arithmetic unifies radicands.

use super::scalar::{Field, OrderedField, Ring};
use super::{rat_int, Rat};
use std::fmt;

/// Exact square root of a nonnegative rational, when it is a perfect square.
pub fn rat_sqrt(r: &Rat) -> Option<Rat> {
    if r.is_negative() {
        return None;
    }
    let ns = r.numer().sqrt();
    let ds = r.denom().sqrt();
    if &(&ns * &ns) == r.numer() && &(&ds * &ds) == r.denom() {
        Some(Rat::new(ns, ds))
    } else {
        None
    }
}

/// p + q·√d, with d = 0 standing for "no irrational part committed".
#[derive(Clone, PartialEq)]
pub struct QuadExt {
    pub p: Rat,
    pub q: Rat,
    pub d: Rat,
}

impl QuadExt {
    pub fn new(p: Rat, q: Rat, d: Rat) -> Self {
        assert!(
            !d.is_negative(),
            "radicand must be nonnegative for a real extension"
        );
        QuadExt { p, q, d }.normalized()
    }

    pub fn from_rat(p: Rat) -> Self {
        QuadExt {
            p,
            q: rat_int(0),
            d: rat_int(0),
        }
    }

    /// √d itself, as an element of ℚ(√d).
    pub fn sqrt_d(d: Rat) -> Self {
        QuadExt::new(rat_int(0), rat_int(1), d)
    }

    fn normalized(mut self) -> Self {
        if self.q.is_zero() || self.d.is_zero() {
            self.q = rat_int(0);
            self.d = rat_int(0);
        } else if let Some(s) = rat_sqrt(&self.d) {
            // A perfect-square radicand would break field semantics (zero
            // divisors); fold √d = s into the rational part instead.
            self.p += self.q.clone() * s;
            self.q = rat_int(0);
            self.d = rat_int(0);
        }
        self
    }

    /// Positive square root of `self` within ℚ(√d), when one exists there.
    pub fn sqrt_in_field(&self) -> Option<QuadExt> {
        if self.is_zero() {
            return Some(QuadExt::zero());
        }
        if self.signum() < 0 {
            return None;
        }
        if self.q.is_zero() {
            // Rational target: either a rational square, or b²·d with the
            // ambient d carried by the caller (unknowable here) — only the
            // rational case resolves without extension context.
            return rat_sqrt(&self.p).map(QuadExt::from_rat);
        }
        // (a + b√d)² = (a² + b²d) + 2ab√d: match q = 2ab, p = a² + b²d, so
        // a² solves t² − p·t + q²d/4 = 0, i.e. t = (p ± √(p² − q²d))/2.
        let n = rat_sqrt(&self.norm())?;
        for t in [
            (self.p.clone() + n.clone()) / rat_int(2),
            (self.p.clone() - n.clone()) / rat_int(2),
        ] {
            if let Some(a) = rat_sqrt(&t) {
                if a.is_zero() {
                    continue;
                }
                let b = self.q.clone() / (a.clone() + a.clone());
                let root = QuadExt::new(a, b, self.d.clone());
                if root.signum() > 0 {
                    return Some(root);
                }
                return Some(root.neg());
            }
        }
        None
    }

    /// The common radicand of two elements; panics on a genuine mismatch.
    fn unify_d(&self, other: &Self) -> Rat {
        if self.d.is_zero() {
            other.d.clone()
        } else if other.d.is_zero() || self.d == other.d {
            self.d.clone()
        } else {
            panic!("mixed radicands {} and {}", self.d, other.d);
        }
    }

    /// Galois conjugate p − q√d.
    pub fn conj(&self) -> Self {
        QuadExt {
            p: self.p.clone(),
            q: -self.q.clone(),
            d: self.d.clone(),
        }
    }

    /// Field norm (p + q√d)(p − q√d) = p² − q²d ∈ ℚ.
    pub fn norm(&self) -> Rat {
        self.p.clone() * self.p.clone() - self.q.clone() * self.q.clone() * self.d.clone()
    }

    pub fn is_rational(&self) -> bool {
        self.q.is_zero()
    }
}

impl Ring for QuadExt {
    fn zero() -> Self {
        QuadExt::from_rat(rat_int(0))
    }

    fn one() -> Self {
        QuadExt::from_rat(rat_int(1))
    }

    fn add(&self, other: &Self) -> Self {
        let d = self.unify_d(other);
        QuadExt {
            p: self.p.clone() + other.p.clone(),
            q: self.q.clone() + other.q.clone(),
            d,
        }
        .normalized()
    }

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    fn mul(&self, other: &Self) -> Self {
        let d = self.unify_d(other);
        QuadExt {
            p: self.p.clone() * other.p.clone()
                + self.q.clone() * other.q.clone() * d.clone(),
            q: self.p.clone() * other.q.clone() + self.q.clone() * other.p.clone(),
            d,
        }
        .normalized()
    }

    fn neg(&self) -> Self {
        QuadExt {
            p: -self.p.clone(),
            q: -self.q.clone(),
            d: self.d.clone(),
        }
    }

    fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    fn from_i64(n: i64) -> Self {
        QuadExt::from_rat(Rat::from_integer(n.into()))
    }
}

impl Field for QuadExt {
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        // 1/(p + q√d) = (p − q√d)/(p² − q²d). A zero norm with q ≠ 0 would
        // need d = (p/q)², a perfect square, which construction folds away.
        let n = self.norm();
        assert!(!n.is_zero(), "nonzero normalized element has nonzero norm");
        Some(QuadExt {
            p: self.p.clone() / n.clone(),
            q: -self.q.clone() / n,
            d: self.d.clone(),
        }
        .normalized())
    }

    fn from_rat(r: &Rat) -> Self {
        QuadExt::from_rat(r.clone())
    }
}

impl OrderedField for QuadExt {
    fn signum(&self) -> i8 {
        let sp = self.p.signum();
        if self.q.is_zero() {
            return sp;
        }
        let sq = self.q.signum();
        if sp == 0 {
            return sq; // sign of q·√d with √d > 0
        }
        if sp == sq {
            return sp;
        }
        // Opposite signs: compare p² against q²d.
        let p2 = self.p.clone() * self.p.clone();
        let q2d = self.q.clone() * self.q.clone() * self.d.clone();
        match p2.cmp(&q2d) {
            std::cmp::Ordering::Greater => sp,
            std::cmp::Ordering::Less => sq,
            std::cmp::Ordering::Equal => 0,
        }
    }

    fn to_f64(&self) -> f64 {
        self.p.to_f64() + self.q.to_f64() * self.d.to_f64().sqrt()
    }
}


impl fmt::Debug for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q.is_zero() {
            write!(f, "{}", self.p)
        } else {
            write!(f, "{} + {}·√{}", self.p, self.q, self.d)
        }
    }
}

/// u + v·c where c = √(csq) > 0 and u, v, csq ∈ ℚ(√d).
///
/// csq = 0 marks "no c-part committed", mirroring the QuadExt convention.
#[derive(Clone, PartialEq)]
pub struct TowerElem {
    pub u: QuadExt,
    pub v: QuadExt,
    pub csq: QuadExt,
}

impl TowerElem {
    pub fn new(u: QuadExt, v: QuadExt, csq: QuadExt) -> Self {
        assert!(
            csq.signum() >= 0,
            "c² must be nonnegative for a real extension"
        );
        TowerElem { u, v, csq }.normalized()
    }

    pub fn from_base(u: QuadExt) -> Self {
        TowerElem {
            u,
            v: QuadExt::zero(),
            csq: QuadExt::zero(),
        }
    }

    /// c itself: 0 + 1·c.
    pub fn c(csq: QuadExt) -> Self {
        TowerElem::new(QuadExt::zero(), QuadExt::one(), csq)
    }

    fn normalized(mut self) -> Self {
        if self.v.is_zero() || self.csq.is_zero() {
            self.v = QuadExt::zero();
            self.csq = QuadExt::zero();
            return self;
        }
        // Fold c into the base field when c² is a perfect square there,
        // otherwise u ± v·c would admit zero divisors.
        let fold = match self.csq.sqrt_in_field() {
            Some(c) => Some(c),
            None => {
                // A rational c² can still be b²·d for the ambient radicand.
                let ambient = [&self.u.d, &self.v.d]
                    .into_iter()
                    .find(|d| !d.is_zero())
                    .cloned();
                match (self.csq.is_rational(), ambient) {
                    (true, Some(d)) => rat_sqrt(&(self.csq.p.clone() / d.clone()))
                        .map(|b| QuadExt::new(rat_int(0), b, d)),
                    _ => None,
                }
            }
        };
        if let Some(c) = fold {
            self.u = self.u.add(&self.v.mul(&c));
            self.v = QuadExt::zero();
            self.csq = QuadExt::zero();
        }
        self
    }

    fn unify_csq(&self, other: &Self) -> QuadExt {
        if self.csq.is_zero() {
            other.csq.clone()
        } else if other.csq.is_zero() || self.csq == other.csq {
            self.csq.clone()
        } else {
            panic!("mixed tower extensions");
        }
    }

    /// Conjugate u − v·c.
    pub fn conj(&self) -> Self {
        TowerElem {
            u: self.u.clone(),
            v: self.v.neg(),
            csq: self.csq.clone(),
        }
    }

    /// (u + vc)(u − vc) = u² − v²·c² ∈ ℚ(√d).
    pub fn norm(&self) -> QuadExt {
        self.u
            .mul(&self.u)
            .sub(&self.v.mul(&self.v).mul(&self.csq))
    }
}

impl Ring for TowerElem {
    fn zero() -> Self {
        TowerElem::from_base(QuadExt::zero())
    }

    fn one() -> Self {
        TowerElem::from_base(QuadExt::one())
    }

    fn add(&self, other: &Self) -> Self {
        let csq = self.unify_csq(other);
        TowerElem {
            u: self.u.add(&other.u),
            v: self.v.add(&other.v),
            csq,
        }
        .normalized()
    }

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    fn mul(&self, other: &Self) -> Self {
        let csq = self.unify_csq(other);
        TowerElem {
            u: self
                .u
                .mul(&other.u)
                .add(&self.v.mul(&other.v).mul(&csq)),
            v: self.u.mul(&other.v).add(&self.v.mul(&other.u)),
            csq,
        }
        .normalized()
    }

    fn neg(&self) -> Self {
        TowerElem {
            u: self.u.neg(),
            v: self.v.neg(),
            csq: self.csq.clone(),
        }
    }

    fn is_zero(&self) -> bool {
        self.u.is_zero() && self.v.is_zero()
    }

    fn from_i64(n: i64) -> Self {
        TowerElem::from_base(QuadExt::from_i64(n))
    }
}

impl Field for TowerElem {
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        // A zero norm with v ≠ 0 would need c² = (u/v)², a perfect square in
        // the base field, which construction folds away.
        let n = self.norm();
        assert!(!n.is_zero(), "nonzero normalized element has nonzero norm");
        let ninv = TowerElem::from_base(n.inv()?);
        Some(self.conj().mul(&ninv))
    }

    fn from_rat(r: &Rat) -> Self {
        TowerElem::from_base(QuadExt::from_rat(r.clone()))
    }
}

impl OrderedField for TowerElem {
    fn signum(&self) -> i8 {
        let su = self.u.signum();
        if self.v.is_zero() {
            return su;
        }
        let sv = self.v.signum();
        if su == 0 {
            return sv; // c > 0
        }
        if su == sv {
            return su;
        }
        // Opposite signs: compare u² against v²·c² inside ℚ(√d).
        let diff = self
            .u
            .mul(&self.u)
            .sub(&self.v.mul(&self.v).mul(&self.csq));
        match diff.signum() {
            1 => su,
            -1 => sv,
            _ => 0,
        }
    }

    fn to_f64(&self) -> f64 {
        self.u.to_f64() + self.v.to_f64() * self.csq.to_f64().sqrt()
    }
}

impl fmt::Debug for TowerElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.v.is_zero() {
            write!(f, "{:?}", self.u)
        } else {
            write!(f, "({:?}) + ({:?})·c [c²={:?}]", self.u, self.v, self.csq)
        }
    }
}
