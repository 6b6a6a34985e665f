//! Exact real-root counting and isolation for rational polynomials.
//!
//! Sturm chains give exact root counts on intervals; Yun's algorithm splits a
//! polynomial into square-free factors with known multiplicities. Root
//! isolation combines the two with bisection down to a requested width.

use super::poly1::Poly1;
use super::scalar::OrderedField;
use super::{rat_int, Rat};

/// Sturm chain of a nonzero polynomial: p, p′, then negated remainders.
pub struct SturmChain {
    chain: Vec<Poly1<Rat>>,
}

impl SturmChain {
    pub fn new(p: &Poly1<Rat>) -> Self {
        let mut chain = Vec::new();
        if p.is_zero() {
            return SturmChain { chain };
        }
        chain.push(p.clone());
        let dp = p.derivative();
        if !dp.is_zero() {
            chain.push(dp);
        }
        while chain.len() >= 2 {
            let n = chain.len();
            let (_, r) = chain[n - 2].divrem(&chain[n - 1]).unwrap();
            if r.is_zero() {
                break;
            }
            chain.push(r.neg());
        }
        SturmChain { chain }
    }

    /// Sign changes in the chain evaluated at x (zeros skipped).
    fn sign_changes_at(&self, x: &Rat) -> usize {
        let signs: Vec<i8> = self
            .chain
            .iter()
            .map(|q| q.eval(x).signum())
            .filter(|&s| s != 0)
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Sign changes among leading-term behaviors at +∞ or −∞.
    fn sign_changes_at_infinity(&self, positive: bool) -> usize {
        let signs: Vec<i8> = self
            .chain
            .iter()
            .filter_map(|q| {
                let d = q.degree()?;
                let mut s = q.leading().unwrap().signum();
                if !positive && d % 2 == 1 {
                    s = -s;
                }
                (s != 0).then_some(s)
            })
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Number of distinct real roots in the half-open interval (lo, hi].
    pub fn count_in(&self, lo: &Rat, hi: &Rat) -> usize {
        assert!(lo < hi, "interval must be nonempty");
        self.sign_changes_at(lo) - self.sign_changes_at(hi)
    }

    /// Number of distinct real roots on the whole line.
    pub fn count_real(&self) -> usize {
        self.sign_changes_at_infinity(false) - self.sign_changes_at_infinity(true)
    }
}

/// Cauchy bound: every real root lies in [−b, b].
pub fn root_bound(p: &Poly1<Rat>) -> Rat {
    let lead = match p.leading() {
        Some(l) => l.clone(),
        None => return rat_int(1),
    };
    let mut maxq = rat_int(0);
    if let Some(d) = p.degree() {
        for k in 0..d {
            let q = (p.coeff(k) / lead.clone()).abs();
            if q > maxq {
                maxq = q;
            }
        }
    }
    maxq + rat_int(1)
}

/// One isolated real root of a square-free polynomial.
#[derive(Clone, Debug)]
pub struct IsolatedRoot {
    /// Exact bracketing interval (lo, hi] containing exactly one root.
    pub lo: Rat,
    pub hi: Rat,
    /// Midpoint of the final bracket, as a convenient float witness.
    pub approx: f64,
}

/// Isolate all distinct real roots of a square-free polynomial, narrowing
/// each bracket below `width`. Roots are returned in increasing order.
pub fn isolate_real_roots(p: &Poly1<Rat>, width: &Rat) -> Vec<IsolatedRoot> {
    let chain = SturmChain::new(p);
    if p.degree().unwrap_or(0) == 0 {
        return Vec::new();
    }
    let bound = root_bound(p);
    let mut stack = vec![(-bound.clone(), bound.clone())];
    let mut found = Vec::new();
    while let Some((lo, hi)) = stack.pop() {
        let n = chain.count_in(&lo, &hi);
        if n == 0 {
            continue;
        }
        let span = hi.clone() - lo.clone();
        if n == 1 && span < *width {
            found.push((lo, hi));
            continue;
        }
        let mid = (lo.clone() + hi.clone()) / rat_int(2);
        stack.push((lo, mid.clone()));
        stack.push((mid, hi));
    }
    found.sort_by(|a, b| a.0.cmp(&b.0));
    found
        .into_iter()
        .map(|(lo, hi)| {
            let mid = (lo.clone() + hi.clone()) / rat_int(2);
            IsolatedRoot {
                lo,
                hi,
                approx: mid.to_f64(),
            }
        })
        .collect()
}

/// Yun square-free decomposition.
///
/// Returns pairs `(gᵢ, i)` with `p = lc · Π gᵢ^i`, each gᵢ monic square-free,
/// and distinct gᵢ pairwise coprime. Factors with gᵢ = 1 are omitted.
pub fn squarefree_decomposition(p: &Poly1<Rat>) -> Vec<(Poly1<Rat>, usize)> {
    let mut out = Vec::new();
    if p.degree().unwrap_or(0) == 0 {
        return out;
    }
    let p = p.monic();
    let dp = p.derivative();
    let a = p.gcd(&dp);
    let mut b = p.exact_div(&a).expect("gcd divides");
    let mut c = dp.exact_div(&a).expect("gcd divides derivative");
    let mut i = 1usize;
    loop {
        let d = c.sub(&b.derivative());
        let g = b.gcd(&d);
        if g.degree().unwrap_or(0) > 0 {
            out.push((g.clone(), i));
        }
        b = b.exact_div(&g).expect("factor divides");
        c = d.exact_div(&g).expect("factor divides");
        if b.degree().unwrap_or(0) == 0 {
            break;
        }
        i += 1;
    }
    out
}

/// Distinct real roots of an arbitrary nonzero polynomial with their
/// multiplicities, isolated below `width`, ascending by root.
pub fn real_roots_with_multiplicity(
    p: &Poly1<Rat>,
    width: &Rat,
) -> Vec<(IsolatedRoot, usize)> {
    let mut out: Vec<(IsolatedRoot, usize)> = Vec::new();
    for (factor, mult) in squarefree_decomposition(p) {
        for root in isolate_real_roots(&factor, width) {
            out.push((root, mult));
        }
    }
    out.sort_by(|a, b| a.0.lo.cmp(&b.0.lo));
    out
}
