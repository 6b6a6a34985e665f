//! Graded holomorphic potentials: the exact data feeding both the numeric
//! pipeline and the exact classifiers.
//!
//! A potential is a matrix 1-form A(z)·dz whose λ-grading is twisted:
//! grade n contributes aₙ(z)·λ²ⁿ on the diagonal (as (aₙ, −aₙ)) and
//! bₙ(z)·λ²ⁿ⁻¹ / cₙ(z)·λ²ⁿ⁻¹ on the upper/lower off-diagonal. Component
//! functions are polynomials with exact complex-rational coefficients, so
//! every classifier decision made from them is exact; only the ODE/loop
//! pipeline works in floating point (through [`CompiledPotential`]).

use crate::exact::{CRat, Poly1, Rat, Ring};
use crate::loops::LaurentLoop;
use crate::mat2::{C64, CMat2};
use serde_json::Value;
use std::collections::BTreeMap;
use thiserror::Error;

/// Polynomial in z with exact complex-rational coefficients.
pub type HoloPoly = Poly1<CRat>;

/// Boundary data along the real axis: curve speed b(x) and the geodesic
/// curvature kappa_g(x) of the unit normal's boundary curve, both extended
/// holomorphically as polynomials.
#[derive(Clone, Debug, PartialEq)]
pub struct CauchyData {
    pub b: HoloPoly,
    pub kappa_g: HoloPoly,
}

impl CauchyData {
    /// Both component functions must be real on the real axis, i.e. have
    /// real rational coefficients.
    pub fn new(b: HoloPoly, kappa_g: HoloPoly) -> Result<Self, PotentialError> {
        for p in [&b, &kappa_g] {
            if p.coeffs().iter().any(|c| !c.is_real()) {
                return Err(PotentialError::Schema(
                    "boundary data coefficients must be real rationals".into(),
                ));
            }
        }
        Ok(CauchyData { b, kappa_g })
    }
}

/// Graded polynomial potential with an exact base point.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    /// Grade n → aₙ(z), the λ²ⁿ diagonal pair (aₙ, −aₙ).
    pub a: BTreeMap<i32, HoloPoly>,
    /// Grade n → bₙ(z), the λ²ⁿ⁻¹ upper entry.
    pub b: BTreeMap<i32, HoloPoly>,
    /// Grade n → cₙ(z), the λ²ⁿ⁻¹ lower entry.
    pub c: BTreeMap<i32, HoloPoly>,
    /// Integration base point z₀ (exact, so grid alignment is exact).
    pub base_point: CRat,
}

#[derive(Error, Debug, Clone)]
pub enum PotentialError {
    #[error("malformed potential specification: {0}")]
    Schema(String),
}

impl Potential {
    pub fn zero() -> Self {
        Potential {
            a: BTreeMap::new(),
            b: BTreeMap::new(),
            c: BTreeMap::new(),
            base_point: CRat::zero(),
        }
    }

    pub fn with_base_point(mut self, z0: CRat) -> Self {
        self.base_point = z0;
        self
    }

    /// Largest λ-power any grade touches (for sizing loops).
    pub fn lambda_degree(&self) -> usize {
        let mut d = 0i32;
        for &n in self.a.keys() {
            d = d.max((2 * n).abs());
        }
        for &n in self.b.keys().chain(self.c.keys()) {
            d = d.max((2 * n - 1).abs());
        }
        d as usize
    }

    /// Drop grades whose polynomial is identically zero.
    fn pruned(mut self) -> Self {
        self.a.retain(|_, p| !p.is_zero());
        self.b.retain(|_, p| !p.is_zero());
        self.c.retain(|_, p| !p.is_zero());
        self
    }

    /// The polynomial at a given λ-power and matrix slot, if present.
    pub fn grade_a(&self, n: i32) -> HoloPoly {
        self.a.get(&n).cloned().unwrap_or_else(Poly1::zero)
    }

    pub fn grade_b(&self, n: i32) -> HoloPoly {
        self.b.get(&n).cloned().unwrap_or_else(Poly1::zero)
    }

    pub fn grade_c(&self, n: i32) -> HoloPoly {
        self.c.get(&n).cloned().unwrap_or_else(Poly1::zero)
    }

    /// Exact evaluation of the lowest-grade off-diagonal pair (b₀(z), c₀(z)),
    /// the signature controlling rank and singularity of the projected map.
    pub fn lowest_order_pair(&self, z: &CRat) -> (CRat, CRat) {
        (self.grade_b(0).eval(z), self.grade_c(0).eval(z))
    }

    /// Floating-point evaluation of the same pair.
    pub fn lowest_pair_c64(&self, z: C64) -> (C64, C64) {
        (
            eval_c64(&self.grade_b(0), z),
            eval_c64(&self.grade_c(0), z),
        )
    }

    /// A(z) as a loop of degree `d` (which must fit every graded power).
    pub fn evaluate_a(&self, z: C64, d: usize) -> LaurentLoop {
        assert!(
            d >= self.lambda_degree(),
            "loop degree {d} too small for λ-degree {}",
            self.lambda_degree()
        );
        let mut out = LaurentLoop::zero(d);
        for (&n, p) in &self.a {
            let v = eval_c64(p, z);
            let mut m = out.coeff(2 * n);
            m.a += v;
            m.d -= v;
            out.set_coeff(2 * n, m);
        }
        for (&n, p) in &self.b {
            let mut m = out.coeff(2 * n - 1);
            m.b += eval_c64(p, z);
            out.set_coeff(2 * n - 1, m);
        }
        for (&n, p) in &self.c {
            let mut m = out.coeff(2 * n - 1);
            m.c += eval_c64(p, z);
            out.set_coeff(2 * n - 1, m);
        }
        out
    }

    /// Compile to a float-coefficient form for the inner ODE loop.
    pub fn compile(&self, d: usize) -> CompiledPotential {
        assert!(d >= self.lambda_degree());
        let mut rows = Vec::new();
        for (&n, p) in &self.a {
            rows.push((2 * n, Slot::Diag, compile_poly(p)));
        }
        for (&n, p) in &self.b {
            rows.push((2 * n - 1, Slot::Upper, compile_poly(p)));
        }
        for (&n, p) in &self.c {
            rows.push((2 * n - 1, Slot::Lower, compile_poly(p)));
        }
        CompiledPotential { d, rows }
    }
}

/// The boundary-data potential: grades n ∈ {0, 1} only, with
/// a₀ = 2i·kappa_g, b₀ = −1 − i·b, c₀ = 1 + i·b, b₁ = −1 + i·b,
/// c₁ = 1 − i·b.
pub fn potential_from_cauchy_data(data: &CauchyData) -> Potential {
    let two_i = CRat::from_i64(0, 2);
    let i = CRat::i();
    let one = Poly1::one();
    let ib = data.b.scale(&i);

    let mut a = BTreeMap::new();
    a.insert(0, data.kappa_g.scale(&two_i));
    let mut b = BTreeMap::new();
    b.insert(0, one.neg().sub(&ib));
    b.insert(1, one.neg().add(&ib));
    let mut c = BTreeMap::new();
    c.insert(0, one.add(&ib));
    c.insert(1, one.sub(&ib));

    Potential {
        a,
        b,
        c,
        base_point: CRat::zero(),
    }
    .pruned()
}

/// Add the s·λ⁻¹ upper-right perturbation: b₀ gains the constant s.
pub fn add_perturbation(p: &Potential, s: &Rat) -> Potential {
    let mut out = p.clone();
    let shift = Poly1::constant(CRat::from_rat(s.clone()));
    let b0 = out.grade_b(0).add(&shift);
    if b0.is_zero() {
        out.b.remove(&0);
    } else {
        out.b.insert(0, b0);
    }
    out
}

fn eval_c64(p: &HoloPoly, z: C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for c in p.coeffs().iter().rev() {
        acc = acc * z + c.to_c64();
    }
    acc
}

fn compile_poly(p: &HoloPoly) -> Vec<C64> {
    p.coeffs().iter().map(|c| c.to_c64()).collect()
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Slot {
    Diag,
    Upper,
    Lower,
}

/// Float-coefficient view of a potential: one Horner evaluation per nonzero
/// graded entry, written straight into a reusable loop.
#[derive(Clone, Debug)]
pub struct CompiledPotential {
    d: usize,
    rows: Vec<(i32, Slot, Vec<C64>)>,
}

impl CompiledPotential {
    pub fn degree(&self) -> usize {
        self.d
    }

    /// Powers carrying nonzero data (for integrators that skip zero blocks).
    pub fn active_powers(&self) -> Vec<i32> {
        let mut v: Vec<i32> = self.rows.iter().map(|r| r.0).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn eval(&self, z: C64) -> LaurentLoop {
        let mut out = LaurentLoop::zero(self.d);
        self.eval_into(z, &mut out);
        out
    }

    pub fn eval_into(&self, z: C64, out: &mut LaurentLoop) {
        for n in -(self.d as i32)..=(self.d as i32) {
            out.set_coeff(n, CMat2::zero());
        }
        for (power, slot, coeffs) in &self.rows {
            let mut v = C64::new(0.0, 0.0);
            for c in coeffs.iter().rev() {
                v = v * z + c;
            }
            let mut m = out.coeff(*power);
            match slot {
                Slot::Diag => {
                    m.a += v;
                    m.d -= v;
                }
                Slot::Upper => m.b += v,
                Slot::Lower => m.c += v,
            }
            out.set_coeff(*power, m);
        }
    }
}

// ---------------------------------------------------------------------------
// JSON ingestion
// ---------------------------------------------------------------------------

/// Parse an exact rational: integer `3`, or pair `[num, den]`.
/// Floats are rejected — exact fields stay exact.
pub fn rat_from_json(v: &Value) -> Result<Rat, PotentialError> {
    match v {
        Value::Number(n) => {
            let i = n
                .as_i64()
                .ok_or_else(|| PotentialError::Schema(format!("expected integer, got {n}")))?;
            Ok(Rat::from_integer(i.into()))
        }
        Value::Array(parts) if parts.len() == 2 => {
            let num = parts[0]
                .as_i64()
                .ok_or_else(|| PotentialError::Schema("numerator must be an integer".into()))?;
            let den = parts[1]
                .as_i64()
                .ok_or_else(|| PotentialError::Schema("denominator must be an integer".into()))?;
            if den == 0 {
                return Err(PotentialError::Schema("zero denominator".into()));
            }
            Ok(Rat::new(num.into(), den.into()))
        }
        other => Err(PotentialError::Schema(format!(
            "expected integer or [num, den], got {other}"
        ))),
    }
}

/// Parse an exact complex rational: a rational form (taken as real), or
/// `{"re": r, "im": i}` with rational-form parts (`im` optional).
pub fn crat_from_json(v: &Value) -> Result<CRat, PotentialError> {
    if let Value::Object(map) = v {
        let mut re = Rat::from_integer(0.into());
        let mut im = Rat::from_integer(0.into());
        for (k, val) in map {
            match k.as_str() {
                "re" => re = rat_from_json(val)?,
                "im" => im = rat_from_json(val)?,
                other => {
                    return Err(PotentialError::Schema(format!(
                        "unexpected key {other:?} in complex value"
                    )))
                }
            }
        }
        return Ok(CRat::new(re, im));
    }
    Ok(CRat::from_rat(rat_from_json(v)?))
}

/// Parse a coefficient list (ascending powers of z) of complex rationals.
pub fn holopoly_from_json(v: &Value) -> Result<HoloPoly, PotentialError> {
    let arr = v
        .as_array()
        .ok_or_else(|| PotentialError::Schema("coefficient list must be an array".into()))?;
    let coeffs = arr.iter().map(crat_from_json).collect::<Result<_, _>>()?;
    Ok(Poly1::new(coeffs))
}

fn grade_map_from_json(v: &Value) -> Result<BTreeMap<i32, HoloPoly>, PotentialError> {
    let obj = v
        .as_object()
        .ok_or_else(|| PotentialError::Schema("grade map must be an object".into()))?;
    let mut out = BTreeMap::new();
    for (k, val) in obj {
        let n: i32 = k
            .parse()
            .map_err(|_| PotentialError::Schema(format!("grade key {k:?} is not an integer")))?;
        if n < 0 {
            return Err(PotentialError::Schema(
                "grades must be non-negative so the loop has a simple pole at most".into(),
            ));
        }
        let p = holopoly_from_json(val)?;
        if !p.is_zero() {
            out.insert(n, p);
        }
    }
    Ok(out)
}

/// Parse a potential document:
/// `{"cauchy": {"b": [...], "kappa_g": [...]}}` or
/// `{"generic": {"a": {...}, "b": {...}, "c": {...}}}`,
/// optionally with `"base_point": [re, im]` and `"perturbation_s"`.
pub fn potential_from_json(v: &Value) -> Result<Potential, PotentialError> {
    let obj = v
        .as_object()
        .ok_or_else(|| PotentialError::Schema("potential must be an object".into()))?;

    let mut potential = if let Some(cauchy) = obj.get("cauchy") {
        let c = cauchy
            .as_object()
            .ok_or_else(|| PotentialError::Schema("cauchy block must be an object".into()))?;
        let b = holopoly_from_json(
            c.get("b")
                .ok_or_else(|| PotentialError::Schema("cauchy block needs \"b\"".into()))?,
        )?;
        let kappa_g = holopoly_from_json(
            c.get("kappa_g")
                .ok_or_else(|| PotentialError::Schema("cauchy block needs \"kappa_g\"".into()))?,
        )?;
        potential_from_cauchy_data(&CauchyData::new(b, kappa_g)?)
    } else if let Some(generic) = obj.get("generic") {
        let g = generic
            .as_object()
            .ok_or_else(|| PotentialError::Schema("generic block must be an object".into()))?;
        let mut p = Potential::zero();
        if let Some(a) = g.get("a") {
            p.a = grade_map_from_json(a)?;
        }
        if let Some(b) = g.get("b") {
            p.b = grade_map_from_json(b)?;
        }
        if let Some(c) = g.get("c") {
            p.c = grade_map_from_json(c)?;
        }
        p
    } else {
        return Err(PotentialError::Schema(
            "potential needs a \"cauchy\" or \"generic\" block".into(),
        ));
    };

    if let Some(bp) = obj.get("base_point") {
        let arr = bp.as_array().filter(|a| a.len() == 2).ok_or_else(|| {
            PotentialError::Schema("base_point must be [re, im]".into())
        })?;
        potential.base_point = CRat::new(rat_from_json(&arr[0])?, rat_from_json(&arr[1])?);
    }
    if let Some(s) = obj.get("perturbation_s") {
        potential = add_perturbation(&potential, &rat_from_json(s)?);
    }
    Ok(potential)
}
