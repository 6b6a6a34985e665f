//! Truncated matrix Laurent series ("loops") and their canonical
//! unitary × plus factorization.
//!
//! A loop stores coefficients for λⁿ, n ∈ [−d, d]. The factorization splits
//! Φ(λ) = F̂(λ)·B(λ) with F̂ unitary on the unit circle and B holomorphic in
//! the disc, normalized so B's λ⁰ coefficient is upper triangular with
//! positive real diagonal. It is computed through the Gram symbol
//! G = Φ*Φ: a spectral factor B with B*B = G is found by a quadratically
//! convergent symbol iteration started from the Cholesky factor of G's mean
//! coefficient, and F̂ = Φ·B⁻¹.

use crate::mat2::{C64, CMat2};
use thiserror::Error;

/// Coefficient parity pattern of a loop.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Parity {
    /// Diagonal entries only at even powers, off-diagonal only at odd.
    Twisted,
    Untwisted,
}

/// Matrix Laurent polynomial with powers in [−d, d].
#[derive(Clone, PartialEq, Debug)]
pub struct LaurentLoop {
    d: usize,
    /// Coefficient of λⁿ at index n + d.
    coeffs: Vec<CMat2>,
}

impl LaurentLoop {
    pub fn zero(d: usize) -> Self {
        LaurentLoop {
            d,
            coeffs: vec![CMat2::zero(); 2 * d + 1],
        }
    }

    pub fn identity(d: usize) -> Self {
        Self::constant(d, CMat2::identity())
    }

    pub fn constant(d: usize, m: CMat2) -> Self {
        let mut x = Self::zero(d);
        x.coeffs[d] = m;
        x
    }

    pub fn max_degree(&self) -> usize {
        self.d
    }

    pub fn coeff(&self, n: i32) -> CMat2 {
        if n.unsigned_abs() as usize > self.d {
            CMat2::zero()
        } else {
            self.coeffs[(n + self.d as i32) as usize]
        }
    }

    pub fn set_coeff(&mut self, n: i32, m: CMat2) {
        assert!(
            n.unsigned_abs() as usize <= self.d,
            "coefficient index {n} outside [-{d}, {d}]",
            d = self.d
        );
        self.coeffs[(n + self.d as i32) as usize] = m;
    }

    /// Σ coeffs[n]·λⁿ. λ = 0 is allowed only when no negative powers are
    /// stored (plus loops).
    pub fn eval(&self, lambda: C64) -> CMat2 {
        // Horner on P(λ) = Σ_{k=0..2d} c_{k-d} λᵏ, then multiply by λ^{−d}.
        let mut acc = CMat2::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.scale(lambda).add(c);
        }
        if self.d == 0 {
            return acc;
        }
        let neg_degree = self
            .coeffs
            .iter()
            .take(self.d)
            .any(|c| c.max_abs() != 0.0);
        if lambda.norm_sqr() == 0.0 {
            assert!(
                !neg_degree,
                "cannot evaluate negative powers at λ = 0"
            );
            return self.coeffs[self.d];
        }
        let mut lam_d = C64::new(1.0, 0.0);
        for _ in 0..self.d {
            lam_d *= lambda;
        }
        acc.scale(C64::new(1.0, 0.0) / lam_d)
    }

    pub fn add(&self, other: &Self) -> Self {
        let d = self.d.max(other.d);
        let mut out = Self::zero(d);
        for n in -(d as i32)..=(d as i32) {
            out.set_coeff(n, self.coeff(n).add(&other.coeff(n)));
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let d = self.d.max(other.d);
        let mut out = Self::zero(d);
        for n in -(d as i32)..=(d as i32) {
            out.set_coeff(n, self.coeff(n).sub(&other.coeff(n)));
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        LaurentLoop {
            d: self.d,
            coeffs: self.coeffs.iter().map(|c| c.scale(s)).collect(),
        }
    }

    /// Cauchy product at the full natural degree d₁ + d₂.
    pub fn mul(&self, other: &Self) -> Self {
        self.mul_to(other, self.d + other.d)
    }

    /// Cauchy product with output powers clamped to [−d, d].
    pub fn mul_to(&self, other: &Self, d: usize) -> Self {
        let mut out = Self::zero(d);
        let sd = self.d as i32;
        let od = other.d as i32;
        for n in -(d as i32)..=(d as i32) {
            let mut acc = CMat2::zero();
            let k_lo = (-sd).max(n - od);
            let k_hi = sd.min(n + od);
            for k in k_lo..=k_hi {
                let a = &self.coeffs[(k + sd) as usize];
                if a.max_abs() == 0.0 {
                    continue;
                }
                acc = acc.add(&a.mul(&other.coeffs[(n - k + od) as usize]));
            }
            out.set_coeff(n, acc);
        }
        out
    }

    /// Re-window to degree d (coefficients outside are dropped, inside kept).
    pub fn truncate(&self, d: usize) -> Self {
        let mut out = Self::zero(d);
        for n in -(d as i32)..=(d as i32) {
            out.set_coeff(n, self.coeff(n));
        }
        out
    }

    /// The loop λ ↦ X(λ)* on the unit circle: coefficient n is the
    /// conjugate transpose of coefficient −n.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.d);
        for n in -(self.d as i32)..=(self.d as i32) {
            out.set_coeff(n, self.coeff(-n).adjoint());
        }
        out
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.max_abs()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// True when no negative power carries a nonzero coefficient.
    pub fn is_plus(&self) -> bool {
        self.coeffs[..self.d].iter().all(|c| c.max_abs() == 0.0)
    }

    /// Largest entry violating the twisted pattern (diagonal ↔ even power,
    /// off-diagonal ↔ odd power); exactly 0.0 for twisted loops.
    pub fn twisted_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for n in -(self.d as i32)..=(self.d as i32) {
            let m = self.coeff(n);
            let v = if n.rem_euclid(2) == 0 {
                m.b.norm().max(m.c.norm())
            } else {
                m.a.norm().max(m.d.norm())
            };
            worst = worst.max(v);
        }
        worst
    }

    pub fn parity(&self) -> Parity {
        if self.twisted_defect() == 0.0 {
            Parity::Twisted
        } else {
            Parity::Untwisted
        }
    }
}

/// Uniform circle sample points λ_k = exp(2πik/m).
fn circle_samples(m: usize) -> impl Iterator<Item = C64> {
    (0..m).map(move |k| {
        let t = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
        C64::new(t.cos(), t.sin())
    })
}

/// Max over sampled λ of the worst entry of X(λ)*X(λ) − I.
pub fn unitarity_error(x: &LaurentLoop, samples: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for lam in circle_samples(samples) {
        let v = x.eval(lam);
        let defect = v.adjoint().mul(&v).sub(&CMat2::identity()).max_abs();
        worst = worst.max(defect);
    }
    worst
}

#[derive(Clone, Debug)]
pub struct IwasawaOptions {
    /// Allowed |det Φ(λ) − 1| on the sampled circle (precondition).
    pub tol_det: f64,
    /// Unitarity budget for the returned unitary factor (diagnostic gate).
    pub tol_unit: f64,
    /// Recomposition budget ‖F̂B − Φ‖ on the sampled circle (diagnostic gate).
    pub tol_recomp: f64,
    /// Symbol-iteration cap.
    pub max_iter: usize,
    /// Relative factor residual above which the iteration reports failure
    /// instead of returning. Raise this when deliberately probing how
    /// truncation degrades accuracy (e.g. degree studies).
    pub fail_residual: f64,
}

impl Default for IwasawaOptions {
    fn default() -> Self {
        IwasawaOptions {
            tol_det: 1e-8,
            tol_unit: 1e-8,
            tol_recomp: 1e-6,
            max_iter: 50,
            fail_residual: 1e-7,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct IwasawaDiagnostics {
    /// Symbol iterations performed.
    pub iterations: usize,
    /// Final coefficient residual of B*B − G, relative to ‖G‖.
    pub factor_residual: f64,
    /// Max sampled-circle entry error of F̂·B against the input.
    pub recomposition_error: f64,
    /// Unitarity error of the returned unitary factor.
    pub unitarity_error: f64,
    /// |upper-right entry| of B's λ⁰ coefficient (0 for twisted inputs).
    pub b0_offdiag: f64,
    /// Max sampled |det Φ(λ) − 1| of the input.
    pub det_error: f64,
}

#[derive(Clone, Debug)]
pub struct IwasawaFactors {
    /// F̂: unitary on the sampled circle, window [−d, d].
    pub unitary_part: LaurentLoop,
    /// B: plus loop (no negative powers), λ⁰ coefficient upper triangular
    /// with positive real diagonal.
    pub plus_part: LaurentLoop,
    /// (1,1) entry of B's λ⁰ coefficient.
    pub rho: f64,
    pub diagnostics: IwasawaDiagnostics,
}

#[derive(Error, Debug, Clone)]
pub enum LoopError {
    #[error("input determinant drifts from 1 by {max_deviation:.3e} on the circle")]
    DeterminantDrift { max_deviation: f64 },
    #[error("Gram symbol lost positive definiteness (condition ≈ {condition:.3e})")]
    PositivityLost { condition: f64 },
    #[error("factor iteration stalled at relative residual {residual:.3e}")]
    NotConverged { residual: f64 },
    #[error("non-finite values encountered")]
    NonFinite,
}

/// Condition estimate of a 2×2 hermitian positive matrix: eigenvalue ratio.
fn herm_condition(g: &CMat2) -> f64 {
    let t = 0.5 * (g.a.re + g.d.re);
    let det = (g.a * g.d - g.b * g.c).re;
    let disc = (t * t - det).max(0.0).sqrt();
    let hi = t + disc;
    let lo = t - disc;
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Upper-triangular Cholesky-style factor U (positive diagonal) with
/// U*U = g for hermitian positive definite g.
fn upper_factor(g: &CMat2) -> Result<CMat2, LoopError> {
    let p = g.a.re;
    if !(p > 0.0) {
        return Err(LoopError::PositivityLost {
            condition: herm_condition(g),
        });
    }
    let u11 = p.sqrt();
    let u12 = g.b / C64::new(u11, 0.0);
    let rest = g.d.re - u12.norm_sqr();
    if !(rest > 0.0) {
        return Err(LoopError::PositivityLost {
            condition: herm_condition(g),
        });
    }
    Ok(CMat2::new(
        C64::new(u11, 0.0),
        u12,
        C64::new(0.0, 0.0),
        C64::new(rest.sqrt(), 0.0),
    ))
}

/// Series inverse of a plus loop with invertible λ⁰ coefficient, to the same
/// window: X with B·X = I + O(λ^{d+1}).
fn plus_inverse(b: &LaurentLoop, cond_src: &CMat2) -> Result<LaurentLoop, LoopError> {
    let d = b.max_degree();
    let b0_inv = b.coeff(0).inv().ok_or(LoopError::PositivityLost {
        condition: herm_condition(cond_src),
    })?;
    let mut x = LaurentLoop::zero(d);
    x.set_coeff(0, b0_inv);
    for n in 1..=d as i32 {
        let mut acc = CMat2::zero();
        for j in 1..=n {
            let bj = b.coeff(j);
            if bj.max_abs() == 0.0 {
                continue;
            }
            acc = acc.add(&bj.mul(&x.coeff(n - j)));
        }
        x.set_coeff(n, b0_inv.mul(&acc).neg());
    }
    Ok(x)
}

/// QR with R's diagonal positive real: m = Q·R, returned as (Q, R).
fn qr_positive(m: &CMat2) -> (CMat2, CMat2) {
    // Gram–Schmidt on the two columns.
    let c1 = (m.a, m.c);
    let c2 = (m.b, m.d);
    let r11 = (c1.0.norm_sqr() + c1.1.norm_sqr()).sqrt();
    let q1 = (c1.0 / C64::new(r11, 0.0), c1.1 / C64::new(r11, 0.0));
    let r12 = q1.0.conj() * c2.0 + q1.1.conj() * c2.1;
    let v = (c2.0 - q1.0 * r12, c2.1 - q1.1 * r12);
    let r22 = (v.0.norm_sqr() + v.1.norm_sqr()).sqrt();
    let q2 = (v.0 / C64::new(r22, 0.0), v.1 / C64::new(r22, 0.0));
    let q = CMat2::new(q1.0, q2.0, q1.1, q2.1);
    let r = CMat2::new(C64::new(r11, 0.0), r12, C64::new(0.0, 0.0), C64::new(r22, 0.0));
    (q, r)
}

/// Canonical factorization Φ = F̂·B.
///
/// The symbol iteration runs on the window [−2d, 2d] (the natural degree of
/// the Gram symbol); the returned factors are truncated to the input window
/// [−d, d], so their quality improves as d grows.
pub fn iwasawa_factor(
    phi: &LaurentLoop,
    opts: &IwasawaOptions,
) -> Result<IwasawaFactors, LoopError> {
    if !phi.is_finite() {
        return Err(LoopError::NonFinite);
    }
    let d = phi.max_degree();
    let samples = 4 * d + 4;

    // Precondition: the input stays (numerically) in the special linear
    // group on the circle.
    let mut det_error: f64 = 0.0;
    for lam in circle_samples(samples) {
        let dev = (phi.eval(lam).det() - C64::new(1.0, 0.0)).norm();
        det_error = det_error.max(dev);
    }
    if det_error > opts.tol_det {
        return Err(LoopError::DeterminantDrift {
            max_deviation: det_error,
        });
    }

    // Gram symbol at its full natural degree 2d.
    let g = phi.adjoint().mul(phi);
    let w = g.max_degree();
    let scale = g.max_coeff_norm().max(1.0);

    // Start from the constant upper factor of the mean coefficient.
    let mut b = LaurentLoop::constant(w, upper_factor(&g.coeff(0))?);

    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut stall = 0;
    for _ in 0..opts.max_iter {
        iterations += 1;
        let b_inv = plus_inverse(&b, &g.coeff(0))?;
        // Whitened symbol W = B⁻*·G·B⁻¹; at the fixed point it is I.
        let wsym = b_inv.adjoint().mul_to(&g, w).mul_to(&b_inv, w);
        // Plus projection with the λ⁰ term split evenly.
        let mut t = LaurentLoop::zero(w);
        t.set_coeff(
            0,
            wsym.coeff(0)
                .add(&CMat2::identity())
                .scale(C64::new(0.5, 0.0)),
        );
        for n in 1..=w as i32 {
            t.set_coeff(n, wsym.coeff(n));
        }
        b = t.mul_to(&b, w);
        if !b.is_finite() {
            return Err(LoopError::NonFinite);
        }

        let defect = b.adjoint().mul_to(&b, w).sub(&g).max_coeff_norm() / scale;
        if defect >= residual * 0.5 {
            stall += 1;
        } else {
            stall = 0;
        }
        residual = residual.min(defect);
        if residual <= 1e-14 || (stall >= 3 && residual <= 1e-9) {
            break;
        }
    }
    if residual > opts.fail_residual {
        return Err(LoopError::NotConverged { residual });
    }

    // Normalize: rotate B so its λ⁰ coefficient becomes upper triangular
    // with positive diagonal. The unitary part absorbs the rotation.
    let (q, _r) = qr_positive(&b.coeff(0));
    let b = LaurentLoop::constant(0, q.adjoint()).mul_to(&b, w);

    let b_inv = plus_inverse(&b, &g.coeff(0))?;
    let f_hat = phi.mul_to(&b_inv, d);
    let plus_part = b.truncate(d);

    let rho = plus_part.coeff(0).a.re;
    let b0_offdiag = plus_part.coeff(0).b.norm();

    let mut recomposition_error: f64 = 0.0;
    let recomposed = f_hat.mul(&plus_part);
    for lam in circle_samples(samples) {
        let dev = recomposed.eval(lam).sub(&phi.eval(lam)).max_abs();
        recomposition_error = recomposition_error.max(dev);
    }
    let unit_err = unitarity_error(&f_hat, samples);

    Ok(IwasawaFactors {
        unitary_part: f_hat,
        plus_part,
        rho,
        diagnostics: IwasawaDiagnostics {
            iterations,
            factor_residual: residual,
            recomposition_error,
            unitarity_error: unit_err,
            b0_offdiag,
            det_error,
        },
    })
}
