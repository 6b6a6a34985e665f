//! 2×2 complex matrices over f64, the scalar block of every loop
//! computation.
//!
//! Operations are written out explicitly: profiling-level hot loops live in
//! the factorization and ODE code, and a fixed-size type with no indirection
//! keeps them allocation-free.

use num::complex::Complex64;

pub type C64 = Complex64;

/// Row-major 2×2 complex matrix: [[a, b], [c, d]].
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct CMat2 {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl CMat2 {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        CMat2 { a, b, c, d }
    }

    pub fn zero() -> Self {
        let z = C64::new(0.0, 0.0);
        CMat2::new(z, z, z, z)
    }

    pub fn identity() -> Self {
        let z = C64::new(0.0, 0.0);
        let o = C64::new(1.0, 0.0);
        CMat2::new(o, z, z, o)
    }

    pub fn diag(a: C64, d: C64) -> Self {
        let z = C64::new(0.0, 0.0);
        CMat2::new(a, z, z, d)
    }

    pub fn add(&self, o: &Self) -> Self {
        CMat2::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }

    pub fn sub(&self, o: &Self) -> Self {
        CMat2::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }

    pub fn neg(&self) -> Self {
        CMat2::new(-self.a, -self.b, -self.c, -self.d)
    }

    pub fn mul(&self, o: &Self) -> Self {
        CMat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    pub fn scale(&self, s: C64) -> Self {
        CMat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        CMat2::new(self.a.conj(), self.c.conj(), self.b.conj(), self.d.conj())
    }

    pub fn transpose(&self) -> Self {
        CMat2::new(self.a, self.c, self.b, self.d)
    }

    pub fn conj(&self) -> Self {
        CMat2::new(self.a.conj(), self.b.conj(), self.c.conj(), self.d.conj())
    }

    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> C64 {
        self.a + self.d
    }

    /// Inverse; `None` when the determinant is numerically zero.
    pub fn inv(&self) -> Option<Self> {
        let det = self.det();
        if det.norm() == 0.0 {
            return None;
        }
        let i = C64::new(1.0, 0.0) / det;
        Some(CMat2::new(self.d * i, -self.b * i, -self.c * i, self.a * i))
    }

    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn frobenius(&self) -> f64 {
        (self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.a
            .norm()
            .max(self.b.norm())
            .max(self.c.norm())
            .max(self.d.norm())
    }

    pub fn is_finite(&self) -> bool {
        [self.a, self.b, self.c, self.d]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Deviation from unitarity: ‖M*M − I‖_F.
    pub fn unitarity_defect(&self) -> f64 {
        self.adjoint()
            .mul(self)
            .sub(&CMat2::identity())
            .frobenius()
    }

    /// Matrix exponential by scaling and squaring on a Taylor series.
    pub fn exp(&self) -> Self {
        let norm = self.frobenius();
        let k = if norm > 0.5 {
            (norm / 0.5).log2().ceil() as u32
        } else {
            0
        };
        let small = self.scale_re(1.0 / f64::powi(2.0, k as i32));
        // Taylor to machine precision for ‖X‖ ≤ 1/2: 20 terms is ample.
        let mut term = CMat2::identity();
        let mut sum = CMat2::identity();
        for n in 1..=20 {
            term = term.mul(&small).scale_re(1.0 / n as f64);
            sum = sum.add(&term);
        }
        let mut out = sum;
        for _ in 0..k {
            out = out.mul(&out);
        }
        out
    }
}
