//! The Lie algebra su(2) with a fixed orthonormal basis, its identification
//! with Euclidean 3-space, and the adjoint action of SU(2).
//!
//! Basis (all three skew-hermitian, trace-free):
//!
//! ```text
//! e1 = 1/2 [[0, i], [i, 0]]
//! e2 = 1/2 [[0, -1], [1, 0]]
//! e3 = 1/2 [[i, 0], [0, -i]]
//! ```
//!
//! With the inner product ⟨X, Y⟩ = −2 tr(XY) this basis is orthonormal and
//! the commutator matches the cross product: [e1, e2] = e3 and cyclic. The
//! unit normal of a surface is carried as Ad_F e3 under a frame F ∈ SU(2).

use crate::mat2::{C64, CMat2};

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn zero() -> Self {
        Vec3::new(0.0, 0.0, 0.0)
    }

    pub fn add(&self, o: &Self) -> Self {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }

    pub fn sub(&self, o: &Self) -> Self {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }

    pub fn scale(&self, s: f64) -> Self {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn dot(&self, o: &Self) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &Self) -> Self {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalize(&self) -> Option<Self> {
        let n = self.norm();
        (n > 0.0).then(|| self.scale(1.0 / n))
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn e1() -> CMat2 {
    CMat2::new(c(0.0, 0.0), c(0.0, 0.5), c(0.0, 0.5), c(0.0, 0.0))
}

pub fn e2() -> CMat2 {
    CMat2::new(c(0.0, 0.0), c(-0.5, 0.0), c(0.5, 0.0), c(0.0, 0.0))
}

pub fn e3() -> CMat2 {
    CMat2::new(c(0.0, 0.5), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -0.5))
}

/// v·e = v₁e₁ + v₂e₂ + v₃e₃.
pub fn vec_to_su2(v: &Vec3) -> CMat2 {
    e1().scale_re(v.x)
        .add(&e2().scale_re(v.y))
        .add(&e3().scale_re(v.z))
}

/// ⟨X, Y⟩ = −2 tr(XY), the inner product making e1, e2, e3 orthonormal.
pub fn inner(x: &CMat2, y: &CMat2) -> f64 {
    -2.0 * x.mul(y).trace().re
}

/// Coefficients of X in the e-basis (the inverse of `vec_to_su2` on su(2)).
pub fn su2_to_vec(x: &CMat2) -> Vec3 {
    Vec3::new(inner(x, &e1()), inner(x, &e2()), inner(x, &e3()))
}

/// Adjoint action Ad_F X = F X F⁻¹ for F ∈ SU(2) (inverse taken as F*).
pub fn adjoint_action(f: &CMat2, x: &CMat2) -> CMat2 {
    f.mul(x).mul(&f.adjoint())
}

/// Ad_F e3 expressed as a Euclidean vector — the unit normal carried by a
/// frame.
pub fn normal_of_frame(f: &CMat2) -> Vec3 {
    su2_to_vec(&adjoint_action(f, &e3()))
}

/// Components of X in the e-basis extended complex-bilinearly: the k-th
/// component is −2 tr(X eₖ). Agrees with [`su2_to_vec`] on su(2) and makes
/// sense for complexified elements (e.g. z-derivatives of real fields).
pub fn su2c_to_cvec(x: &CMat2) -> (C64, C64, C64) {
    let i = C64::new(0.0, 1.0);
    (
        -i * (x.b + x.c),
        x.c - x.b,
        -i * (x.a - x.d),
    )
}
