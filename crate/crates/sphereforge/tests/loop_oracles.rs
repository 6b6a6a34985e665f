//! Oracle tests for Laurent-loop arithmetic and the unitary/plus
//! factorization.
//!
//! Every factorization assertion here is checked against something computed
//! a different way: pointwise circle evaluation for products, a closed-form
//! factorization for the shear family, and hand-built factor pairs (unitary
//! times plus with unit determinant) whose canonical factorization is known
//! in advance.

use num::complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sphereforge::loops::{iwasawa_factor, unitarity_error, IwasawaOptions, LaurentLoop, Parity};
use sphereforge::mat2::CMat2;

type C64 = Complex64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn circle(k: usize, m: usize) -> C64 {
    let t = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
    c(t.cos(), t.sin())
}

fn random_mat(rng: &mut ChaCha8Rng, scale: f64) -> CMat2 {
    let mut e = || c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * c(scale, 0.0);
    CMat2::new(e(), e(), e(), e())
}

fn random_loop(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> LaurentLoop {
    let mut x = LaurentLoop::zero(d);
    for n in -(d as i32)..=(d as i32) {
        x.set_coeff(n, random_mat(rng, scale));
    }
    x
}

/// Unitary twisted generator: [[cos t, s·λ^{−m}], [−s̄·λ^m, cos t]] with
/// |s| = sin t and m odd. Unitary on the circle, determinant one.
fn twisted_rotation(theta: f64, phase: f64, m: i32) -> LaurentLoop {
    assert!(m % 2 != 0);
    let (s, ct) = theta.sin_cos();
    let sc = c(s * phase.cos(), s * phase.sin());
    let mut g = LaurentLoop::zero(m.unsigned_abs() as usize);
    g.set_coeff(0, CMat2::diag(c(ct, 0.0), c(ct, 0.0)));
    let mut up = CMat2::zero();
    up.b = sc;
    let mut lo = CMat2::zero();
    lo.c = -sc.conj();
    g.set_coeff(-m, up);
    g.set_coeff(m, lo);
    g
}

/// Constant diag(e^{iφ}, e^{−iφ}).
fn diag_phase(phi: f64) -> LaurentLoop {
    LaurentLoop::constant(
        0,
        CMat2::diag(c(phi.cos(), phi.sin()), c(phi.cos(), -phi.sin())),
    )
}

/// Plus-loop shear I + w·λ^m·E with E one off-diagonal unit, m odd positive.
fn plus_shear(w: C64, m: i32, upper: bool) -> LaurentLoop {
    assert!(m > 0 && m % 2 != 0);
    let mut g = LaurentLoop::identity(m as usize);
    let mut e = CMat2::zero();
    if upper {
        e.b = w;
    } else {
        e.c = w;
    }
    g.set_coeff(m, e);
    g
}

fn max_entry_diff(a: &CMat2, b: &CMat2) -> f64 {
    a.sub(b).max_abs()
}

fn loops_close(a: &LaurentLoop, b: &LaurentLoop, tol: f64) -> bool {
    let d = a.max_degree().max(b.max_degree()) as i32;
    (-d..=d).all(|n| max_entry_diff(&a.coeff(n), &b.coeff(n)) <= tol)
}

#[test]
fn mul_matches_pointwise_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let a = random_loop(&mut rng, 3, 1.0);
        let b = random_loop(&mut rng, 2, 1.0);
        let p = a.mul(&b);
        assert_eq!(p.max_degree(), 5);
        for k in 0..64 {
            let l = circle(k, 64);
            let direct = a.eval(l).mul(&b.eval(l));
            assert!(max_entry_diff(&p.eval(l), &direct) <= 1e-10);
        }
    }
}

#[test]
fn mul_identity_and_power_cancellation() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x = random_loop(&mut rng, 4, 1.0);
    let id = LaurentLoop::identity(0);
    assert!(loops_close(&id.mul(&x), &x, 0.0));
    // (λ·I)·(λ⁻¹·I) = I.
    let mut lp = LaurentLoop::zero(1);
    lp.set_coeff(1, CMat2::identity());
    let mut lm = LaurentLoop::zero(1);
    lm.set_coeff(-1, CMat2::identity());
    assert!(loops_close(&lp.mul(&lm), &LaurentLoop::identity(2), 0.0));
}

#[test]
fn eval_is_linear_and_respects_monomials() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a = random_loop(&mut rng, 3, 1.0);
    let b = random_loop(&mut rng, 3, 1.0);
    for k in 0..16 {
        let l = circle(k, 16);
        let s = a.add(&b).eval(l);
        assert!(max_entry_diff(&s, &a.eval(l).add(&b.eval(l))) <= 1e-12);
    }
    // Identity at λ = i; single coefficient at n=1 evaluated at λ=−1 flips sign.
    assert!(max_entry_diff(&LaurentLoop::identity(2).eval(c(0.0, 1.0)), &CMat2::identity()) == 0.0);
    let m = random_mat(&mut rng, 1.0);
    let mut single = LaurentLoop::zero(1);
    single.set_coeff(1, m);
    assert!(max_entry_diff(&single.eval(c(-1.0, 0.0)), &m.neg()) <= 1e-15);
}

#[test]
fn unitarity_error_examples() {
    assert_eq!(unitarity_error(&LaurentLoop::identity(0), 8), 0.0);
    // diag(2, 1/2): the worst entry of X*X − I is |2|² − 1 = 3.
    let x = LaurentLoop::constant(0, CMat2::diag(c(2.0, 0.0), c(0.5, 0.0)));
    let e = unitarity_error(&x, 8);
    assert!((e - 3.0).abs() < 1e-15);
}

#[test]
fn twisted_parity_preserved_by_mul() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..10 {
        let a = random_twisted(&mut rng, 3);
        let b = random_twisted(&mut rng, 2);
        assert_eq!(a.parity(), Parity::Twisted);
        let p = a.mul(&b);
        assert_eq!(p.twisted_defect(), 0.0);
        assert_eq!(p.parity(), Parity::Twisted);
    }
}

fn random_twisted(rng: &mut ChaCha8Rng, d: usize) -> LaurentLoop {
    let mut x = LaurentLoop::zero(d);
    for n in -(d as i32)..=(d as i32) {
        let m = random_mat(rng, 1.0);
        let mut keep = CMat2::zero();
        if n.rem_euclid(2) == 0 {
            keep.a = m.a;
            keep.d = m.d;
        } else {
            keep.b = m.b;
            keep.c = m.c;
        }
        x.set_coeff(n, keep);
    }
    x
}

#[test]
fn iwasawa_identity_loop() {
    let f = iwasawa_factor(&LaurentLoop::identity(4), &IwasawaOptions::default()).unwrap();
    assert!(loops_close(&f.unitary_part, &LaurentLoop::identity(4), 1e-14));
    assert!(loops_close(&f.plus_part, &LaurentLoop::identity(4), 1e-14));
    assert!((f.rho - 1.0).abs() < 1e-14);
}

#[test]
fn iwasawa_constant_unitary_loop() {
    // Rotation by π/4: already unitary, so B = I and ρ = 1.
    let t = std::f64::consts::FRAC_PI_4;
    let u = CMat2::new(c(t.cos(), 0.0), c(-t.sin(), 0.0), c(t.sin(), 0.0), c(t.cos(), 0.0));
    let f = iwasawa_factor(&LaurentLoop::constant(2, u), &IwasawaOptions::default()).unwrap();
    assert!(max_entry_diff(&f.unitary_part.coeff(0), &u) < 1e-12);
    assert!(loops_close(&f.plus_part, &LaurentLoop::identity(2), 1e-12));
    assert!((f.rho - 1.0).abs() < 1e-12);
}

#[test]
fn iwasawa_constant_positive_diagonal_loop() {
    // diag(2, 1/2) is already in the plus subgroup with positive diagonal.
    let x = LaurentLoop::constant(2, CMat2::diag(c(2.0, 0.0), c(0.5, 0.0)));
    let f = iwasawa_factor(&x, &IwasawaOptions::default()).unwrap();
    assert!(loops_close(&f.unitary_part, &LaurentLoop::identity(2), 1e-12));
    assert!(loops_close(&f.plus_part, &x, 1e-12));
    assert!((f.rho - 2.0).abs() < 1e-12);
}

#[test]
fn iwasawa_matches_closed_form_for_shear_family() {
    // Φ = I + z·λ⁻¹·E₁₂ factors in closed form: with r = √(1+|z|²),
    //   B = [[1/r, 0], [z̄λ/r, r]],  F̂ = [[1/r, zλ⁻¹/r], [−z̄λ/r, 1/r]],
    // so ρ = 1/r. Verified by multiplying back and by direct comparison.
    for z in [c(0.3, 0.0), c(-0.7, 0.2), c(0.0, 2.0)] {
        let mut phi = LaurentLoop::identity(6);
        let mut e = CMat2::zero();
        e.b = z;
        phi.set_coeff(-1, e);
        let f = iwasawa_factor(&phi, &IwasawaOptions::default()).unwrap();
        let r = (1.0 + z.norm_sqr()).sqrt();
        assert!((f.rho - 1.0 / r).abs() < 1e-10, "rho for z={z}");

        let mut b_true = LaurentLoop::zero(6);
        b_true.set_coeff(0, CMat2::diag(c(1.0 / r, 0.0), c(r, 0.0)));
        let mut b1 = CMat2::zero();
        b1.c = z.conj() / c(r, 0.0);
        b_true.set_coeff(1, b1);
        assert!(loops_close(&f.plus_part, &b_true, 1e-10));

        let mut f_true = LaurentLoop::zero(6);
        f_true.set_coeff(0, CMat2::diag(c(1.0 / r, 0.0), c(1.0 / r, 0.0)));
        let mut fm = CMat2::zero();
        fm.b = z / c(r, 0.0);
        f_true.set_coeff(-1, fm);
        let mut fp = CMat2::zero();
        fp.c = -z.conj() / c(r, 0.0);
        f_true.set_coeff(1, fp);
        assert!(loops_close(&f.unitary_part, &f_true, 1e-10));

        assert!(f.diagnostics.recomposition_error <= 1e-10);
        assert!(f.diagnostics.unitarity_error <= 1e-12);
    }
}

#[test]
fn iwasawa_recovers_hand_built_twisted_factors() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..5 {
        // F_true: product of twisted unitary generators (degree 4 total).
        let f_true = twisted_rotation(rng.random::<f64>(), rng.random::<f64>() * 6.28, 1)
            .mul(&twisted_rotation(rng.random::<f64>(), rng.random::<f64>() * 6.28, 3))
            .mul(&diag_phase(rng.random::<f64>()));
        // B_true: diag(ρ0, 1/ρ0) times unipotent shears (degree 2, det ≡ 1,
        // λ⁰ coefficient diagonal positive).
        let rho0 = 0.5 + rng.random::<f64>();
        let w1 = c(0.4 * (rng.random::<f64>() - 0.5), 0.4 * (rng.random::<f64>() - 0.5));
        let w2 = c(0.4 * (rng.random::<f64>() - 0.5), 0.4 * (rng.random::<f64>() - 0.5));
        let b_true = plus_shear(w1, 1, true)
            .mul(&plus_shear(w2, 1, false))
            .mul(&LaurentLoop::constant(0, CMat2::diag(c(rho0, 0.0), c(1.0 / rho0, 0.0))));
        let phi = f_true.mul(&b_true);
        assert_eq!(phi.parity(), Parity::Twisted, "trial {trial}");
        assert_eq!(phi.max_degree(), 6);

        let f = iwasawa_factor(&phi, &IwasawaOptions::default()).unwrap();
        // The canonical factorization must recover the hand-built factors.
        assert!(loops_close(&f.unitary_part, &f_true, 1e-7), "trial {trial}");
        assert!(loops_close(&f.plus_part, &b_true, 1e-7), "trial {trial}");
        assert!(f.diagnostics.recomposition_error <= 1e-8);
        assert!(f.diagnostics.unitarity_error <= 1e-8);
        assert!(f.diagnostics.b0_offdiag <= 1e-10);

        // Determinism: the same input factors to bit-identical output.
        let g = iwasawa_factor(&phi, &IwasawaOptions::default()).unwrap();
        assert!(loops_close(&f.unitary_part, &g.unitary_part, 0.0));
        assert!(loops_close(&f.plus_part, &g.plus_part, 0.0));
    }
}

#[test]
fn iwasawa_rejects_determinant_drift() {
    // det = 4 everywhere: violates the |det − 1| precondition.
    let x = LaurentLoop::constant(2, CMat2::diag(c(2.0, 0.0), c(2.0, 0.0)));
    let err = iwasawa_factor(&x, &IwasawaOptions::default());
    assert!(err.is_err());
}
