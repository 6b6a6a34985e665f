//! The construction pipeline: integrate the holomorphic frame equation over
//! a grid, factor pointwise, and assemble the frame, unit normal, and
//! surface together with their geometric fields.
//!
//! Stages, in order:
//!
//! 1. Φ_z = Φ·A from Φ(z₀) = I, integrated independently per node along the
//!    straight segment z₀ → z with classical fixed-step RK4 (parallel).
//! 2. Pointwise canonical factorization Φ = F̂·B; the frame is F = F̂(λ=1),
//!    the unit normal N = Ad_F e₃. Per-node z-derivatives of N come in
//!    closed form from the factor data, with no finite differences.
//! 3. Surface integration f_x = N×N_y, f_y = −N×N_x by trapezoidal sums
//!    along the base row then up/down each column (sequential); the
//!    opposite order is also computed and the discrepancy recorded.
//!
//! Every stage is deterministic for a fixed input regardless of how many
//! worker threads run stage 1 and 2.

use crate::exact::Ring;
use crate::grid::DomainGrid;
use crate::loops::{iwasawa_factor, IwasawaOptions, LaurentLoop};
use crate::mat2::{C64, CMat2};
use crate::potential::{CompiledPotential, Potential};
use crate::su2::{normal_of_frame, su2c_to_cvec, Vec3};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Error, Debug, Clone)]
pub enum DpwError {
    #[error("integration step underflow (segment length {length}, max step {max_step})")]
    StepUnderflow { length: f64, max_step: f64 },
    #[error("non-finite values while integrating the frame equation")]
    NonFinite,
    #[error("potential base point is not the grid base node")]
    BasePointMismatch,
    #[error("both unit-normal offsets degenerate on more than a tenth of the usable nodes")]
    CompanionDegenerate,
}

// ---------------------------------------------------------------------------
// Stage 1: holomorphic frame ODE
// ---------------------------------------------------------------------------

/// One RK4 pass for Φ' = Φ·A(z(t))·ż along the segment `z_from` → `z_to`,
/// with step length at most `max_step` in the z-plane.
fn integrate_segment(
    a: &CompiledPotential,
    z_from: C64,
    z_to: C64,
    phi: &mut LaurentLoop,
    max_step: f64,
    d: usize,
) -> Result<(), DpwError> {
    let dz = z_to - z_from;
    let length = dz.norm();
    if length == 0.0 {
        return Ok(());
    }
    if !(max_step > 0.0) || !length.is_finite() || length / max_step > 1e9 {
        return Err(DpwError::StepUnderflow { length, max_step });
    }
    let n_steps = (length / max_step).ceil() as usize;
    let h = 1.0 / n_steps as f64;
    let rhs = |t: f64| a.eval(z_from + dz.scale(t)).scale(dz);
    for k in 0..n_steps {
        let t0 = k as f64 * h;
        let a0 = rhs(t0);
        let am = rhs(t0 + 0.5 * h);
        let a1 = rhs(t0 + h);
        let half = C64::new(0.5 * h, 0.0);
        let k1 = phi.mul_to(&a0, d);
        let k2 = phi.add(&k1.scale(half)).mul_to(&am, d);
        let k3 = phi.add(&k2.scale(half)).mul_to(&am, d);
        let k4 = phi.add(&k3.scale(C64::new(h, 0.0))).mul_to(&a1, d);
        let two = C64::new(2.0, 0.0);
        let sum = k1.add(&k2.scale(two)).add(&k3.scale(two)).add(&k4);
        *phi = phi.add(&sum.scale(C64::new(h / 6.0, 0.0)));
    }
    Ok(())
}

/// Integrate Φ along a polyline of waypoints starting from Φ = I at the
/// first point. Exposed so path independence can be checked externally.
pub fn integrate_phi_polyline(
    p: &Potential,
    waypoints: &[C64],
    d: usize,
    max_step: f64,
) -> Result<LaurentLoop, DpwError> {
    let d = d.max(p.lambda_degree());
    let compiled = p.compile(d);
    let mut phi = LaurentLoop::identity(d);
    for pair in waypoints.windows(2) {
        integrate_segment(&compiled, pair[0], pair[1], &mut phi, max_step, d)?;
    }
    if !phi.is_finite() {
        return Err(DpwError::NonFinite);
    }
    Ok(phi)
}

/// Φ at every grid node, each integrated independently along the straight
/// segment from the base node (so results do not depend on node order or
/// worker count). The base node is exactly the identity.
pub fn integrate_phi(
    p: &Potential,
    grid: &DomainGrid,
    d: usize,
) -> Result<Vec<LaurentLoop>, DpwError> {
    if p.base_point != grid.base_point() {
        return Err(DpwError::BasePointMismatch);
    }
    let d = d.max(p.lambda_degree());
    let compiled = p.compile(d);
    let max_step = grid.min_spacing() / 2.0;
    let (bi, bj) = grid.base_index();
    let z0 = grid.node_z(bi, bj);
    let nodes: Vec<(usize, usize)> = grid.indices().collect();
    nodes
        .par_iter()
        .map(|&(i, j)| {
            let mut phi = LaurentLoop::identity(d);
            integrate_segment(&compiled, z0, grid.node_z(i, j), &mut phi, max_step, d)?;
            if !phi.is_finite() {
                return Err(DpwError::NonFinite);
            }
            Ok(phi)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Stage 2 + 3: factorization, fields, surface
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    /// Loop truncation degree for integration and factorization.
    pub degree: usize,
    pub iwasawa: IwasawaOptions,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            degree: 16,
            iwasawa: IwasawaOptions::default(),
        }
    }
}

/// Aggregate health indicators of one pipeline run.
#[derive(Clone, Debug, Default)]
pub struct PipelineDiagnostics {
    /// Nodes where factorization failed or an integration path was poisoned.
    pub invalid_nodes: usize,
    /// Max ‖f_rowfirst − f_columnfirst‖ over nodes — closedness monitor.
    pub closedness_error: f64,
    /// Worst per-node ‖F̂B − Φ‖ over the unit circle.
    pub max_recomposition_error: f64,
    /// Worst per-node unitarity defect of the factor F̂ on the circle.
    pub max_unitarity_error: f64,
    /// Worst unitarity defect of the λ=1 frame.
    pub max_frame_defect: f64,
    /// Worst |det Φ − 1| seen before factoring.
    pub max_det_error: f64,
    /// Largest factorization iteration count.
    pub max_iterations: usize,
    /// Worst | ‖N‖ − 1 |.
    pub max_normal_defect: f64,
    /// ρ at the base node (should be 1).
    pub rho_at_base: f64,
}

/// Per-node output of the pipeline on a grid (flat row-major storage,
/// matching [`DomainGrid::flat`]).
#[derive(Clone, Debug)]
pub struct SurfaceFields {
    pub grid: DomainGrid,
    /// Node usable: factorization converged and the integration path to it
    /// stayed valid.
    pub valid: Vec<bool>,
    /// SU(2) frame F = F̂(λ=1).
    pub frame: Vec<CMat2>,
    /// Unit normal N = Ad_F e₃.
    pub normal: Vec<Vec3>,
    /// Exact per-node ∂N/∂x (from factor data, not finite differences).
    pub normal_x: Vec<Vec3>,
    /// Exact per-node ∂N/∂y.
    pub normal_y: Vec<Vec3>,
    /// Surface point f, integrated from f(z₀) = 0.
    pub surface: Vec<Vec3>,
    /// Exact per-node tangent vector ∂f/∂x = N × N_y (the integrand, not a
    /// finite difference of `surface`).
    pub fx: Vec<Vec3>,
    /// Exact per-node tangent vector ∂f/∂y = N_x × N.
    pub fy: Vec<Vec3>,
    /// Positive diagonal scalar of the plus factor at λ⁰.
    pub rho: Vec<f64>,
    /// The lowest-grade off-diagonal pair (b₀(z), c₀(z)) of the potential.
    pub b0c0: Vec<(C64, C64)>,
    /// Signed area density μ = ⟨f_x × f_y, N⟩.
    pub mu: Vec<f64>,
    pub diagnostics: PipelineDiagnostics,
}

impl SurfaceFields {
    /// Flat index of node (i, j).
    pub fn at(&self, i: usize, j: usize) -> usize {
        self.grid.flat(i, j)
    }

    /// Largest |μ| over valid nodes.
    pub fn max_abs_mu(&self) -> f64 {
        self.mu
            .iter()
            .zip(&self.valid)
            .filter(|(_, &v)| v)
            .fold(0.0, |m, (x, _)| m.max(x.abs()))
    }
}

/// ∂N/∂x and ∂N/∂y at a node from its frame and factor data: with
/// b̂₀ = diag(ρ, 1/ρ) the twisted plus factor's constant term,
/// N_z = Ad_F [b̂₀ A₋₁ b̂₀⁻¹, e₃], and N_x = 2 Re N_z, N_y = −2 Im N_z.
fn normal_derivatives(frame: &CMat2, rho: f64, b0: C64, c0: C64) -> (Vec3, Vec3) {
    let i = C64::new(0.0, 1.0);
    let bracket = CMat2::new(
        C64::new(0.0, 0.0),
        -i * b0.scale(rho * rho),
        i * c0.scale(1.0 / (rho * rho)),
        C64::new(0.0, 0.0),
    );
    let m = frame.mul(&bracket).mul(&frame.adjoint());
    let (c1, c2, c3) = su2c_to_cvec(&m);
    (
        Vec3::new(2.0 * c1.re, 2.0 * c2.re, 2.0 * c3.re),
        Vec3::new(-2.0 * c1.im, -2.0 * c2.im, -2.0 * c3.im),
    )
}

struct NodeOut {
    valid: bool,
    frame: CMat2,
    normal: Vec3,
    normal_x: Vec3,
    normal_y: Vec3,
    rho: f64,
    b0c0: (C64, C64),
    mu: f64,
    fx: Vec3,
    fy: Vec3,
    recomposition_error: f64,
    unitarity_error: f64,
    det_error: f64,
    iterations: usize,
}

impl NodeOut {
    fn invalid(b0c0: (C64, C64)) -> Self {
        let nan = f64::NAN;
        let nan3 = Vec3::new(nan, nan, nan);
        NodeOut {
            valid: false,
            frame: CMat2::zero(),
            normal: nan3,
            normal_x: nan3,
            normal_y: nan3,
            rho: nan,
            b0c0,
            mu: nan,
            fx: nan3,
            fy: nan3,
            recomposition_error: 0.0,
            unitarity_error: 0.0,
            det_error: 0.0,
            iterations: 0,
        }
    }
}

/// Cumulative integral of `g` along one grid line with spacing `h`,
/// anchored at index `anchor` where the value is `f_anchor`.
///
/// When the whole line is valid, composite trapezoid sums carry an
/// Euler–Maclaurin endpoint correction −(h²/12)(g′(end) − g′(anchor)) with
/// finite-difference endpoint slopes, making the cumulative integral
/// 4th-order accurate. If any node on the line is invalid, the line falls
/// back to plain trapezoid steps and poisons everything past the first
/// invalid node.
fn cumulative_line(
    g: &[Vec3],
    valid: &[bool],
    anchor: usize,
    h: f64,
    f_anchor: Vec3,
    reach_anchor: bool,
    out_f: &mut [Vec3],
    out_reach: &mut [bool],
) {
    let n = g.len();
    debug_assert!(n >= 3 && anchor < n);
    out_reach[anchor] = reach_anchor;
    if reach_anchor {
        out_f[anchor] = f_anchor;
    }

    if reach_anchor && valid.iter().all(|&v| v) {
        // Slopes of the integrand along the line (2nd order suffices: the
        // correction term itself carries the h² factor).
        let slope = |k: usize| -> Vec3 {
            if k == 0 {
                g[0].scale(-3.0).add(&g[1].scale(4.0)).sub(&g[2]).scale(0.5 / h)
            } else if k == n - 1 {
                g[n - 1]
                    .scale(3.0)
                    .sub(&g[n - 2].scale(4.0))
                    .add(&g[n - 3])
                    .scale(0.5 / h)
            } else {
                g[k + 1].sub(&g[k - 1]).scale(0.5 / h)
            }
        };
        let d_anchor = slope(anchor);
        let correct = |t: &Vec3, k: usize| -> Vec3 {
            t.sub(&slope(k).sub(&d_anchor).scale(h * h / 12.0))
        };
        let mut t = Vec3::zero();
        for k in anchor + 1..n {
            t = t.add(&g[k - 1].add(&g[k]).scale(0.5 * h));
            out_f[k] = f_anchor.add(&correct(&t, k));
            out_reach[k] = true;
        }
        t = Vec3::zero();
        for k in (0..anchor).rev() {
            t = t.sub(&g[k + 1].add(&g[k]).scale(0.5 * h));
            out_f[k] = f_anchor.add(&correct(&t, k));
            out_reach[k] = true;
        }
        return;
    }

    // Degraded path: plain trapezoid with validity poisoning.
    for k in anchor + 1..n {
        out_reach[k] = out_reach[k - 1] && valid[k];
        if out_reach[k] {
            out_f[k] = out_f[k - 1].add(&g[k - 1].add(&g[k]).scale(0.5 * h));
        }
    }
    for k in (0..anchor).rev() {
        out_reach[k] = out_reach[k + 1] && valid[k];
        if out_reach[k] {
            out_f[k] = out_f[k + 1].sub(&g[k + 1].add(&g[k]).scale(0.5 * h));
        }
    }
}

/// Accumulate f along the base row (or column) and then the perpendicular
/// lines. Returns positions and reachability.
fn integrate_surface(
    grid: &DomainGrid,
    fx: &[Vec3],
    fy: &[Vec3],
    valid: &[bool],
    row_first: bool,
) -> (Vec<Vec3>, Vec<bool>) {
    let (nx, ny) = (grid.nx(), grid.ny());
    let (bi, bj) = grid.base_index();
    let (hx, hy) = (grid.spacing_x(), grid.spacing_y());
    let nan3 = Vec3::new(f64::NAN, f64::NAN, f64::NAN);
    let mut f = vec![nan3; nx * ny];
    let mut reach = vec![false; nx * ny];

    let run_x = |j: usize, f: &mut [Vec3], reach: &mut [bool], anchor_reach: bool| {
        let idx: Vec<usize> = (0..nx).map(|i| grid.flat(i, j)).collect();
        let g: Vec<Vec3> = idx.iter().map(|&k| fx[k]).collect();
        let v: Vec<bool> = idx.iter().map(|&k| valid[k]).collect();
        let mut line_f = vec![nan3; nx];
        let mut line_r = vec![false; nx];
        let anchor_val = if anchor_reach { f[idx[bi]] } else { nan3 };
        cumulative_line(&g, &v, bi, hx, anchor_val, anchor_reach, &mut line_f, &mut line_r);
        for (pos, &k) in idx.iter().enumerate() {
            f[k] = line_f[pos];
            reach[k] = line_r[pos];
        }
    };
    let run_y = |i: usize, f: &mut [Vec3], reach: &mut [bool], anchor_reach: bool| {
        let idx: Vec<usize> = (0..ny).map(|j| grid.flat(i, j)).collect();
        let g: Vec<Vec3> = idx.iter().map(|&k| fy[k]).collect();
        let v: Vec<bool> = idx.iter().map(|&k| valid[k]).collect();
        let mut line_f = vec![nan3; ny];
        let mut line_r = vec![false; ny];
        let anchor_val = if anchor_reach { f[idx[bj]] } else { nan3 };
        cumulative_line(&g, &v, bj, hy, anchor_val, anchor_reach, &mut line_f, &mut line_r);
        for (pos, &k) in idx.iter().enumerate() {
            f[k] = line_f[pos];
            reach[k] = line_r[pos];
        }
    };

    let base = grid.flat(bi, bj);
    f[base] = Vec3::zero();
    if row_first {
        run_x(bj, &mut f, &mut reach, valid[base]);
        for i in 0..nx {
            let anchored = reach[grid.flat(i, bj)];
            run_y(i, &mut f, &mut reach, anchored);
        }
    } else {
        run_y(bi, &mut f, &mut reach, valid[base]);
        for j in 0..ny {
            let anchored = reach[grid.flat(bi, j)];
            run_x(j, &mut f, &mut reach, anchored);
        }
    }
    (f, reach)
}

/// Full pipeline on a grid. Factorization failure at a node flags it
/// invalid and the run continues; integration failures abort.
pub fn run_pipeline(
    p: &Potential,
    grid: &DomainGrid,
    opts: &PipelineOptions,
) -> Result<SurfaceFields, DpwError> {
    let d = opts.degree.max(p.lambda_degree());
    let phis = integrate_phi(p, grid, d)?;
    let nodes: Vec<(usize, usize)> = grid.indices().collect();

    let outs: Vec<NodeOut> = (0..nodes.len())
        .into_par_iter()
        .map(|idx| {
            let (i, j) = nodes[idx];
            let z = grid.node_z(i, j);
            let b0c0 = p.lowest_pair_c64(z);
            match iwasawa_factor(&phis[idx], &opts.iwasawa) {
                Ok(fac) => {
                    let frame = fac.unitary_part.eval(C64::new(1.0, 0.0));
                    let normal = normal_of_frame(&frame);
                    let (normal_x, normal_y) =
                        normal_derivatives(&frame, fac.rho, b0c0.0, b0c0.1);
                    let fx = normal.cross(&normal_y);
                    let fy = normal_x.cross(&normal);
                    let mu = fx.cross(&fy).dot(&normal);
                    NodeOut {
                        valid: true,
                        frame,
                        normal,
                        normal_x,
                        normal_y,
                        rho: fac.rho,
                        b0c0,
                        mu,
                        fx,
                        fy,
                        recomposition_error: fac.diagnostics.recomposition_error,
                        unitarity_error: fac.diagnostics.unitarity_error,
                        det_error: fac.diagnostics.det_error,
                        iterations: fac.diagnostics.iterations,
                    }
                }
                Err(_) => NodeOut::invalid(b0c0),
            }
        })
        .collect();

    let frame_valid: Vec<bool> = outs.iter().map(|o| o.valid).collect();
    let fx: Vec<Vec3> = outs.iter().map(|o| o.fx).collect();
    let fy: Vec<Vec3> = outs.iter().map(|o| o.fy).collect();
    let (surface, reach) = integrate_surface(grid, &fx, &fy, &frame_valid, true);
    let (surface_alt, reach_alt) = integrate_surface(grid, &fx, &fy, &frame_valid, false);

    let mut diag = PipelineDiagnostics::default();
    for idx in 0..outs.len() {
        let o = &outs[idx];
        if !(o.valid && reach[idx]) {
            diag.invalid_nodes += 1;
            continue;
        }
        diag.max_recomposition_error = diag.max_recomposition_error.max(o.recomposition_error);
        diag.max_unitarity_error = diag.max_unitarity_error.max(o.unitarity_error);
        diag.max_det_error = diag.max_det_error.max(o.det_error);
        diag.max_frame_defect = diag.max_frame_defect.max(o.frame.unitarity_defect());
        diag.max_iterations = diag.max_iterations.max(o.iterations);
        diag.max_normal_defect = diag.max_normal_defect.max((o.normal.norm() - 1.0).abs());
        if reach_alt[idx] {
            diag.closedness_error = diag
                .closedness_error
                .max(surface[idx].sub(&surface_alt[idx]).norm());
        }
    }
    let base = grid.flat(grid.base_index().0, grid.base_index().1);
    diag.rho_at_base = outs[base].rho;

    Ok(SurfaceFields {
        grid: grid.clone(),
        valid: frame_valid
            .iter()
            .zip(&reach)
            .map(|(&a, &b)| a && b)
            .collect(),
        frame: outs.iter().map(|o| o.frame).collect(),
        normal: outs.iter().map(|o| o.normal).collect(),
        normal_x: outs.iter().map(|o| o.normal_x).collect(),
        normal_y: outs.iter().map(|o| o.normal_y).collect(),
        surface,
        fx,
        fy,
        rho: outs.iter().map(|o| o.rho).collect(),
        b0c0: outs.iter().map(|o| o.b0c0).collect(),
        mu: outs.iter().map(|o| o.mu).collect(),
        diagnostics: diag,
    })
}

// ---------------------------------------------------------------------------
// Field operators
// ---------------------------------------------------------------------------

/// Max over interior nodes of ‖N × ΔN‖ with the centered 5-point Laplacian.
/// A harmonic unit field makes this vanish to discretization order.
pub fn harmonicity_residual(fields: &SurfaceFields) -> f64 {
    let g = &fields.grid;
    let (hx2, hy2) = (
        g.spacing_x() * g.spacing_x(),
        g.spacing_y() * g.spacing_y(),
    );
    let mut worst: f64 = 0.0;
    for j in 1..g.ny() - 1 {
        for i in 1..g.nx() - 1 {
            let c = g.flat(i, j);
            let (l, r, dn, up) = (
                g.flat(i - 1, j),
                g.flat(i + 1, j),
                g.flat(i, j - 1),
                g.flat(i, j + 1),
            );
            if ![c, l, r, dn, up].iter().all(|&k| fields.valid[k]) {
                continue;
            }
            let n = &fields.normal;
            let lap_x = n[l].add(&n[r]).sub(&n[c].scale(2.0)).scale(1.0 / hx2);
            let lap_y = n[dn].add(&n[up]).sub(&n[c].scale(2.0)).scale(1.0 / hy2);
            let lap = lap_x.add(&lap_y);
            worst = worst.max(n[c].cross(&lap).norm());
        }
    }
    worst
}

/// Weights of the 4th-order centered first derivative over offsets −2..=2,
/// already divided by h.
fn d1_weights(h: f64) -> [f64; 5] {
    [1.0, -8.0, 0.0, 8.0, -1.0].map(|w| w / (12.0 * h))
}

/// Same for the second derivative.
fn d2_weights(h: f64) -> [f64; 5] {
    [-1.0, 16.0, -30.0, 16.0, -1.0].map(|w| w / (12.0 * h * h))
}

/// Gauss curvature per node from 4th-order finite-difference fundamental
/// forms of the integrated surface: K = det II / det I. Nodes closer than
/// two samples to the boundary, invalid neighborhoods, and nodes with
/// |μ| ≤ `mu_floor` yield None.
pub fn gauss_curvature(fields: &SurfaceFields, mu_floor: f64) -> Vec<Option<f64>> {
    let g = &fields.grid;
    let w1x = d1_weights(g.spacing_x());
    let w1y = d1_weights(g.spacing_y());
    let w2x = d2_weights(g.spacing_x());
    let w2y = d2_weights(g.spacing_y());
    let mut out = vec![None; g.n_nodes()];
    for j in 2..g.ny() - 2 {
        'node: for i in 2..g.nx() - 2 {
            let c = g.flat(i, j);
            if !fields.valid[c] || !(fields.mu[c].abs() > mu_floor) {
                continue;
            }
            for dj in 0..5 {
                for di in 0..5 {
                    if !fields.valid[g.flat(i + di - 2, j + dj - 2)] {
                        continue 'node;
                    }
                }
            }
            let sample = |di: i64, dj: i64| -> Vec3 {
                fields.surface[g.flat((i as i64 + di) as usize, (j as i64 + dj) as usize)]
            };
            let stencil_x = |w: &[f64; 5]| -> Vec3 {
                let mut acc = Vec3::zero();
                for (k, &wk) in w.iter().enumerate() {
                    if wk != 0.0 {
                        acc = acc.add(&sample(k as i64 - 2, 0).scale(wk));
                    }
                }
                acc
            };
            let stencil_y = |w: &[f64; 5]| -> Vec3 {
                let mut acc = Vec3::zero();
                for (k, &wk) in w.iter().enumerate() {
                    if wk != 0.0 {
                        acc = acc.add(&sample(0, k as i64 - 2).scale(wk));
                    }
                }
                acc
            };
            let f_x = stencil_x(&w1x);
            let f_y = stencil_y(&w1y);
            let f_xx = stencil_x(&w2x);
            let f_yy = stencil_y(&w2y);
            let mut f_xy = Vec3::zero();
            for (ky, &wy) in w1y.iter().enumerate() {
                if wy == 0.0 {
                    continue;
                }
                for (kx, &wx) in w1x.iter().enumerate() {
                    if wx == 0.0 {
                        continue;
                    }
                    f_xy = f_xy.add(&sample(kx as i64 - 2, ky as i64 - 2).scale(wx * wy));
                }
            }
            let n = &fields.normal[c];
            let (e, ff, gg) = (f_x.dot(&f_x), f_x.dot(&f_y), f_y.dot(&f_y));
            let (l, m, nn) = (f_xx.dot(n), f_xy.dot(n), f_yy.dot(n));
            let det_i = e * gg - ff * ff;
            if det_i.abs() < 1e-30 {
                continue;
            }
            out[c] = Some((l * nn - m * m) / det_i);
        }
    }
    out
}

/// A parallel surface at unit-normal offset δ = ±1.
#[derive(Clone, Debug)]
pub struct CmcCompanion {
    pub delta: f64,
    /// g = f + δN per node.
    pub g: Vec<Vec3>,
    /// Smallest finite-difference area density ‖g_x × g_y‖ over usable
    /// interior nodes, for the chosen δ.
    pub min_density: f64,
}

/// Offset the surface by ±N, choosing the sign whose area density stays
/// farthest from zero. Errors when both offsets degenerate (density below
/// 1e−6) on more than 10% of usable interior nodes.
pub fn cmc_companion(fields: &SurfaceFields) -> Result<CmcCompanion, DpwError> {
    let g = &fields.grid;
    let mut best: Option<CmcCompanion> = None;
    let mut both_degenerate = true;
    for delta in [1.0, -1.0] {
        let pts: Vec<Vec3> = fields
            .surface
            .iter()
            .zip(&fields.normal)
            .map(|(f, n)| f.add(&n.scale(delta)))
            .collect();
        let mut min_density = f64::INFINITY;
        let mut eligible = 0usize;
        let mut degenerate = 0usize;
        for j in 1..g.ny() - 1 {
            for i in 1..g.nx() - 1 {
                let c = g.flat(i, j);
                let (l, r, dn, up) = (
                    g.flat(i - 1, j),
                    g.flat(i + 1, j),
                    g.flat(i, j - 1),
                    g.flat(i, j + 1),
                );
                if ![c, l, r, dn, up].iter().all(|&k| fields.valid[k]) {
                    continue;
                }
                let gx = pts[r].sub(&pts[l]).scale(0.5 / g.spacing_x());
                let gy = pts[up].sub(&pts[dn]).scale(0.5 / g.spacing_y());
                let density = gx.cross(&gy).norm();
                eligible += 1;
                if density < 1e-6 {
                    degenerate += 1;
                }
                min_density = min_density.min(density);
            }
        }
        if eligible == 0 {
            continue;
        }
        if degenerate * 10 <= eligible {
            both_degenerate = false;
        }
        let candidate = CmcCompanion {
            delta,
            g: pts,
            min_density,
        };
        let better = match &best {
            None => true,
            Some(b) => candidate.min_density > b.min_density,
        };
        if better {
            best = Some(candidate);
        }
    }
    match best {
        Some(b) if !both_degenerate => Ok(b),
        _ => Err(DpwError::CompanionDegenerate),
    }
}

/// Immersion rank classification at the base point, decided exactly from
/// the lowest-grade pair: both zero → rank 0; equal squared moduli →
/// rank ≤ 1; otherwise full rank.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RankVerdict {
    Rank2,
    RankAtMost1,
    Rank0,
}

pub fn rank_at_basepoint(p: &Potential) -> RankVerdict {
    let (b0, c0) = p.lowest_order_pair(&p.base_point);
    if b0.is_zero() && c0.is_zero() {
        RankVerdict::Rank0
    } else if b0.norm_sq() == c0.norm_sq() {
        RankVerdict::RankAtMost1
    } else {
        RankVerdict::Rank2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, CRat, Poly1};
    use crate::potential::{
        add_perturbation, potential_from_cauchy_data, CauchyData,
    };

    fn real_poly(cs: &[i64]) -> crate::potential::HoloPoly {
        Poly1::new(cs.iter().map(|&c| CRat::from_i64(c, 0)).collect())
    }

    fn unit_speed_potential() -> Potential {
        // b = 1, kappa_g(x) = x.
        potential_from_cauchy_data(
            &CauchyData::new(real_poly(&[1]), real_poly(&[0, 1])).unwrap(),
        )
    }

    #[test]
    fn zero_potential_integrates_to_identity() {
        let grid = DomainGrid::square_centered(rat(1, 2), 5).unwrap();
        let phis = integrate_phi(&Potential::zero(), &grid, 2).unwrap();
        for phi in &phis {
            assert_eq!(phi.sub(&LaurentLoop::identity(2)).max_coeff_norm(), 0.0);
        }
    }

    #[test]
    fn zero_potential_pipeline_is_constant_north_pole() {
        let grid = DomainGrid::square_centered(rat(1, 2), 5).unwrap();
        let fields =
            run_pipeline(&Potential::zero(), &grid, &PipelineOptions::default()).unwrap();
        for idx in 0..grid.n_nodes() {
            assert!(fields.valid[idx]);
            assert!(fields.normal[idx].sub(&Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-12);
            assert!(fields.surface[idx].norm() < 1e-12);
            assert!((fields.rho[idx] - 1.0).abs() < 1e-12);
        }
        assert_eq!(fields.diagnostics.invalid_nodes, 0);
        assert!((fields.diagnostics.rho_at_base - 1.0).abs() < 1e-12);
    }

    #[test]
    fn base_node_frame_is_identity_and_rho_one() {
        let grid = DomainGrid::square_centered(rat(1, 4), 9).unwrap();
        let p = unit_speed_potential();
        let fields = run_pipeline(&p, &grid, &PipelineOptions::default()).unwrap();
        let base = fields.at(4, 4);
        assert!(fields.frame[base].sub(&CMat2::identity()).max_abs() < 1e-10);
        assert!(fields.normal[base].sub(&Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-10);
        assert!((fields.diagnostics.rho_at_base - 1.0).abs() < 1e-10);
        assert!(fields.diagnostics.max_normal_defect < 1e-9);
        assert!(fields.diagnostics.max_frame_defect < 1e-8);
    }

    #[test]
    fn base_point_mismatch_is_rejected() {
        let grid = DomainGrid::square_centered(rat(1, 2), 5).unwrap();
        let p = unit_speed_potential().with_base_point(CRat::new(rat(1, 7), rat(0, 1)));
        assert!(matches!(
            integrate_phi(&p, &grid, 4),
            Err(DpwError::BasePointMismatch)
        ));
    }

    #[test]
    fn rank_verdicts_from_lowest_pair() {
        // Constant pair (2, 1): moduli differ → immersed.
        let mut p = Potential::zero();
        p.b.insert(0, real_poly(&[2]));
        p.c.insert(0, real_poly(&[1]));
        assert_eq!(rank_at_basepoint(&p), RankVerdict::Rank2);

        // Perturbed unit-speed potential at s = 0: pair (−1−i, 1+i) has
        // equal moduli → degenerate.
        let q = add_perturbation(&unit_speed_potential(), &rat(0, 1));
        assert_eq!(rank_at_basepoint(&q), RankVerdict::RankAtMost1);
        // s = 1/2 breaks the tie.
        let q2 = add_perturbation(&unit_speed_potential(), &rat(1, 2));
        assert_eq!(rank_at_basepoint(&q2), RankVerdict::Rank2);

        assert_eq!(rank_at_basepoint(&Potential::zero()), RankVerdict::Rank0);
    }

    #[test]
    fn synthetic_nonharmonic_field_has_residual_bounded_below() {
        // N = normalize(x, y, 1) is not harmonic into the sphere.
        for n in [17usize, 33] {
            let grid = DomainGrid::square_centered(rat(1, 2), n).unwrap();
            let zero = Potential::zero();
            let mut fields = run_pipeline(&zero, &grid, &PipelineOptions::default()).unwrap();
            for (i, j) in grid.indices() {
                let z = grid.node_z(i, j);
                let v = Vec3::new(z.re, z.im, 1.0).normalize().unwrap();
                let idx = grid.flat(i, j);
                fields.normal[idx] = v;
            }
            let res = harmonicity_residual(&fields);
            assert!(res > 0.1, "residual {res} should not vanish under refinement");
        }
    }

    #[test]
    fn planar_negative_control_has_zero_curvature() {
        // f = (x, y, 0), N = (0, 0, 1): flat.
        let grid = DomainGrid::square_centered(rat(1, 2), 11).unwrap();
        let zero = Potential::zero();
        let mut fields = run_pipeline(&zero, &grid, &PipelineOptions::default()).unwrap();
        for (i, j) in grid.indices() {
            let z = grid.node_z(i, j);
            let idx = grid.flat(i, j);
            fields.surface[idx] = Vec3::new(z.re, z.im, 0.0);
            fields.normal[idx] = Vec3::new(0.0, 0.0, 1.0);
            fields.mu[idx] = 1.0;
        }
        let ks = gauss_curvature(&fields, 0.5);
        let mut seen = 0;
        for k in ks.into_iter().flatten() {
            assert!(k.abs() < 1e-10);
            seen += 1;
        }
        assert!(seen > 0);
    }
}
