//! Constant-curvature surfaces and their harmonic Gauss maps from
//! loop-group potentials, plus exact-arithmetic singularity tooling.
//!
//! The library has three layers:
//!
//! * numeric pipeline — [`loops`] (truncated matrix Laurent series and their
//!   unitary/plus factorization), [`potential`] (graded holomorphic
//!   potentials), [`dpw`] (ODE integration, per-node factorization, frames,
//!   Gauss map, surface assembly, curvature and companion checks);
//! * analysis — [`contour`] (zero-set extraction), [`singular`] (singular-set
//!   classification, exact and field-based), [`versality`] (exact unfolding
//!   checks for distance-squared families), [`germ`] (exact classification of
//!   planar harmonic map-germs);
//! * orchestration — [`runner`] (configs, sweeps, reports, meshes) consumed
//!   by the thin CLI and by the runnable examples.
//!
//! Each major capability has a runnable example under `examples/`:
//!
//! ```text
//! cargo run --example build_surface        # potential -> OBJ mesh + report
//! cargo run --example butterfly_sweep      # three-frame bifurcation sweep
//! cargo run --example beaks_sweep          # topology transition sweep
//! cargo run --example iwasawa_demo         # factor one loop, print diagnostics
//! cargo run --example curve_profiles       # fold/collapse verdicts for curve data
//! cargo run --example check_versality      # exact unfolding checks
//! cargo run --example classify_germs       # map-germ golden table
//! ```

pub mod contour;
pub mod dpw;
pub mod exact;
pub mod germ;
pub mod grid;
pub mod loops;
pub mod mat2;
pub mod mesh;
pub mod potential;
pub mod runner;
pub mod singular;
pub mod su2;
pub mod versality;
