//! Oracle tests for zero-contour extraction on synthetic node fields whose
//! zero sets are known in closed form.

use sphereforge::contour::{extract_zero_contour, ContourOptions};
use sphereforge::exact::rat;
use sphereforge::grid::DomainGrid;

fn field(grid: &DomainGrid, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let mut v = vec![0.0; grid.n_nodes()];
    for (i, j) in grid.indices() {
        let z = grid.node_z(i, j);
        v[grid.flat(i, j)] = f(z.re, z.im);
    }
    v
}

fn grid21() -> DomainGrid {
    DomainGrid::square_centered(rat(1, 2), 21).unwrap()
}

#[test]
fn horizontal_line_through_nodes_is_one_component() {
    let g = grid21();
    let v = field(&g, |_, y| y);
    let valid = vec![true; g.n_nodes()];
    let c = extract_zero_contour(&g, &v, &valid, &ContourOptions::default());
    assert_eq!(c.components, 1);
    assert!(c.crossings.is_empty());
    assert!(c.isolated.is_empty());
    // Every vertex lies on y = 0 and the chain spans the full width.
    for vtx in &c.vertices {
        assert_eq!(vtx.y, 0.0);
    }
    assert_eq!(c.vertices.len(), g.nx());
    let lines = c.polylines();
    assert_eq!(lines.len(), 1);
    assert_eq!(lines[0].len(), g.nx());
}

#[test]
fn offset_line_between_nodes_is_one_component() {
    let g = grid21();
    let h = g.spacing_y();
    let v = field(&g, |_, y| y - 0.37 * h);
    let valid = vec![true; g.n_nodes()];
    let c = extract_zero_contour(&g, &v, &valid, &ContourOptions::default());
    assert_eq!(c.components, 1);
    assert!(c.crossings.is_empty());
    for vtx in &c.vertices {
        assert!((vtx.y - 0.37 * h).abs() < 1e-12);
    }
}

#[test]
fn circle_is_single_closed_cycle() {
    let g = grid21();
    let v = field(&g, |x, y| x * x + y * y - 0.09);
    let valid = vec![true; g.n_nodes()];
    let c = extract_zero_contour(&g, &v, &valid, &ContourOptions::default());
    assert_eq!(c.components, 1);
    assert!(c.crossings.is_empty());
    let lines = c.polylines();
    assert_eq!(lines.len(), 1);
    let line = &lines[0];
    assert_eq!(line.first(), line.last(), "circle contour must close up");
    // All vertices near radius 0.3 (within one cell diagonal).
    let cell = (g.spacing_x().powi(2) + g.spacing_y().powi(2)).sqrt();
    for &id in line {
        let vt = &c.vertices[id];
        let r = (vt.x * vt.x + vt.y * vt.y).sqrt();
        assert!((r - 0.3).abs() < cell, "vertex radius {r} too far from 0.3");
    }
}

#[test]
fn node_saddle_has_degree_four_crossing() {
    let g = grid21();
    let v = field(&g, |x, y| x * y);
    let valid = vec![true; g.n_nodes()];
    let c = extract_zero_contour(&g, &v, &valid, &ContourOptions::default());
    assert_eq!(c.components, 1);
    assert_eq!(c.crossings.len(), 1);
    let cr = &c.vertices[c.crossings[0]];
    assert_eq!((cr.x, cr.y), (0.0, 0.0));
}

#[test]
fn diagonal_saddle_crossing_found_between_nodes() {
    // Shift so the saddle point (0.5h, 0.5h) sits at a cell center.
    let g = grid21();
    let hx = g.spacing_x();
    let hy = g.spacing_y();
    let v = field(&g, |x, y| (x - 0.5 * hx) * (y - 0.5 * hy));
    let valid = vec![true; g.n_nodes()];
    let c = extract_zero_contour(&g, &v, &valid, &ContourOptions::default());
    assert_eq!(c.components, 1);
    assert_eq!(c.crossings.len(), 1, "cell-center saddle must be a crossing");
}

#[test]
fn sign_definite_field_has_empty_contour() {
    let g = grid21();
    let v = field(&g, |x, _| 1.0 + x * x);
    let valid = vec![true; g.n_nodes()];
    let c = extract_zero_contour(&g, &v, &valid, &ContourOptions::default());
    assert_eq!(c.components, 0);
    assert!(c.vertices.is_empty());
}

#[test]
fn isolated_node_zero_is_reported() {
    let g = grid21();
    let v = field(&g, |x, y| x * x + y * y);
    let valid = vec![true; g.n_nodes()];
    let c = extract_zero_contour(&g, &v, &valid, &ContourOptions::default());
    assert_eq!(c.components, 1);
    assert_eq!(c.isolated.len(), 1);
    let iso = &c.vertices[c.isolated[0]];
    assert_eq!((iso.x, iso.y), (0.0, 0.0));
}

#[test]
fn invalid_corners_skip_cells() {
    let g = grid21();
    let v = field(&g, |_, y| y);
    let mut valid = vec![true; g.n_nodes()];
    for i in 0..5 {
        valid[g.flat(i, 10)] = false;
    }
    let c = extract_zero_contour(&g, &v, &valid, &ContourOptions::default());
    assert!(c.skipped_cells > 0);
    // The surviving contour still lies on y = 0.
    for vtx in &c.vertices {
        assert_eq!(vtx.y, 0.0);
    }
}

#[test]
fn morse_family_disk_pairing_transition() {
    // v_s = x² − y² + s: two vertical-opening branches for s > 0, a crossing
    // at s = 0, two horizontal-opening branches for s < 0. The disk pairing
    // of the four exits must switch between adjacent pairings across s = 0.
    let g = grid21();
    let valid = vec![true; g.n_nodes()];
    let run = |s: f64| {
        let v = field(&g, |x, y| x * x - y * y + s);
        extract_zero_contour(&g, &v, &valid, &ContourOptions::default())
    };

    let minus = run(-0.08);
    let zero = run(0.0);
    let plus = run(0.08);

    let pm = minus.disk_pairing(0.0, 0.0, 0.4);
    let p0 = zero.disk_pairing(0.0, 0.0, 0.4);
    let pp = plus.disk_pairing(0.0, 0.0, 0.4);

    assert_eq!(pm.exits.len(), 4);
    assert_eq!(pp.exits.len(), 4);
    assert_eq!(pm.pairs.len(), 2);
    assert_eq!(pp.pairs.len(), 2);
    assert_ne!(pm.pairs, pp.pairs, "pairing must switch across the transition");
    assert_eq!(pm.crossings_inside, 0);
    assert_eq!(pp.crossings_inside, 0);
    assert!(p0.crossings_inside >= 1, "s=0 frame must contain a crossing");
    assert_eq!(p0.components_inside, 1);
}

#[test]
fn extraction_is_deterministic() {
    let g = grid21();
    let v = field(&g, |x, y| (x - 0.1) * (y + 0.2) + 0.01);
    let valid = vec![true; g.n_nodes()];
    let a = extract_zero_contour(&g, &v, &valid, &ContourOptions::default());
    let b = extract_zero_contour(&g, &v, &valid, &ContourOptions::default());
    assert_eq!(a.edges, b.edges);
    let ka: Vec<_> = a.vertices.iter().map(|v| v.key).collect();
    let kb: Vec<_> = b.vertices.iter().map(|v| v.key).collect();
    assert_eq!(ka, kb);
}

#[test]
fn nearby_fields_have_nearby_contours() {
    let g = grid21();
    let valid = vec![true; g.n_nodes()];
    let a = extract_zero_contour(
        &g,
        &field(&g, |_, y| y - 0.013),
        &valid,
        &ContourOptions::default(),
    );
    let b = extract_zero_contour(
        &g,
        &field(&g, |_, y| y - 0.017),
        &valid,
        &ContourOptions::default(),
    );
    let d = a.max_min_vertex_distance(&b).max(b.max_min_vertex_distance(&a));
    let cell = (g.spacing_x().powi(2) + g.spacing_y().powi(2)).sqrt();
    assert!(d <= cell, "contours of nearby fields must stay within one cell");
}
