//! Zero-contour extraction on rectangular grids.
//!
//! Builds a graph of the zero set of a scalar node field by marching
//! squares, with three refinements the downstream topology checks rely on:
//!
//! * near-zero node values are snapped to exact zero, so contours that run
//!   through grid nodes (an axis lying inside the zero set, a crossing at a
//!   node) are represented exactly rather than as pairs of nearby crossings;
//! * every vertex has an integer key — node, edge midpoint slot, or cell
//!   center — so coincident vertices produced by adjacent cells unify without
//!   floating-point quantization;
//! * ambiguous saddle cells are resolved by the bilinear center value, and a
//!   center value itself within tolerance of zero becomes an explicit
//!   degree-4 crossing vertex.
//!
//! The resulting [`ContourGraph`] reports connected components, crossing
//! vertices (degree ≥ 4), isolated zero nodes, and maximal polylines, and
//! supports the disk-restricted pairing query used by bifurcation sweeps.

use crate::grid::DomainGrid;
use std::collections::BTreeMap;

/// Tolerances for contour extraction.
#[derive(Clone, Copy, Debug)]
pub struct ContourOptions {
    /// Node values with |v| < tol_snap·max|v| are treated as exactly zero.
    pub tol_snap: f64,
    /// Saddle-cell center values with |v| < tol_center·max|v| become
    /// explicit crossing vertices instead of picking a diagonal pairing.
    pub tol_center: f64,
}

impl Default for ContourOptions {
    fn default() -> Self {
        ContourOptions {
            tol_snap: 1e-6,
            tol_center: 1e-6,
        }
    }
}

/// A contour vertex with its integer identity key and domain position.
///
/// Keys double node indices: nodes sit at (2i, 2j), interior points of
/// horizontal edges at (2i+1, 2j), of vertical edges at (2i, 2j+1), and cell
/// centers at (2i+1, 2j+1).
#[derive(Clone, Copy, Debug)]
pub struct ContourVertex {
    pub key: (i64, i64),
    pub x: f64,
    pub y: f64,
}

/// Undirected graph of the extracted zero set.
#[derive(Clone, Debug)]
pub struct ContourGraph {
    pub vertices: Vec<ContourVertex>,
    /// Deduplicated undirected edges as sorted vertex-index pairs.
    pub edges: Vec<(usize, usize)>,
    /// Number of connected components (isolated vertices count).
    pub components: usize,
    /// Vertex indices of degree ≥ 4 (transverse self-crossings).
    pub crossings: Vec<usize>,
    /// Vertex indices of degree 0 (isolated zero nodes).
    pub isolated: Vec<usize>,
    /// Cells not processed because a corner was invalid.
    pub skipped_cells: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum NodeSign {
    Neg,
    Zero,
    Pos,
}

struct Builder<'g> {
    grid: &'g DomainGrid,
    values: &'g [f64],
    keys: BTreeMap<(i64, i64), usize>,
    vertices: Vec<ContourVertex>,
    edges: Vec<(usize, usize)>,
}

impl<'g> Builder<'g> {
    fn vertex(&mut self, key: (i64, i64), x: f64, y: f64) -> usize {
        if let Some(&id) = self.keys.get(&key) {
            return id;
        }
        let id = self.vertices.len();
        self.vertices.push(ContourVertex { key, x, y });
        self.keys.insert(key, id);
        id
    }

    fn node_vertex(&mut self, i: usize, j: usize) -> usize {
        let x = self.grid.node_z(i, j).re;
        let y = self.grid.node_z(i, j).im;
        self.vertex((2 * i as i64, 2 * j as i64), x, y)
    }

    /// Crossing vertex on the edge from node (i0,j0) to node (i1,j1), where
    /// the two signed values differ. A zero endpoint yields that node itself.
    fn edge_vertex(&mut self, n0: (usize, usize), n1: (usize, usize)) -> usize {
        let v0 = self.values[self.grid.flat(n0.0, n0.1)];
        let v1 = self.values[self.grid.flat(n1.0, n1.1)];
        if v0 == 0.0 {
            return self.node_vertex(n0.0, n0.1);
        }
        if v1 == 0.0 {
            return self.node_vertex(n1.0, n1.1);
        }
        let t = v0 / (v0 - v1);
        let z0 = self.grid.node_z(n0.0, n0.1);
        let z1 = self.grid.node_z(n1.0, n1.1);
        let key = (
            (n0.0 as i64) + (n1.0 as i64),
            (n0.1 as i64) + (n1.1 as i64),
        );
        let x = z0.re + t * (z1.re - z0.re);
        let y = z0.im + t * (z1.im - z0.im);
        self.vertex(key, x, y)
    }

    fn link(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let e = if a < b { (a, b) } else { (b, a) };
        self.edges.push(e);
    }
}

/// Extract the zero contour of `values` (one value per grid node, indexed by
/// [`DomainGrid::flat`]) over the valid region.
pub fn extract_zero_contour(
    grid: &DomainGrid,
    values: &[f64],
    valid: &[bool],
    opts: &ContourOptions,
) -> ContourGraph {
    assert_eq!(values.len(), grid.n_nodes());
    assert_eq!(valid.len(), grid.n_nodes());
    let scale = values
        .iter()
        .zip(valid)
        .filter(|(v, &ok)| ok && v.is_finite())
        .fold(0.0f64, |m, (v, _)| m.max(v.abs()));
    // Snap and classify nodes.
    let mut snapped = vec![0.0f64; values.len()];
    let mut sign = vec![NodeSign::Pos; values.len()];
    for idx in 0..values.len() {
        let v = values[idx];
        if !valid[idx] || !v.is_finite() {
            continue;
        }
        let s = if scale > 0.0 && v.abs() < opts.tol_snap * scale {
            0.0
        } else {
            v
        };
        snapped[idx] = s;
        sign[idx] = if s == 0.0 {
            NodeSign::Zero
        } else if s < 0.0 {
            NodeSign::Neg
        } else {
            NodeSign::Pos
        };
    }

    let mut b = Builder {
        grid,
        values: &snapped,
        keys: BTreeMap::new(),
        vertices: Vec::new(),
        edges: Vec::new(),
    };

    let nx = grid.nx();
    let ny = grid.ny();
    let at = |i: usize, j: usize| grid.flat(i, j);

    // Zero nodes become vertices outright so isolated zeros are visible, and
    // zero-edges (two adjacent zero nodes) join them directly.
    for j in 0..ny {
        for i in 0..nx {
            if valid[at(i, j)] && sign[at(i, j)] == NodeSign::Zero {
                b.node_vertex(i, j);
                if i + 1 < nx && valid[at(i + 1, j)] && sign[at(i + 1, j)] == NodeSign::Zero {
                    let v0 = b.node_vertex(i, j);
                    let v1 = b.node_vertex(i + 1, j);
                    b.link(v0, v1);
                }
                if j + 1 < ny && valid[at(i, j + 1)] && sign[at(i, j + 1)] == NodeSign::Zero {
                    let v0 = b.node_vertex(i, j);
                    let v1 = b.node_vertex(i, j + 1);
                    b.link(v0, v1);
                }
            }
        }
    }

    // Marching squares with zero counted as positive, so a crossing on an
    // edge with a zero corner lands exactly on that corner's node vertex.
    let mut skipped_cells = 0usize;
    let plus = |s: NodeSign| s != NodeSign::Neg;
    for j in 0..ny.saturating_sub(1) {
        for i in 0..nx.saturating_sub(1) {
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            if corners.iter().any(|&(a, c)| !valid[at(a, c)]) {
                skipped_cells += 1;
                continue;
            }
            let s: Vec<bool> = corners.iter().map(|&(a, c)| plus(sign[at(a, c)])).collect();
            // Cell edges in order: bottom, right, top, left.
            let cell_edges = [
                (corners[0], corners[1]),
                (corners[1], corners[2]),
                (corners[3], corners[2]),
                (corners[0], corners[3]),
            ];
            let crossing: Vec<usize> = (0..4)
                .filter(|&e| {
                    let (n0, n1) = cell_edges[e];
                    plus(sign[at(n0.0, n0.1)]) != plus(sign[at(n1.0, n1.1)])
                })
                .collect();
            match crossing.len() {
                0 => {}
                2 => {
                    let va = b.edge_vertex(cell_edges[crossing[0]].0, cell_edges[crossing[0]].1);
                    let vb = b.edge_vertex(cell_edges[crossing[1]].0, cell_edges[crossing[1]].1);
                    b.link(va, vb);
                }
                4 => {
                    // Saddle: corners alternate. Use the bilinear center value.
                    let vals: Vec<f64> =
                        corners.iter().map(|&(a, c)| snapped[at(a, c)]).collect();
                    let center = 0.25 * (vals[0] + vals[1] + vals[2] + vals[3]);
                    let pts: Vec<usize> = (0..4)
                        .map(|e| b.edge_vertex(cell_edges[e].0, cell_edges[e].1))
                        .collect();
                    if scale > 0.0 && center.abs() < opts.tol_center * scale {
                        // Treat as an exact crossing through the cell center.
                        let z0 = grid.node_z(i, j);
                        let z1 = grid.node_z(i + 1, j + 1);
                        let cid = b.vertex(
                            (2 * i as i64 + 1, 2 * j as i64 + 1),
                            0.5 * (z0.re + z1.re),
                            0.5 * (z0.im + z1.im),
                        );
                        for &p in &pts {
                            b.link(cid, p);
                        }
                    } else if (center > 0.0) == s[0] {
                        // Center joins the corner-0/corner-2 diagonal region,
                        // so one arc cuts off corner 1 (bottom+right edges)
                        // and the other cuts off corner 3 (top+left edges).
                        b.link(pts[0], pts[1]);
                        b.link(pts[2], pts[3]);
                    } else {
                        b.link(pts[0], pts[3]);
                        b.link(pts[1], pts[2]);
                    }
                }
                _ => {
                    // Odd counts cannot occur for a two-coloring of a cycle.
                    unreachable!("marching squares cell with odd crossing count")
                }
            }
        }
    }

    // Dedupe edges.
    b.edges.sort_unstable();
    b.edges.dedup();

    let n = b.vertices.len();
    let mut degree = vec![0usize; n];
    for &(u, v) in &b.edges {
        degree[u] += 1;
        degree[v] += 1;
    }
    // Union-find for components.
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(u, v) in &b.edges {
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        if ru != rv {
            parent[ru] = rv;
        }
    }
    let mut roots: Vec<usize> = (0..n).map(|x| find(&mut parent, x)).collect();
    roots.sort_unstable();
    roots.dedup();

    ContourGraph {
        components: roots.len(),
        crossings: (0..n).filter(|&v| degree[v] >= 4).collect(),
        isolated: (0..n).filter(|&v| degree[v] == 0).collect(),
        vertices: b.vertices,
        edges: b.edges,
        skipped_cells,
    }
}

impl ContourGraph {
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    /// Vertex degrees.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0usize; self.vertices.len()];
        for &(u, v) in &self.edges {
            d[u] += 1;
            d[v] += 1;
        }
        d
    }

    /// Maximal polylines: walks that start and end at vertices of degree ≠ 2
    /// (or close a cycle), listed as vertex-index chains. Every edge appears
    /// in exactly one polyline.
    pub fn polylines(&self) -> Vec<Vec<usize>> {
        let adj = self.adjacency();
        let degree: Vec<usize> = adj.iter().map(|a| a.len()).collect();
        let mut remaining: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for &(u, v) in &self.edges {
            *remaining.entry((u, v)).or_insert(0) += 1;
        }
        let take = |rem: &mut BTreeMap<(usize, usize), usize>, u: usize, v: usize| -> bool {
            let key = (u.min(v), u.max(v));
            match rem.get_mut(&key) {
                Some(c) if *c > 0 => {
                    *c -= 1;
                    true
                }
                _ => false,
            }
        };
        let mut out = Vec::new();
        // First pass: start walks at non-degree-2 vertices.
        for start in 0..self.vertices.len() {
            if degree[start] == 2 {
                continue;
            }
            for &first in &adj[start] {
                if !take(&mut remaining, start, first) {
                    continue;
                }
                let mut line = vec![start, first];
                let mut prev = start;
                let mut cur = first;
                while degree[cur] == 2 {
                    let next = adj[cur].iter().copied().find(|&n| n != prev).unwrap_or(prev);
                    if !take(&mut remaining, cur, next) {
                        break;
                    }
                    line.push(next);
                    prev = cur;
                    cur = next;
                }
                out.push(line);
            }
        }
        // Second pass: leftover pure cycles.
        let keys: Vec<(usize, usize)> = remaining
            .iter()
            .filter(|(_, &c)| c > 0)
            .map(|(&k, _)| k)
            .collect();
        for (u0, v0) in keys {
            if !take(&mut remaining, u0, v0) {
                continue;
            }
            let mut line = vec![u0, v0];
            let mut prev = u0;
            let mut cur = v0;
            while cur != u0 {
                let next = adj[cur].iter().copied().find(|&n| n != prev).unwrap_or(prev);
                if !take(&mut remaining, cur, next) {
                    break;
                }
                line.push(next);
                prev = cur;
                cur = next;
            }
            out.push(line);
        }
        out
    }

    /// Pairing of boundary exits of the subgraph inside a disk.
    ///
    /// Exits are in-disk vertices adjacent to out-of-disk vertices, sorted by
    /// angle around the center; the result pairs exit positions that are
    /// connected to each other through the disk interior, as index pairs into
    /// the returned exit list.
    pub fn disk_pairing(&self, cx: f64, cy: f64, radius: f64) -> DiskPairing {
        let inside: Vec<bool> = self
            .vertices
            .iter()
            .map(|v| {
                let (dx, dy) = (v.x - cx, v.y - cy);
                dx * dx + dy * dy <= radius * radius
            })
            .collect();
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut exit_set: Vec<usize> = Vec::new();
        let mut degree_in = vec![0usize; n];
        for &(u, v) in &self.edges {
            match (inside[u], inside[v]) {
                (true, true) => {
                    degree_in[u] += 1;
                    degree_in[v] += 1;
                    let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
                    if ru != rv {
                        parent[ru] = rv;
                    }
                }
                (true, false) => exit_set.push(u),
                (false, true) => exit_set.push(v),
                (false, false) => {}
            }
        }
        exit_set.sort_unstable();
        exit_set.dedup();
        let mut exits: Vec<(f64, usize)> = exit_set
            .iter()
            .map(|&v| {
                let a = (self.vertices[v].y - cy).atan2(self.vertices[v].x - cx);
                (a, v)
            })
            .collect();
        exits.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut pairs = Vec::new();
        for i in 0..exits.len() {
            for j in (i + 1)..exits.len() {
                if find(&mut parent, exits[i].1) == find(&mut parent, exits[j].1) {
                    pairs.push((i, j));
                }
            }
        }
        let crossings_inside = (0..n)
            .filter(|&v| inside[v] && degree_in[v] >= 4)
            .count();
        let mut comp_roots: Vec<usize> = (0..n)
            .filter(|&v| inside[v] && (degree_in[v] > 0 || self.degrees()[v] == 0))
            .map(|v| find(&mut parent, v))
            .collect();
        comp_roots.sort_unstable();
        comp_roots.dedup();
        DiskPairing {
            exits: exits.iter().map(|&(_, v)| v).collect(),
            pairs,
            components_inside: comp_roots.len(),
            crossings_inside,
        }
    }

    /// One-sided vertex distance: max over this graph's vertices of the
    /// distance to the nearest vertex of `other`. Infinite when `other` is
    /// empty but this graph is not.
    pub fn max_min_vertex_distance(&self, other: &ContourGraph) -> f64 {
        if self.vertices.is_empty() {
            return 0.0;
        }
        if other.vertices.is_empty() {
            return f64::INFINITY;
        }
        self.vertices
            .iter()
            .map(|v| {
                other
                    .vertices
                    .iter()
                    .map(|w| ((v.x - w.x).powi(2) + (v.y - w.y).powi(2)).sqrt())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }
}

/// Result of [`ContourGraph::disk_pairing`].
#[derive(Clone, Debug)]
pub struct DiskPairing {
    /// Exit vertex ids in angular order around the disk center.
    pub exits: Vec<usize>,
    /// Pairs (i, j) of exit list indices connected through the disk.
    pub pairs: Vec<(usize, usize)>,
    pub components_inside: usize,
    pub crossings_inside: usize,
}
