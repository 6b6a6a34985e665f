//! Rectangular sample grids with exact rational geometry.
//!
//! Bounds and spacings are rationals so that node coordinates — in
//! particular the integration base point — are exact, letting the exact
//! classifiers and the floating-point pipeline agree on where nodes sit.

use crate::exact::{CRat, OrderedField, Rat};
use crate::mat2::C64;
use serde_json::Value;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq)]
pub struct DomainGrid {
    x_min: Rat,
    x_max: Rat,
    y_min: Rat,
    y_max: Rat,
    nx: usize,
    ny: usize,
    base_i: usize,
    base_j: usize,
}

#[derive(Error, Debug, Clone)]
pub enum GridError {
    #[error("grid needs at least 3 samples per axis, got {nx}×{ny}")]
    TooFewSamples { nx: usize, ny: usize },
    #[error("grid range is empty or reversed")]
    EmptyRange,
    #[error("base point is not a grid node")]
    BaseOffGrid,
    #[error("malformed grid specification: {0}")]
    Schema(String),
}

fn node_index_of(value: &Rat, min: &Rat, spacing: &Rat, count: usize) -> Option<usize> {
    let t = (value - min) / spacing;
    if !t.is_integer() {
        return None;
    }
    let idx = num::ToPrimitive::to_usize(&t.to_integer())?;
    (idx < count).then_some(idx)
}

impl DomainGrid {
    /// Rectangle [x_min, x_max] × [y_min, y_max] sampled on an nx × ny
    /// lattice; `base_point` must land exactly on a node.
    pub fn new(
        x_range: (Rat, Rat),
        y_range: (Rat, Rat),
        nx: usize,
        ny: usize,
        base_point: &CRat,
    ) -> Result<Self, GridError> {
        if nx < 3 || ny < 3 {
            return Err(GridError::TooFewSamples { nx, ny });
        }
        if x_range.0 >= x_range.1 || y_range.0 >= y_range.1 {
            return Err(GridError::EmptyRange);
        }
        let hx = (&x_range.1 - &x_range.0) / Rat::from_integer(((nx - 1) as i64).into());
        let hy = (&y_range.1 - &y_range.0) / Rat::from_integer(((ny - 1) as i64).into());
        let base_i =
            node_index_of(&base_point.re, &x_range.0, &hx, nx).ok_or(GridError::BaseOffGrid)?;
        let base_j =
            node_index_of(&base_point.im, &y_range.0, &hy, ny).ok_or(GridError::BaseOffGrid)?;
        Ok(DomainGrid {
            x_min: x_range.0,
            x_max: x_range.1,
            y_min: y_range.0,
            y_max: y_range.1,
            nx,
            ny,
            base_i,
            base_j,
        })
    }

    /// The square [−half, half]² with n samples per side and base point 0
    /// (n must be odd so the center is a node).
    pub fn square_centered(half: Rat, n: usize) -> Result<Self, GridError> {
        DomainGrid::new(
            (-half.clone(), half.clone()),
            (-half.clone(), half),
            n,
            n,
            &CRat::from_i64(0, 0),
        )
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn n_nodes(&self) -> usize {
        self.nx * self.ny
    }

    pub fn base_index(&self) -> (usize, usize) {
        (self.base_i, self.base_j)
    }

    pub fn base_point(&self) -> CRat {
        self.node_z_exact(self.base_i, self.base_j)
    }

    pub fn spacing_x_exact(&self) -> Rat {
        (&self.x_max - &self.x_min) / Rat::from_integer(((self.nx - 1) as i64).into())
    }

    pub fn spacing_y_exact(&self) -> Rat {
        (&self.y_max - &self.y_min) / Rat::from_integer(((self.ny - 1) as i64).into())
    }

    pub fn spacing_x(&self) -> f64 {
        self.spacing_x_exact().to_f64()
    }

    pub fn spacing_y(&self) -> f64 {
        self.spacing_y_exact().to_f64()
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing_x().min(self.spacing_y())
    }

    pub fn node_x_exact(&self, i: usize) -> Rat {
        assert!(i < self.nx);
        &self.x_min + self.spacing_x_exact() * Rat::from_integer((i as i64).into())
    }

    pub fn node_y_exact(&self, j: usize) -> Rat {
        assert!(j < self.ny);
        &self.y_min + self.spacing_y_exact() * Rat::from_integer((j as i64).into())
    }

    pub fn node_z_exact(&self, i: usize, j: usize) -> CRat {
        CRat::new(self.node_x_exact(i), self.node_y_exact(j))
    }

    pub fn node_z(&self, i: usize, j: usize) -> C64 {
        C64::new(self.node_x_exact(i).to_f64(), self.node_y_exact(j).to_f64())
    }

    /// Row-major flat index (rows are constant y).
    pub fn flat(&self, i: usize, j: usize) -> usize {
        assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    /// Whether (i, j) sits at least `margin` nodes away from every edge.
    pub fn is_interior(&self, i: usize, j: usize, margin: usize) -> bool {
        i >= margin && j >= margin && i + margin < self.nx && j + margin < self.ny
    }

    /// All (i, j) pairs in flat-index order.
    pub fn indices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| (i, j)))
    }

    /// Parse `{"x_range": [lo, hi], "y_range": [lo, hi], "nx": n, "ny": n}`
    /// with rational-form bounds; the base point is supplied by the caller
    /// (typically the potential's) and must be a node.
    pub fn from_json(v: &Value, base_point: &CRat) -> Result<Self, GridError> {
        use crate::potential::rat_from_json;
        let obj = v
            .as_object()
            .ok_or_else(|| GridError::Schema("grid must be an object".into()))?;
        let range = |key: &str| -> Result<(Rat, Rat), GridError> {
            let arr = obj
                .get(key)
                .and_then(|r| r.as_array())
                .filter(|a| a.len() == 2)
                .ok_or_else(|| GridError::Schema(format!("{key} must be [lo, hi]")))?;
            let lo = rat_from_json(&arr[0]).map_err(|e| GridError::Schema(e.to_string()))?;
            let hi = rat_from_json(&arr[1]).map_err(|e| GridError::Schema(e.to_string()))?;
            Ok((lo, hi))
        };
        let count = |key: &str| -> Result<usize, GridError> {
            obj.get(key)
                .and_then(|n| n.as_u64())
                .map(|n| n as usize)
                .ok_or_else(|| GridError::Schema(format!("{key} must be a positive integer")))
        };
        DomainGrid::new(
            range("x_range")?,
            range("y_range")?,
            count("nx")?,
            count("ny")?,
            base_point,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn node_geometry_is_exact() {
        let g = DomainGrid::square_centered(rat(1, 2), 61).unwrap();
        assert_eq!(g.base_index(), (30, 30));
        assert_eq!(g.base_point(), CRat::from_i64(0, 0));
        assert_eq!(g.spacing_x_exact(), rat(1, 60));
        assert_eq!(g.node_x_exact(0), rat(-1, 2));
        assert_eq!(g.node_x_exact(60), rat(1, 2));
        assert_eq!(g.node_z_exact(31, 30), CRat::new(rat(1, 60), rat(0, 1)));
        assert_eq!(g.flat(0, 1), 61);
        assert!(g.is_interior(1, 1, 1));
        assert!(!g.is_interior(0, 5, 1));
    }

    #[test]
    fn base_point_must_be_a_node() {
        let bad = DomainGrid::new(
            (rat(-1, 2), rat(1, 2)),
            (rat(-1, 2), rat(1, 2)),
            4,
            4,
            &CRat::from_i64(0, 0),
        );
        assert!(matches!(bad, Err(GridError::BaseOffGrid)));
        // 0 is a node of the 5-sample grid but not of the 4-sample one.
        let good = DomainGrid::new(
            (rat(-1, 2), rat(1, 2)),
            (rat(-1, 2), rat(1, 2)),
            5,
            5,
            &CRat::from_i64(0, 0),
        );
        assert!(good.is_ok());
    }

    #[test]
    fn degenerate_shapes_rejected() {
        assert!(matches!(
            DomainGrid::square_centered(rat(1, 2), 2),
            Err(GridError::TooFewSamples { .. })
        ));
        assert!(matches!(
            DomainGrid::new(
                (rat(1, 2), rat(-1, 2)),
                (rat(-1, 2), rat(1, 2)),
                5,
                5,
                &CRat::from_i64(0, 0)
            ),
            Err(GridError::EmptyRange)
        ));
    }

    #[test]
    fn json_roundtrip() {
        let doc: Value = serde_json::from_str(
            r#"{"x_range": [[-1,2],[1,2]], "y_range": [[-1,2],[1,2]], "nx": 61, "ny": 61}"#,
        )
        .unwrap();
        let g = DomainGrid::from_json(&doc, &CRat::from_i64(0, 0)).unwrap();
        assert_eq!(g, DomainGrid::square_centered(rat(1, 2), 61).unwrap());
    }
}
