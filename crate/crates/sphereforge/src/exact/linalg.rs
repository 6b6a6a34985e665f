//! Exact dense linear algebra over a field: reduction, rank, solving, and
//! nullspaces. Sizes here are tiny (jet coefficient spaces), so simple
//! Gauss–Jordan elimination is the right tool.

use super::scalar::Field;

/// Row-major matrix with exact entries.
#[derive(Clone, PartialEq, Debug)]
pub struct Mat<T> {
    pub rows: usize,
    pub cols: usize,
    data: Vec<T>,
}

impl<T: Field> Mat<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Mat { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|row| row.len()).unwrap_or(0);
        assert!(rows.iter().all(|row| row.len() == c));
        Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// In-place reduced row echelon form; returns pivot column indices.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !self.at(r, col).is_zero()) else {
                continue;
            };
            self.swap_rows(row, p);
            let inv = self
                .at(row, col)
                .inv()
                .expect("pivot is nonzero, hence invertible");
            for j in col..self.cols {
                let v = self.at(row, j).mul(&inv);
                self.set(row, j, v);
            }
            for r in 0..self.rows {
                if r == row || self.at(r, col).is_zero() {
                    continue;
                }
                let factor = self.at(r, col).clone();
                for j in col..self.cols {
                    let v = self.at(r, j).sub(&factor.mul(self.at(row, j)));
                    self.set(r, j, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    /// Basis of the right nullspace (columns as Vec<T> of length `cols`).
    pub fn nullspace(&self) -> Vec<Vec<T>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Vec::with_capacity(free.len());
        for &f in &free {
            let mut v = vec![T::zero(); self.cols];
            v[f] = T::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = m.at(r, f).neg();
            }
            basis.push(v);
        }
        basis
    }

    /// Solve A·x = b; `None` if inconsistent, otherwise one solution (free
    /// variables set to zero).
    pub fn solve(&self, b: &[T]) -> Option<Vec<T>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Mat::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.at(i, j).clone());
            }
            aug.set(i, self.cols, b[i].clone());
        }
        let pivots = aug.rref();
        if pivots.contains(&self.cols) {
            return None; // a pivot in the constant column: inconsistent
        }
        let mut x = vec![T::zero(); self.cols];
        for (r, &p) in pivots.iter().enumerate() {
            x[p] = aug.at(r, self.cols).clone();
        }
        Some(x)
    }

    /// Determinant by fraction-free-enough exact elimination (field entries).
    pub fn det(&self) -> T {
        assert_eq!(self.rows, self.cols);
        let mut m = self.clone();
        let mut det = T::one();
        for col in 0..m.cols {
            let Some(p) = (col..m.rows).find(|&r| !m.at(r, col).is_zero()) else {
                return T::zero();
            };
            if p != col {
                m.swap_rows(col, p);
                det = det.neg();
            }
            let pivot = m.at(col, col).clone();
            det = det.mul(&pivot);
            let inv = pivot.inv().expect("nonzero pivot");
            for r in col + 1..m.rows {
                let factor = m.at(r, col).mul(&inv);
                if factor.is_zero() {
                    continue;
                }
                for j in col..m.cols {
                    let v = m.at(r, j).sub(&factor.mul(m.at(col, j)));
                    m.set(r, j, v);
                }
            }
        }
        det
    }
}
