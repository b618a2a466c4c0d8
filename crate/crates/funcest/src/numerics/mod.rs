//! Dense linear algebra and a self-contained two-phase simplex solver.
//!
//! Everything here works on plain row-major `f64` storage. The problems this
//! crate targets stay at desk scale (p up to ~1200), where dense O(p^2)
//! storage and O(p^3) factorizations are cheap enough that sparse formats
//! would only add complexity.

mod lp;

pub use lp::{solve_lp, LpProblem, LpSolution, LpStatus};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Feasibility tolerance used as the default throughout the crate.
pub const DEFAULT_FEASIBILITY_TOL: f64 = 1e-9;

/// Pivot magnitudes below this are treated as numerically zero.
pub const PIVOT_THRESHOLD: f64 = 1e-11;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is numerically singular (pivot {pivot:.3e} at elimination step {step})")]
    NearSingular { step: usize, pivot: f64 },
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(rows * cols, data.len(), "entry count must equal rows*cols");
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    /// `self * other`.
    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a_row = self.row(i);
            let out_row = out.row_mut(i);
            for (k, &a) in a_row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let b_row = other.row(k);
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self * other^T`, avoiding an explicit transpose.
    pub fn matmul_transpose(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.cols, "inner dimensions must agree");
        let mut out = DenseMatrix::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            let a_row = self.row(i);
            for j in 0..other.rows {
                let dot: f64 = a_row.iter().zip(other.row(j)).map(|(x, y)| x * y).sum();
                out.data[i * other.rows + j] = dot;
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "vector length must equal cols");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn add_assign_scaled(&mut self, other: &DenseMatrix, scale: f64) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += scale * b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    /// Entrywise max-norm `max_ij |a_ij|`.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Entrywise max-norm of the difference.
    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Maximum asymmetry `max_ij |a_ij - a_ji|`; 0 for exactly symmetric input.
    pub fn asymmetry(&self) -> f64 {
        assert!(self.is_square());
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Force exact symmetry by averaging mirror entries.
    pub fn symmetrize(&mut self) {
        assert!(self.is_square());
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let v = 0.5 * (self.get(i, j) + self.get(j, i));
                self.set(i, j, v);
                self.set(j, i, v);
            }
        }
    }
}

/// Maximum absolute column sum `|A|_{L^1} = max_k sum_j |a_jk|`.
pub fn matrix_l1_operator_norm(a: &DenseMatrix) -> f64 {
    let mut col_sums = vec![0.0f64; a.cols()];
    for i in 0..a.rows() {
        for (s, v) in col_sums.iter_mut().zip(a.row(i)) {
            *s += v.abs();
        }
    }
    col_sums.into_iter().fold(0.0, f64::max)
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
///
/// Signals near-singularity when the best available pivot falls below
/// [`PIVOT_THRESHOLD`] relative to the largest entry of `A`.
pub fn solve_linear_system(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>, NumericsError> {
    if !a.is_square() {
        return Err(NumericsError::Dimension(format!(
            "matrix is {}x{}, expected square",
            a.rows(),
            a.cols()
        )));
    }
    if a.rows() != b.len() {
        return Err(NumericsError::Dimension(format!(
            "rhs length {} does not match matrix order {}",
            b.len(),
            a.rows()
        )));
    }
    let n = a.rows();
    let mut aug = a.clone();
    let mut rhs = b.to_vec();
    let scale = a.max_abs().max(1.0);

    for k in 0..n {
        // Partial pivoting: largest magnitude in column k at or below row k.
        let mut pivot_row = k;
        let mut pivot_val = aug.get(k, k).abs();
        for i in (k + 1)..n {
            let v = aug.get(i, k).abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = i;
            }
        }
        if pivot_val <= PIVOT_THRESHOLD * scale {
            return Err(NumericsError::NearSingular { step: k, pivot: pivot_val });
        }
        if pivot_row != k {
            for j in 0..n {
                let tmp = aug.get(k, j);
                aug.set(k, j, aug.get(pivot_row, j));
                aug.set(pivot_row, j, tmp);
            }
            rhs.swap(k, pivot_row);
        }
        let pivot = aug.get(k, k);
        for i in (k + 1)..n {
            let factor = aug.get(i, k) / pivot;
            if factor == 0.0 {
                continue;
            }
            aug.set(i, k, 0.0);
            for j in (k + 1)..n {
                let v = aug.get(i, j) - factor * aug.get(k, j);
                aug.set(i, j, v);
            }
            rhs[i] -= factor * rhs[k];
        }
    }

    // Back substitution.
    let mut x = vec![0.0f64; n];
    for k in (0..n).rev() {
        let mut s = rhs[k];
        for j in (k + 1)..n {
            s -= aug.get(k, j) * x[j];
        }
        x[k] = s / aug.get(k, k);
    }
    Ok(x)
}

/// Inverts a square matrix by Gauss-Jordan elimination with partial pivoting.
pub fn invert_matrix(a: &DenseMatrix) -> Result<DenseMatrix, NumericsError> {
    if !a.is_square() {
        return Err(NumericsError::Dimension(format!(
            "matrix is {}x{}, expected square",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let mut work = a.clone();
    let mut inv = DenseMatrix::identity(n);
    let scale = a.max_abs().max(1.0);

    for k in 0..n {
        let mut pivot_row = k;
        let mut pivot_val = work.get(k, k).abs();
        for i in (k + 1)..n {
            let v = work.get(i, k).abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = i;
            }
        }
        if pivot_val <= PIVOT_THRESHOLD * scale {
            return Err(NumericsError::NearSingular { step: k, pivot: pivot_val });
        }
        if pivot_row != k {
            for j in 0..n {
                let tmp = work.get(k, j);
                work.set(k, j, work.get(pivot_row, j));
                work.set(pivot_row, j, tmp);
                let tmp = inv.get(k, j);
                inv.set(k, j, inv.get(pivot_row, j));
                inv.set(pivot_row, j, tmp);
            }
        }
        let pivot = work.get(k, k);
        for j in 0..n {
            work.set(k, j, work.get(k, j) / pivot);
            inv.set(k, j, inv.get(k, j) / pivot);
        }
        for i in 0..n {
            if i == k {
                continue;
            }
            let factor = work.get(i, k);
            if factor == 0.0 {
                continue;
            }
            for j in 0..n {
                let v = work.get(i, j) - factor * work.get(k, j);
                work.set(i, j, v);
                let v = inv.get(i, j) - factor * inv.get(k, j);
                inv.set(i, j, v);
            }
        }
    }
    Ok(inv)
}

/// Vector sup-norm, `max_j |v_j|`; 0 for the empty vector.
pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Vector l1 norm.
pub fn l1_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Euclidean norm.
pub fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
