//! Small dense linear algebra.
//!
//! Every matrix in this crate is at most a few dozen rows wide (working
//! orders up to ~20), so a row-major `Vec<f64>` with straightforward loops
//! is all that is needed. Symmetric positive-definite systems go through
//! [`SpdSolver`], which equilibrates, factors with Cholesky and reports the
//! exact 1-norm reciprocal condition number.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

/// Reciprocal condition number below which a symmetric system is treated as singular.
pub const RCOND_THRESHOLD: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from equal-length rows. Panics on ragged input.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Matrix::from_fn(rows.len(), cols, |i, j| rows[i][j])
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

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in product");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(l, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in matrix-vector product");
        (0..self.rows)
            .map(|i| dot(self.row(i), v))
            .collect()
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|x| *x *= s);
    }

    /// `self += s * other`
    pub fn add_scaled(&mut self, other: &Matrix, s: f64) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn add_diagonal(&mut self, s: f64) {
        for i in 0..self.rows.min(self.cols) {
            self[(i, i)] += s;
        }
    }

    /// Adds the outer product `w * v v'`.
    pub fn add_outer(&mut self, v: &[f64], w: f64) {
        assert!(self.is_square() && self.rows == v.len());
        for i in 0..v.len() {
            let vi = w * v[i];
            for j in 0..v.len() {
                self[(i, j)] += vi * v[j];
            }
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// `tr(self * rhs)` without forming the product.
    pub fn trace_of_product(&self, rhs: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.cols, rhs.rows));
        let mut t = 0.0;
        for i in 0..self.rows {
            for l in 0..self.cols {
                t += self[(i, l)] * rhs[(l, i)];
            }
        }
        t
    }

    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Symmetric positive-definite solver.
///
/// The matrix is first scaled to unit diagonal (`D^{-1/2} A D^{-1/2}`), which
/// makes the reported condition number independent of the units of each
/// regressor. Unit-root Gram matrices mix O(n^2) and O(n) blocks, so this
/// matters. A non-positive pivot or a reciprocal condition number below the
/// threshold is reported as failure.
#[derive(Clone, Debug)]
pub struct SpdSolver {
    scale: Vec<f64>,
    chol: Matrix,
    rcond: f64,
}

/// Why an [`SpdSolver`] could not be built.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NotPositiveDefinite {
    pub rcond: f64,
}

impl SpdSolver {
    pub fn new(a: &Matrix) -> Result<Self, NotPositiveDefinite> {
        Self::with_threshold(a, RCOND_THRESHOLD)
    }

    pub fn with_threshold(a: &Matrix, threshold: f64) -> Result<Self, NotPositiveDefinite> {
        assert!(a.is_square(), "SpdSolver needs a square matrix");
        let n = a.rows();
        let fail = NotPositiveDefinite { rcond: 0.0 };
        let mut scale = Vec::with_capacity(n);
        for i in 0..n {
            let d = a[(i, i)];
            if !(d > 0.0) || !d.is_finite() {
                return Err(fail);
            }
            scale.push(1.0 / libm::sqrt(d));
        }
        let scaled = Matrix::from_fn(n, n, |i, j| {
            // symmetrize while scaling; callers accumulate both triangles
            0.5 * (a[(i, j)] + a[(j, i)]) * scale[i] * scale[j]
        });

        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = scaled[(j, j)];
            for p in 0..j {
                d -= l[(j, p)] * l[(j, p)];
            }
            if !(d > 0.0) {
                return Err(fail);
            }
            let djj = libm::sqrt(d);
            l[(j, j)] = djj;
            for i in j + 1..n {
                let mut s = scaled[(i, j)];
                for p in 0..j {
                    s -= l[(i, p)] * l[(j, p)];
                }
                l[(i, j)] = s / djj;
            }
        }

        let mut solver = SpdSolver {
            scale,
            chol: l,
            rcond: 0.0,
        };
        let inv = solver.scaled_inverse();
        let rcond = 1.0 / (scaled.norm_one() * inv.norm_one());
        if !(rcond >= threshold) {
            return Err(NotPositiveDefinite {
                rcond: if rcond.is_finite() { rcond } else { 0.0 },
            });
        }
        solver.rcond = rcond;
        Ok(solver)
    }

    pub fn dim(&self) -> usize {
        self.scale.len()
    }

    /// Reciprocal 1-norm condition number of the equilibrated matrix.
    pub fn rcond(&self) -> f64 {
        self.rcond
    }

    fn solve_scaled_in_place(&self, x: &mut [f64]) {
        let n = self.dim();
        let l = &self.chol;
        for i in 0..n {
            let mut s = x[i];
            for p in 0..i {
                s -= l[(i, p)] * x[p];
            }
            x[i] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for p in i + 1..n {
                s -= l[(p, i)] * x[p];
            }
            x[i] = s / l[(i, i)];
        }
    }

    fn scaled_inverse(&self) -> Matrix {
        let n = self.dim();
        let mut inv = Matrix::zeros(n, n);
        let mut col = vec![0.0; n];
        for j in 0..n {
            col.iter_mut().for_each(|c| *c = 0.0);
            col[j] = 1.0;
            self.solve_scaled_in_place(&mut col);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }

    pub fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.dim());
        let mut x: Vec<f64> = b.iter().zip(&self.scale).map(|(v, s)| v * s).collect();
        self.solve_scaled_in_place(&mut x);
        x.iter_mut().zip(&self.scale).for_each(|(v, s)| *v *= s);
        x
    }

    /// `A^{-1} B`, column by column.
    pub fn solve_mat(&self, b: &Matrix) -> Matrix {
        assert_eq!(b.rows(), self.dim());
        let mut out = Matrix::zeros(b.rows(), b.cols());
        let mut col = vec![0.0; b.rows()];
        for j in 0..b.cols() {
            for i in 0..b.rows() {
                col[i] = b[(i, j)];
            }
            let x = self.solve_vec(&col);
            for i in 0..b.rows() {
                out[(i, j)] = x[i];
            }
        }
        out
    }

    pub fn inverse(&self) -> Matrix {
        self.solve_mat(&Matrix::identity(self.dim()))
    }
}

/// Neumaier's compensated sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        iter.into_iter().for_each(|x| self.add(x));
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        s.extend(iter);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss_solve(a: &Matrix, b: &[f64]) -> Vec<f64> {
        // partial-pivot elimination, kept separate from the Cholesky path
        let n = b.len();
        let mut m: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut r = a.row(i).to_vec();
                r.push(b[i]);
                r
            })
            .collect();
        for c in 0..n {
            let p = (c..n)
                .max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs()))
                .unwrap();
            m.swap(c, p);
            for r in c + 1..n {
                let f = m[r][c] / m[c][c];
                for j in c..=n {
                    m[r][j] -= f * m[c][j];
                }
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
            x[i] = (m[i][n] - s) / m[i][i];
        }
        x
    }

    #[test]
    fn spd_solve_matches_elimination() {
        let a = Matrix::from_rows(&[&[4.0, 1.0, 0.5], &[1.0, 3.0, 0.2], &[0.5, 0.2, 2.0]]);
        let b = [1.0, -2.0, 0.5];
        let x = SpdSolver::new(&a).unwrap().solve_vec(&b);
        let y = gauss_solve(&a, &b);
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn badly_scaled_but_well_conditioned_is_accepted() {
        let a = Matrix::from_rows(&[&[1e12, 1e5], &[1e5, 1.0]]);
        let s = SpdSolver::new(&a).unwrap();
        assert!(s.rcond() > 0.1);
        let x = s.solve_vec(&[1e12, 1e5]);
        assert!((x[0] - 1.0).abs() < 1e-12 && x[1].abs() < 1e-6);
    }

    #[test]
    fn singular_and_indefinite_are_rejected() {
        let singular = Matrix::from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(SpdSolver::new(&singular).is_err());
        let zero = Matrix::zeros(2, 2);
        assert!(SpdSolver::new(&zero).is_err());
        let indefinite = Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(SpdSolver::new(&indefinite).is_err());
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let a = Matrix::from_rows(&[&[2.0, -1.0, 0.0], &[-1.0, 2.0, -1.0], &[0.0, -1.0, 2.0]]);
        let inv = SpdSolver::new(&a).unwrap().inverse();
        let id = a.mul(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((id[(i, j)] - e).abs() < 1e-14);
            }
        }
        assert!((a.trace_of_product(&inv) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn compensated_sum_keeps_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }
}
