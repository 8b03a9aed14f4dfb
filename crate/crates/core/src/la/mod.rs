//! Self-contained dense linear algebra kernels.
//!
//! Everything operates on the column-major [`DMat`] type in either the real
//! (`RMat`) or complex (`CMat`) variant; promotion from real to complex is
//! explicit via [`DMat::to_complex`]. The factorizations provided here are
//! exactly the ones the projected problems need:
//!
//! * Householder QR with a deterministic sign convention,
//! * complex Schur decomposition with eigenvalue reordering,
//! * a Hermitian eigensolver (tridiagonalization + implicit-shift QL),
//! * SVD by one-sided Jacobi,
//! * a Bartels–Stewart style dense Sylvester solver.
//!
//! Performance targets are the small projected-space sizes (up to a few
//! hundred), not LAPACK parity.

mod eig;
mod io;
mod qr;
mod schur;
mod svd;
mod sylvester;

pub use eig::{hermitian_eig, hermitian_eig_real, symmetric_alpha};
pub use io::{
    read_dense_csv, read_dense_matrix_market, write_dense_csv, write_dense_matrix_market,
};
pub use qr::householder_qr;
pub use schur::{complex_schur, complex_schur_c, triangular_eigenvector, SchurDecomposition};
pub use svd::{svd, Svd};
pub use sylvester::{solve_sylvester_complex, solve_sylvester_dense};

use num_complex::Complex64;
use std::fmt;

/// Scalar entry of a dense matrix: `f64` or `Complex64`.
pub trait Entry:
    Copy
    + PartialEq
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
    + std::ops::AddAssign
    + std::ops::SubAssign
    + std::fmt::Debug
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn conj(self) -> Self;
    fn abs(self) -> f64;
    fn re(self) -> f64;
    fn scale(self, s: f64) -> Self;
}

impl Entry for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    fn re(self) -> f64 {
        self
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

impl Entry for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn abs(self) -> f64 {
        self.norm()
    }
    fn re(self) -> f64 {
        self.re
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

/// Dense column-major matrix.
#[derive(Clone, PartialEq)]
pub struct DMat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type RMat = DMat<f64>;
pub type CMat = DMat<Complex64>;

impl<T: Entry> DMat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DMat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Build from a column-major slice.
    pub fn from_col_major(rows: usize, cols: usize, data: &[T]) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count mismatch");
        DMat {
            rows,
            cols,
            data: data.to_vec(),
        }
    }

    /// Build from rows listed top to bottom (test convenience).
    pub fn from_rows(rows: &[&[T]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m[(i, j)] = f(i, j);
            }
        }
        m
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

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn set_col(&mut self, j: usize, v: &[T]) {
        assert_eq!(v.len(), self.rows);
        self.col_mut(j).copy_from_slice(v);
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data
            .iter()
            .map(|v| v.abs() * v.abs())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale_assign(&mut self, s: f64) {
        for v in &mut self.data {
            *v = v.scale(s);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += *b;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= *b;
        }
        out
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let ocol = &other.data[j * other.rows..(j + 1) * other.rows];
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (k, &bkj) in ocol.iter().enumerate() {
                if bkj == T::zero() {
                    continue;
                }
                let acol = &self.data[k * self.rows..(k + 1) * self.rows];
                for i in 0..self.rows {
                    dst[i] += acol[i] * bkj;
                }
            }
        }
        out
    }

    /// `self^H * other` without materializing the adjoint.
    pub fn adjoint_matmul(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows, "adjoint_matmul dimension mismatch");
        let mut out = Self::zeros(self.cols, other.cols);
        for j in 0..other.cols {
            let bcol = other.col(j);
            for i in 0..self.cols {
                let acol = self.col(i);
                let mut acc = T::zero();
                for k in 0..self.rows {
                    acc += acol[k].conj() * bcol[k];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    /// Copy of the block with rows `r0..r1` and columns `c0..c1`.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        assert!(r1 <= self.rows && c1 <= self.cols && r0 <= r1 && c0 <= c1);
        Self::from_fn(r1 - r0, c1 - c0, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, m: &Self) {
        assert!(r0 + m.rows <= self.rows && c0 + m.cols <= self.cols);
        for j in 0..m.cols {
            for i in 0..m.rows {
                self[(r0 + i, c0 + j)] = m[(i, j)];
            }
        }
    }

    /// Horizontal concatenation `[self, other]`.
    pub fn hcat(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        let mut out = Self::zeros(self.rows, self.cols + other.cols);
        out.data[..self.data.len()].copy_from_slice(&self.data);
        out.data[self.data.len()..].copy_from_slice(&other.data);
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

impl RMat {
    pub fn to_complex(&self) -> CMat {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }
}

impl CMat {
    /// Real part, dropping the imaginary component.
    pub fn real_part(&self) -> RMat {
        RMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.re).collect(),
        }
    }

    pub fn max_imag(&self) -> f64 {
        self.data.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}

impl<T: Entry> std::ops::Index<(usize, usize)> for DMat<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl<T: Entry> std::ops::IndexMut<(usize, usize)> for DMat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

impl<T: Entry> fmt::Debug for DMat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DMat {}x{}", self.rows, self.cols)?;
        let rmax = self.rows.min(8);
        let cmax = self.cols.min(8);
        for i in 0..rmax {
            for j in 0..cmax {
                write!(f, " {:?}", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Errors from the dense kernels.
#[derive(Debug, Clone, PartialEq)]
pub enum LaError {
    /// QR iteration failed to deflate an eigenvalue within the sweep budget.
    NonConvergence {
        dim: usize,
    },
    /// Input claimed Hermitian failed the symmetry check.
    NotHermitian {
        deviation: f64,
    },
    /// Spectra of the Sylvester coefficients overlap: `|r_ii + s_jj|` fell
    /// below the breakdown threshold for the reported diagonal pair.
    SingularOperator {
        i: usize,
        j: usize,
        value: f64,
    },
    /// Malformed file contents.
    Parse {
        line: usize,
        message: String,
    },
    Io(String),
    DimensionMismatch {
        expected: String,
        got: String,
    },
}

impl fmt::Display for LaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LaError::NonConvergence { dim } => {
                write!(f, "QR iteration exceeded sweep budget for dimension {dim}")
            }
            LaError::NotHermitian { deviation } => {
                write!(f, "matrix is not Hermitian (deviation {deviation:.3e})")
            }
            LaError::SingularOperator { i, j, value } => write!(
                f,
                "singular Sylvester operator: |r_{i}{i} + s_{j}{j}| = {value:.3e}"
            ),
            LaError::Parse { line, message } => write!(f, "parse error at line {line}: {message}"),
            LaError::Io(e) => write!(f, "io error: {e}"),
            LaError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
        }
    }
}

impl std::error::Error for LaError {}

impl From<std::io::Error> for LaError {
    fn from(e: std::io::Error) -> Self {
        LaError::Io(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_small() {
        let a = RMat::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let b = RMat::from_rows(&[&[5.0, 6.0], &[7.0, 8.0]]);
        let c = a.matmul(&b);
        assert_eq!(c[(0, 0)], 19.0);
        assert_eq!(c[(0, 1)], 22.0);
        assert_eq!(c[(1, 0)], 43.0);
        assert_eq!(c[(1, 1)], 50.0);
    }

    #[test]
    fn adjoint_matmul_matches_explicit() {
        let a = RMat::from_rows(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0]]);
        let b = RMat::from_rows(&[&[1.0], &[0.5], &[-1.0]]);
        let direct = a.transpose().matmul(&b);
        let fused = a.adjoint_matmul(&b);
        assert!(direct.sub(&fused).frobenius_norm() < 1e-14);
    }

    #[test]
    fn complex_adjoint_conjugates() {
        use num_complex::Complex64 as C;
        let m = CMat::from_rows(&[&[C::new(1.0, 2.0)], &[C::new(0.0, -1.0)]]);
        let a = m.adjoint();
        assert_eq!(a[(0, 0)], C::new(1.0, -2.0));
        assert_eq!(a[(0, 1)], C::new(0.0, 1.0));
    }
}
