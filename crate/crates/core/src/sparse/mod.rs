//! Sparse matrix storage (CSR), block vectors, matrix–block products,
//! Matrix Market IO, and the benchmark problem generators.

mod gen;
mod io;

pub use gen::{gen_convdiff_2d, gen_convdiff_3d, gen_hhat_ex45, gen_toeplitz_ex41, ConvField};
pub use io::{read_matrix_market, write_matrix_market};

use crate::la::RMat;
use std::fmt;

/// Compressed sparse-row real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Dense `n x r` block of column vectors, column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVec {
    mat: RMat,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SparseError {
    DimensionMismatch { expected: String, got: String },
    Parse { line: usize, message: String },
    InvalidField(String),
    Io(String),
}

impl fmt::Display for SparseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SparseError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            SparseError::Parse { line, message } => {
                write!(f, "parse error at line {line}: {message}")
            }
            SparseError::InvalidField(s) => write!(f, "invalid convection field: {s}"),
            SparseError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for SparseError {}

impl From<std::io::Error> for SparseError {
    fn from(e: std::io::Error) -> Self {
        SparseError::Io(e.to_string())
    }
}

impl SparseMatrix {
    /// Build from unordered triplets; duplicates are summed and each row is
    /// brought to canonical form (strictly increasing column indices).
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, SparseError> {
        for &(i, j, _) in triplets {
            if i >= n_rows || j >= n_cols {
                return Err(SparseError::DimensionMismatch {
                    expected: format!("< ({n_rows}, {n_cols})"),
                    got: format!("({i}, {j})"),
                });
            }
        }
        let mut per_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_rows];
        for &(i, j, v) in triplets {
            per_row[i].push((j, v));
        }
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        for row in &mut per_row {
            row.sort_by_key(|&(j, _)| j);
            let mut k = 0;
            while k < row.len() {
                let j = row[k].0;
                let mut v = row[k].1;
                while k + 1 < row.len() && row[k + 1].0 == j {
                    k += 1;
                    v += row[k].1;
                }
                col_idx.push(j);
                values.push(v);
                k += 1;
            }
            row_ptr.push(col_idx.len());
        }
        Ok(SparseMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        let triplets: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_triplets(n, n, &triplets).expect("identity triplets are valid")
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals.iter()).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn to_dense(&self) -> RMat {
        let mut m = RMat::zeros(self.n_rows, self.n_cols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn transpose(&self) -> SparseMatrix {
        let t: Vec<(usize, usize, f64)> = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        SparseMatrix::from_triplets(self.n_cols, self.n_rows, &t)
            .expect("transposed triplets are valid")
    }

    /// Frobenius norm of `M - M^T` (exactly zero for structurally and
    /// numerically symmetric matrices).
    pub fn asymmetry(&self) -> f64 {
        let mut sum = 0.0;
        let t = self.transpose();
        for i in 0..self.n_rows {
            let (ca, va) = self.row(i);
            let (cb, vb) = t.row(i);
            let mut ka = 0;
            let mut kb = 0;
            while ka < ca.len() || kb < cb.len() {
                let ja = ca.get(ka).copied().unwrap_or(usize::MAX);
                let jb = cb.get(kb).copied().unwrap_or(usize::MAX);
                let d = if ja == jb {
                    ka += 1;
                    kb += 1;
                    va[ka - 1] - vb[kb - 1]
                } else if ja < jb {
                    ka += 1;
                    va[ka - 1]
                } else {
                    kb += 1;
                    -vb[kb - 1]
                };
                sum += d * d;
            }
        }
        sum.sqrt()
    }
}

impl BlockVec {
    pub fn zeros(n: usize, r: usize) -> Self {
        assert!(r >= 1, "block width must be at least 1");
        BlockVec {
            mat: RMat::zeros(n, r),
        }
    }

    pub fn from_mat(mat: RMat) -> Self {
        assert!(mat.cols() >= 1, "block width must be at least 1");
        debug_assert!(
            mat.as_slice().iter().all(|v| v.is_finite()),
            "nonfinite entries"
        );
        BlockVec { mat }
    }

    pub fn n(&self) -> usize {
        self.mat.rows()
    }

    pub fn width(&self) -> usize {
        self.mat.cols()
    }

    pub fn as_mat(&self) -> &RMat {
        &self.mat
    }

    pub fn into_mat(self) -> RMat {
        self.mat
    }

    /// Random block with unit-norm columns (standard normal entries,
    /// normalized), the right-hand-side convention of the experiments.
    pub fn random_unit(n: usize, r: usize, seed: u64) -> Self {
        let mut rng = crate::rng::CounterRng::new(seed);
        let mut m = RMat::from_fn(n, r, |_, _| rng.normal());
        for j in 0..r {
            let norm: f64 = m.col(j).iter().map(|x| x * x).sum::<f64>().sqrt();
            for v in m.col_mut(j) {
                *v /= norm;
            }
        }
        BlockVec { mat: m }
    }
}

/// Sparse matrix times dense block: `M X` or `M^T X` without materializing
/// the transpose.
pub fn spmv_block(m: &SparseMatrix, x: &RMat, transpose: bool) -> Result<RMat, SparseError> {
    let (out_len, in_len) = if transpose {
        (m.n_cols, m.n_rows)
    } else {
        (m.n_rows, m.n_cols)
    };
    if x.rows() != in_len {
        return Err(SparseError::DimensionMismatch {
            expected: format!("{in_len} rows"),
            got: format!("{} rows", x.rows()),
        });
    }
    let r = x.cols();
    let mut y = RMat::zeros(out_len, r);
    if transpose {
        for i in 0..m.n_rows {
            let (cols, vals) = m.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                for c in 0..r {
                    y[(j, c)] += v * x[(i, c)];
                }
            }
        }
    } else {
        for i in 0..m.n_rows {
            let (cols, vals) = m.row(i);
            for c in 0..r {
                let mut acc = 0.0;
                let xc = x.col(c);
                for (&j, &v) in cols.iter().zip(vals) {
                    acc += v * xc[j];
                }
                y[(i, c)] = acc;
            }
        }
    }
    Ok(y)
}

/// Largest eigenvalue of the symmetric part `(M + M^T)/2` by shifted power
/// iteration on the sparse matrix; used for negative-definiteness checks at
/// sizes where a dense eigensolve would be wasteful.
pub fn sparse_alpha(m: &SparseMatrix, seed: u64, tol: f64, maxit: usize) -> f64 {
    assert_eq!(m.n_rows, m.n_cols);
    let n = m.n_rows;
    // Gershgorin bound on the symmetric part's spectral radius.
    let mut radius: f64 = 0.0;
    for i in 0..n {
        let (_cols, vals) = m.row(i);
        let sum: f64 = vals.iter().map(|v| v.abs()).sum();
        radius = radius.max(sum);
    }
    let shift = radius.max(1.0);

    let mut v = BlockVec::random_unit(n, 1, seed).into_mat();
    let mut lambda_prev = f64::INFINITY;
    for _ in 0..maxit {
        // w = (M + M^T)/2 v + shift v, then normalize.
        let av = spmv_block(m, &v, false).expect("square");
        let atv = spmv_block(m, &v, true).expect("square");
        let mut w = RMat::zeros(n, 1);
        for i in 0..n {
            w[(i, 0)] = 0.5 * (av[(i, 0)] + atv[(i, 0)]) + shift * v[(i, 0)];
        }
        let norm = w.frobenius_norm();
        for x in w.as_mut_slice() {
            *x /= norm;
        }
        // Rayleigh quotient of the unshifted symmetric part.
        let aw = spmv_block(m, &w, false).expect("square");
        let atw = spmv_block(m, &w, true).expect("square");
        let mut lambda = 0.0;
        for i in 0..n {
            lambda += w[(i, 0)] * 0.5 * (aw[(i, 0)] + atw[(i, 0)]);
        }
        v = w;
        if (lambda - lambda_prev).abs() <= tol * lambda.abs().max(1.0) {
            return lambda;
        }
        lambda_prev = lambda;
    }
    lambda_prev
}
