//! Shared oracles for the integration suites: a Kronecker-vectorization
//! Sylvester solver (dense Gaussian elimination, independent of the
//! Bartels-Stewart path) and the closed-form 1D Laplacian Lyapunov
//! solution.

#![allow(dead_code)]

use sylkit::la::RMat;
use sylkit::sparse::SparseMatrix;

/// Solve `H Y + Y G^T = C` through the `mp x mp` Kronecker system
/// `(I (x) H + G (x) I) vec(Y) = vec(C)` by Gaussian elimination with
/// partial pivoting. Completely independent of the Schur-based solver.
pub fn kron_sylvester_oracle(h: &RMat, g: &RMat, c: &RMat) -> RMat {
    let m = h.rows();
    let p = g.rows();
    let n = m * p;
    let mut a = vec![vec![0.0f64; n]; n];
    for jj in 0..p {
        for bi in 0..m {
            for bj in 0..m {
                a[jj * m + bi][jj * m + bj] += h[(bi, bj)];
            }
        }
    }
    for jj in 0..p {
        for ii in 0..p {
            let gij = g[(ii, jj)];
            if gij != 0.0 {
                for t in 0..m {
                    a[ii * m + t][jj * m + t] += gij;
                }
            }
        }
    }
    let mut rhs: Vec<f64> = (0..n).map(|i| c[(i % m, i / m)]).collect();

    // forward elimination with partial pivoting
    for col in 0..n {
        let mut piv = col;
        for i in col + 1..n {
            if a[i][col].abs() > a[piv][col].abs() {
                piv = i;
            }
        }
        assert!(a[piv][col].abs() > 1e-300, "singular Kronecker system");
        a.swap(col, piv);
        rhs.swap(col, piv);
        for i in col + 1..n {
            let f = a[i][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                a[i][j] -= f * a[col][j];
            }
            rhs[i] -= f * rhs[col];
        }
    }
    // back substitution
    let mut x = vec![0.0f64; n];
    for i in (0..n).rev() {
        let mut acc = rhs[i];
        for j in i + 1..n {
            acc -= a[i][j] * x[j];
        }
        x[i] = acc / a[i][i];
    }
    RMat::from_fn(m, p, |i, j| x[j * m + i])
}

/// Sparse 1D Laplacian `(1/h^2) tridiag(1, -2, 1)` with `h = 1/(n+1)`.
pub fn laplacian_1d(n: usize) -> SparseMatrix {
    let h = 1.0 / (n as f64 + 1.0);
    let w = 1.0 / (h * h);
    let mut t = Vec::with_capacity(3 * n);
    for i in 0..n {
        t.push((i, i, -2.0 * w));
        if i > 0 {
            t.push((i, i - 1, w));
        }
        if i + 1 < n {
            t.push((i, i + 1, w));
        }
    }
    SparseMatrix::from_triplets(n, n, &t).unwrap()
}

/// Closed-form eigenvalues of [`laplacian_1d`].
pub fn laplacian_1d_eigenvalues(n: usize) -> Vec<f64> {
    let h = 1.0 / (n as f64 + 1.0);
    (1..=n)
        .map(|k| {
            -(4.0 / (h * h))
                * ((k as f64) * std::f64::consts::PI / (2.0 * (n as f64 + 1.0)))
                    .sin()
                    .powi(2)
        })
        .collect()
}

/// Exact solution of `A X + X A^T = c c^T` for the 1D Laplacian through its
/// closed-form eigendecomposition (sine basis). Independent of every solver
/// code path.
pub fn laplacian_1d_lyapunov_exact(n: usize, c: &RMat) -> RMat {
    let lam = laplacian_1d_eigenvalues(n);
    let q = RMat::from_fn(n, n, |j, k| {
        (2.0 / (n as f64 + 1.0)).sqrt()
            * (((j + 1) * (k + 1)) as f64 * std::f64::consts::PI / (n as f64 + 1.0)).sin()
    });
    let chat = q.adjoint_matmul(c);
    let mut y = RMat::zeros(n, n);
    for jj in 0..n {
        for ii in 0..n {
            y[(ii, jj)] = chat[(ii, 0)] * chat[(jj, 0)] / (lam[ii] + lam[jj]);
        }
    }
    q.matmul(&y).matmul(&q.transpose())
}

/// Spectral norm via the SVD.
pub fn spectral_norm(m: &RMat) -> f64 {
    sylkit::la::svd(m).sigma.first().copied().unwrap_or(0.0)
}
