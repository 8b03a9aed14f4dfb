//! Singular value decomposition by one-sided Jacobi rotations.
//!
//! Accurate and simple at the projected-problem sizes this crate deals with
//! (up to a few hundred columns). Tall inputs are pre-reduced by a QR
//! factorization so the rotation sweeps run on a square factor.

use super::{householder_qr, RMat};

/// Thin SVD `M = U diag(sigma) V^T`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// Left singular vectors, `rows x k` with `k = min(rows, cols)`.
    pub u: RMat,
    /// Singular values, nonincreasing and nonnegative.
    pub sigma: Vec<f64>,
    /// Right singular vectors, `cols x k`.
    pub v: RMat,
}

/// One-sided Jacobi SVD of a real matrix.
pub fn svd(m: &RMat) -> Svd {
    let rows = m.rows();
    let cols = m.cols();

    if rows < cols {
        // Factor the transpose and swap the roles of U and V.
        let t = svd(&m.transpose());
        return Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        };
    }
    if cols == 0 {
        return Svd {
            u: RMat::zeros(rows, 0),
            sigma: Vec::new(),
            v: RMat::zeros(0, 0),
        };
    }

    // Tall case: M = Q R, then SVD of the small square R.
    let (q0, mut a) = if rows > cols {
        let (q, r) = householder_qr(m, true);
        (Some(q), r)
    } else {
        (None, m.clone())
    };

    let n = cols;
    let mut v = RMat::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let tol = 1e-15 * scale * scale;

    // Cyclic sweeps orthogonalizing column pairs of A; rotations accumulate
    // into V so that A_final = U * diag(sigma) and M = A_final V^T.
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for qq in p + 1..n {
                let (mut app, mut aqq, mut apq) = (0.0, 0.0, 0.0);
                for i in 0..n {
                    let x = a[(i, p)];
                    let y = a[(i, qq)];
                    app += x * x;
                    aqq += y * y;
                    apq += x * y;
                }
                off = off.max(apq.abs());
                if apq.abs() <= 1e-16 * (app * aqq).sqrt().max(f64::MIN_POSITIVE) {
                    continue;
                }
                // Jacobi rotation zeroing the (p,q) Gram entry.
                let zeta = (aqq - app) / (2.0 * apq);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..n {
                    let x = a[(i, p)];
                    let y = a[(i, qq)];
                    a[(i, p)] = c * x - s * y;
                    a[(i, qq)] = s * x + c * y;
                }
                for i in 0..n {
                    let x = v[(i, p)];
                    let y = v[(i, qq)];
                    v[(i, p)] = c * x - s * y;
                    v[(i, qq)] = s * x + c * y;
                }
            }
        }
        if off <= tol {
            break;
        }
    }

    // Column norms are the singular values; normalize into U.
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n)
        .map(|j| a.col(j).iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());

    let mut u = RMat::zeros(n, n);
    let mut vs = RMat::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    for (jnew, &jold) in order.iter().enumerate() {
        let s = norms[jold];
        sigma.push(s);
        if s > 0.0 {
            for i in 0..n {
                u[(i, jnew)] = a[(i, jold)] / s;
            }
        } else {
            // Zero singular value: leave a zero column; fixed below.
            for i in 0..n {
                u[(i, jnew)] = 0.0;
            }
        }
        for i in 0..n {
            vs[(i, jnew)] = v[(i, jold)];
        }
    }
    orthonormal_fill(&mut u);

    let u_final = match q0 {
        Some(q) => q.matmul(&u),
        None => u,
    };
    Svd {
        u: u_final,
        sigma,
        v: vs,
    }
}

/// Replace zero columns by vectors orthonormal to the rest, so U always has
/// orthonormal columns even for rank-deficient input.
fn orthonormal_fill(u: &mut RMat) {
    let n = u.rows();
    for j in 0..u.cols() {
        let norm: f64 = u.col(j).iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.5 {
            continue;
        }
        // Gram-Schmidt a canonical basis vector against the other columns.
        'candidates: for e in 0..n {
            let mut cand = vec![0.0; n];
            cand[e] = 1.0;
            for jj in 0..u.cols() {
                if jj == j {
                    continue;
                }
                let dot: f64 = (0..n).map(|i| u[(i, jj)] * cand[i]).sum();
                for i in 0..n {
                    cand[i] -= dot * u[(i, jj)];
                }
            }
            let cn: f64 = cand.iter().map(|x| x * x).sum::<f64>().sqrt();
            if cn > 1e-3 {
                for i in 0..n {
                    u[(i, j)] = cand[i] / cn;
                }
                break 'candidates;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::la::hermitian_eig_real;
    use crate::rng::CounterRng;

    #[test]
    fn zero_matrix_has_zero_spectrum() {
        let m = RMat::zeros(4, 3);
        let d = svd(&m);
        assert!(d.sigma.iter().all(|&s| s == 0.0));
        // U still orthonormal
        let orth =
            d.u.adjoint_matmul(&d.u)
                .sub(&RMat::identity(3))
                .frobenius_norm();
        assert!(orth < 1e-12);
    }

    #[test]
    fn rank_one_outer_product() {
        // u with norm 2, v with norm 3 -> leading singular value 6.
        let u = [2.0, 0.0, 0.0, 0.0];
        let v = [0.0, 3.0, 0.0];
        let m = RMat::from_fn(4, 3, |i, j| u[i] * v[j]);
        let d = svd(&m);
        assert!((d.sigma[0] - 6.0).abs() < 1e-12);
        for &s in &d.sigma[1..] {
            assert!(s.abs() < 1e-12);
        }
    }

    #[test]
    fn singular_values_match_gram_eigenvalues() {
        let mut rng = CounterRng::new(42);
        let m = RMat::from_fn(15, 7, |_, _| rng.normal());
        let d = svd(&m);
        let gram = m.adjoint_matmul(&m);
        let (mut evals, _) = hermitian_eig_real(&gram).unwrap();
        evals.reverse();
        for (s, lam) in d.sigma.iter().zip(&evals) {
            assert!(
                (s * s - lam).abs() <= 1e-10 * gram.frobenius_norm(),
                "{s} vs {lam}"
            );
        }
    }

    #[test]
    fn reconstruction_seeded() {
        for seed in 0..20 {
            let rows = 5 + (seed as usize % 9);
            let cols = 3 + (seed as usize % 5);
            let mut rng = CounterRng::new(4000 + seed);
            let m = RMat::from_fn(rows, cols, |_, _| rng.normal());
            let d = svd(&m);
            let k = rows.min(cols);
            let mut us = d.u.clone();
            for j in 0..k {
                for i in 0..us.rows() {
                    us[(i, j)] *= d.sigma[j];
                }
            }
            let recon = us.matmul(&d.v.transpose()).sub(&m).frobenius_norm();
            assert!(
                recon <= 1e-12 * m.frobenius_norm().max(1.0),
                "seed {seed}: {recon}"
            );
            for w in d.sigma.windows(2) {
                assert!(w[0] >= w[1]);
            }
            let orth_u =
                d.u.adjoint_matmul(&d.u)
                    .sub(&RMat::identity(k))
                    .frobenius_norm();
            let orth_v =
                d.v.adjoint_matmul(&d.v)
                    .sub(&RMat::identity(k))
                    .frobenius_norm();
            assert!(orth_u < 1e-12 * k as f64);
            assert!(orth_v < 1e-12 * k as f64);
        }
    }

    #[test]
    fn wide_matrix_transposed_path() {
        let mut rng = CounterRng::new(9);
        let m = RMat::from_fn(4, 9, |_, _| rng.normal());
        let d = svd(&m);
        assert_eq!(d.u.rows(), 4);
        assert_eq!(d.v.rows(), 9);
        let mut us = d.u.clone();
        for j in 0..4 {
            for i in 0..4 {
                us[(i, j)] *= d.sigma[j];
            }
        }
        let recon = us.matmul(&d.v.transpose()).sub(&m).frobenius_norm();
        assert!(recon < 1e-12 * m.frobenius_norm());
    }
}
