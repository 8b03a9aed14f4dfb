//! Hermitian eigensolver: Householder tridiagonalization followed by
//! implicit-shift QL on the real tridiagonal, with unitary accumulation.

use super::{CMat, DMat, Entry, LaError, RMat};

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues in ascending order and a unitary matrix of
/// eigenvectors (one per column, matching the value order). Fails with
/// [`LaError::NotHermitian`] when `||M - M^H|| > 1e-12 ||M||` and with
/// [`LaError::NonConvergence`] if the QL iteration stalls.
pub fn hermitian_eig(m: &CMat) -> Result<(Vec<f64>, CMat), LaError> {
    hermitian_eig_generic(m)
}

/// Real symmetric variant of [`hermitian_eig`].
pub fn hermitian_eig_real(m: &RMat) -> Result<(Vec<f64>, RMat), LaError> {
    hermitian_eig_generic(m)
}

/// Rightmost point of the field of values of a real matrix:
/// `lambda_max((M + M^T)/2)`.
pub fn symmetric_alpha(m: &RMat) -> Result<f64, LaError> {
    let sym = m.add(&m.transpose());
    let sym = {
        let mut s = sym;
        s.scale_assign(0.5);
        s
    };
    let (vals, _) = hermitian_eig_real(&sym)?;
    Ok(*vals.last().expect("nonempty spectrum"))
}

fn hermitian_eig_generic<T: Entry>(m: &DMat<T>) -> Result<(Vec<f64>, DMat<T>), LaError> {
    let n = m.rows();
    assert!(m.is_square(), "hermitian_eig requires a square matrix");
    if n == 0 {
        return Ok((Vec::new(), DMat::zeros(0, 0)));
    }

    let norm = m.frobenius_norm();
    let dev = m.sub(&m.adjoint()).frobenius_norm();
    if dev > 1e-12 * norm.max(1.0) {
        return Err(LaError::NotHermitian { deviation: dev });
    }

    // Work on the Hermitian average to remove rounding asymmetry.
    let mut a = m.add(&m.adjoint());
    a.scale_assign(0.5);

    let (mut d, mut e, mut q) = tridiagonalize(&mut a);
    ql_implicit(&mut d, &mut e, &mut q)?;

    // Ascending sort with matching column permutation.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vectors = DMat::zeros(n, n);
    for (jnew, &jold) in order.iter().enumerate() {
        let col: Vec<T> = q.col(jold).to_vec();
        vectors.set_col(jnew, &col);
    }
    Ok((values, vectors))
}

/// Reduce the Hermitian matrix to a real symmetric tridiagonal `(d, e)`
/// with `Q^H A Q = T`; returns the accumulated unitary `Q`. Off-diagonal
/// phases are absorbed into `Q` so that `e` is real and nonnegative.
fn tridiagonalize<T: Entry>(a: &mut DMat<T>) -> (Vec<f64>, Vec<f64>, DMat<T>) {
    let n = a.rows();
    let mut q = DMat::<T>::identity(n);

    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let mut v: Vec<T> = (0..len).map(|i| a[(k + 1 + i, k)]).collect();
        let sigma = v.iter().map(|x| x.abs() * x.abs()).sum::<f64>().sqrt();
        if sigma == 0.0 {
            continue;
        }
        // alpha = -sigma * phase(v[0]) keeps the reflector well conditioned.
        let phase = if v[0].abs() == 0.0 {
            T::one()
        } else {
            v[0].scale(1.0 / v[0].abs())
        };
        let alpha = -phase.scale(sigma);
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x.abs() * x.abs()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;

        // Two-sided update of the trailing block: A <- H A H with
        // H = I - beta v v^H, using the symmetric rank-2 form.
        // p = beta * A_sub * v
        let mut p = vec![T::zero(); len];
        for (j, &vj) in v.iter().enumerate() {
            let col = k + 1 + j;
            if vj.abs() != 0.0 {
                for (i, pi) in p.iter_mut().enumerate() {
                    *pi += a[(k + 1 + i, col)] * vj;
                }
            }
        }
        for x in &mut p {
            *x = x.scale(beta);
        }
        // kappa = beta/2 * v^H p
        let mut vhp = T::zero();
        for i in 0..len {
            vhp += v[i].conj() * p[i];
        }
        let kappa = vhp.scale(beta / 2.0);
        // w = p - kappa v ; A_sub -= v w^H + w v^H
        let w: Vec<T> = (0..len).map(|i| p[i] - v[i] * kappa).collect();
        for j in 0..len {
            for i in 0..len {
                let upd = v[i] * w[j].conj() + w[i] * v[j].conj();
                a[(k + 1 + i, k + 1 + j)] -= upd;
            }
        }
        a[(k + 1, k)] = alpha;
        a[(k, k + 1)] = alpha.conj();
        for i in k + 2..n {
            a[(i, k)] = T::zero();
            a[(k, i)] = T::zero();
        }

        // Accumulate Q <- Q H with H = I - beta v v^H; only columns k+1..
        // are affected: Q[j,c] -= beta * (sum_m Q[j,m] v_m) * conj(v_c).
        for j in 0..n {
            let mut s = T::zero();
            for i in 0..len {
                s += q[(j, k + 1 + i)] * v[i];
            }
            let t = s.scale(beta);
            for i in 0..len {
                let upd = t * v[i].conj();
                q[(j, k + 1 + i)] -= upd;
            }
        }
    }

    // Extract the tridiagonal and absorb subdiagonal phases into Q so that
    // the off-diagonal becomes real nonnegative: with p_{k+1} = p_k phase(t_k)
    // the transform D = diag(p) gives (D^H T D)[k+1,k] = |t_k|.
    let d: Vec<f64> = (0..n).map(|i| a[(i, i)].re()).collect();
    let mut e: Vec<f64> = vec![0.0; n.saturating_sub(1)];
    let mut p = T::one();
    for k in 0..n.saturating_sub(1) {
        let t = a[(k + 1, k)];
        let mag = t.abs();
        e[k] = mag;
        let phase = if mag == 0.0 {
            T::one()
        } else {
            t.scale(1.0 / mag)
        };
        p = p * phase;
        for i in 0..n {
            let scaled = q[(i, k + 1)] * p;
            q[(i, k + 1)] = scaled;
        }
    }

    (d, e, q)
}

/// Implicit-shift QL iteration on a real symmetric tridiagonal, rotations
/// accumulated into the columns of `z`.
fn ql_implicit<T: Entry>(d: &mut [f64], e: &mut [f64], z: &mut DMat<T>) -> Result<(), LaError> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    let mut ework = vec![0.0; n];
    ework[..n - 1].copy_from_slice(e);

    for l in 0..n {
        let mut iter = 0usize;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if ework[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 30 * n {
                return Err(LaError::NonConvergence { dim: n });
            }

            // Wilkinson shift from the leading 2x2 of the active block.
            let mut g = (d[l + 1] - d[l]) / (2.0 * ework[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + ework[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);

            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * ework[i];
                let b = c * ework[i];
                r = f.hypot(g);
                ework[i + 1] = r;
                if r == 0.0 {
                    // Rotation chase underflowed; deflate here and retry.
                    d[i + 1] -= p;
                    ework[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;

                for k in 0..z.rows() {
                    let zi = z[(k, i)];
                    let zi1 = z[(k, i + 1)];
                    z[(k, i + 1)] = zi.scale(s) + zi1.scale(c);
                    z[(k, i)] = zi.scale(c) - zi1.scale(s);
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            ework[l] = g;
            ework[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;
    use num_complex::Complex64 as C;

    #[test]
    fn diagonal_spectrum() {
        let m = RMat::from_rows(&[&[-2.0, 0.0], &[0.0, 5.0]]);
        let (vals, _) = hermitian_eig_real(&m).unwrap();
        assert!((vals[0] + 2.0).abs() < 1e-14);
        assert!((vals[1] - 5.0).abs() < 1e-14);
    }

    #[test]
    fn exchange_matrix_spectrum() {
        let m = RMat::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let (vals, vecs) = hermitian_eig_real(&m).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
        let recon_err = reconstruct_err(&m, &vals, &vecs);
        assert!(recon_err < 1e-13);
    }

    #[test]
    fn tridiagonal_toeplitz_closed_form() {
        // diag -2, offdiag 1, size 10: eigenvalues 2 cos(k pi / 11) - 2.
        let n = 10;
        let m = RMat::from_fn(n, n, |i, j| {
            if i == j {
                -2.0
            } else if i.abs_diff(j) == 1 {
                1.0
            } else {
                0.0
            }
        });
        let (vals, vecs) = hermitian_eig_real(&m).unwrap();
        let mut expected: Vec<f64> = (1..=n)
            .map(|k| 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos() - 2.0)
            .collect();
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (have, want) in vals.iter().zip(&expected) {
            assert!((have - want).abs() < 1e-12, "have {have} want {want}");
        }
        assert!(reconstruct_err(&m, &vals, &vecs) < 1e-12);
    }

    #[test]
    fn rejects_nonhermitian() {
        let m = RMat::from_rows(&[&[0.0, 1.0], &[2.0, 0.0]]);
        assert!(matches!(
            hermitian_eig_real(&m),
            Err(LaError::NotHermitian { .. })
        ));
    }

    #[test]
    fn random_real_symmetric_reconstruction() {
        for seed in 0..20 {
            let n = 3 + (seed as usize % 12);
            let mut rng = CounterRng::new(500 + seed);
            let g = RMat::from_fn(n, n, |_, _| rng.normal());
            let m = {
                let mut s = g.add(&g.transpose());
                s.scale_assign(0.5);
                s
            };
            let (vals, vecs) = hermitian_eig_real(&m).unwrap();
            let err = reconstruct_err(&m, &vals, &vecs);
            assert!(
                err <= 1e-10 * m.frobenius_norm().max(1.0),
                "seed {seed}: {err}"
            );
            let orth = vecs
                .adjoint_matmul(&vecs)
                .sub(&RMat::identity(n))
                .frobenius_norm();
            assert!(orth < 1e-12 * n as f64, "seed {seed}: {orth}");
        }
    }

    #[test]
    fn random_complex_hermitian_reconstruction() {
        for seed in 0..10 {
            let n = 4 + (seed as usize % 8);
            let mut rng = CounterRng::new(900 + seed);
            let g = CMat::from_fn(n, n, |_, _| C::new(rng.normal(), rng.normal()));
            let mut m = g.add(&g.adjoint());
            m.scale_assign(0.5);
            let (vals, vecs) = hermitian_eig(&m).unwrap();
            // M V = V diag
            let mv = m.matmul(&vecs);
            let mut vd = vecs.clone();
            for j in 0..n {
                for i in 0..n {
                    vd[(i, j)] = vd[(i, j)].scale(vals[j]);
                }
            }
            let err = mv.sub(&vd).frobenius_norm();
            assert!(
                err <= 1e-10 * m.frobenius_norm().max(1.0),
                "seed {seed}: {err}"
            );
            let orth = vecs
                .adjoint_matmul(&vecs)
                .sub(&CMat::identity(n))
                .frobenius_norm();
            assert!(orth < 1e-12 * n as f64, "seed {seed}: {orth}");
        }
    }

    #[test]
    fn alpha_of_skew_matrix_is_zero() {
        let m = RMat::from_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        assert!(symmetric_alpha(&m).unwrap().abs() < 1e-14);
    }

    fn reconstruct_err(m: &RMat, vals: &[f64], vecs: &RMat) -> f64 {
        let mv = m.matmul(vecs);
        let mut vd = vecs.clone();
        for j in 0..vecs.cols() {
            for i in 0..vecs.rows() {
                vd[(i, j)] *= vals[j];
            }
        }
        mv.sub(&vd).frobenius_norm()
    }
}
