//! Dense Sylvester solver `H Y + Y G^T = C` in Bartels–Stewart style:
//! complex Schur triangularization of both coefficients followed by
//! column-wise back substitution.

use super::{complex_schur_c, CMat, LaError, RMat};
use num_complex::Complex64 as C;

/// Solve `H Y + Y G^T = C` for real inputs.
///
/// `H` is m x m, `G` is p x p, `C` is m x p. Fails with
/// [`LaError::SingularOperator`] when the spectra of `H` and `-G^T` overlap,
/// detected as `|r_ii + s_jj| < 1e-14 (||H|| + ||G||)` during back
/// substitution. The result is real (imaginary roundoff discarded).
pub fn solve_sylvester_dense(h: &RMat, g: &RMat, c: &RMat) -> Result<RMat, LaError> {
    let y = solve_sylvester_complex(&h.to_complex(), &g.to_complex(), &c.to_complex())?;
    Ok(y.real_part())
}

/// Complex variant: solves `H Y + Y G^T = C` where `G^T` denotes the plain
/// (unconjugated) transpose, matching the real convention under promotion.
pub fn solve_sylvester_complex(h: &CMat, g: &CMat, c: &CMat) -> Result<CMat, LaError> {
    let m = h.rows();
    let p = g.rows();
    assert!(
        h.is_square() && g.is_square(),
        "coefficients must be square"
    );
    assert!(
        c.rows() == m && c.cols() == p,
        "rhs must be {m}x{p}, got {}x{}",
        c.rows(),
        c.cols()
    );
    if m == 0 || p == 0 {
        return Ok(CMat::zeros(m, p));
    }

    let sh = complex_schur_c(h)?;
    let sg = complex_schur_c(g)?;
    let (qh, rh) = (&sh.q, &sh.r);
    let (qg, rg) = (&sg.q, &sg.r);

    // With H = Qh Rh Qh^H and G = Qg Rg Qg^H:
    //   Rh Yt + Yt Rg^T = Qh^H C conj(Qg),  Y = Qh Yt Qg^T.
    let qg_conj = CMat::from_fn(p, p, |i, j| qg[(i, j)].conj());
    let ct = qh.adjoint_matmul(&c.matmul(&qg_conj));

    let threshold = 1e-14 * (h.frobenius_norm() + g.frobenius_norm());
    let mut yt = CMat::zeros(m, p);

    // Columns are decoupled from the right by the lower-triangular Rg^T:
    // column j only couples to columns k > j, so sweep j from last to first.
    for j in (0..p).rev() {
        let sjj = rg[(j, j)];
        // rhs_j = ct_j - sum_{k > j} yt_k * Rg[j, k]
        let mut rhs: Vec<C> = ct.col(j).to_vec();
        for k in j + 1..p {
            let gjk = rg[(j, k)];
            if gjk != C::new(0.0, 0.0) {
                let ycol = yt.col(k);
                for i in 0..m {
                    rhs[i] -= ycol[i] * gjk;
                }
            }
        }
        // (Rh + sjj I) x = rhs, upper triangular back substitution.
        for i in (0..m).rev() {
            let mut acc = rhs[i];
            for k in i + 1..m {
                acc -= rh[(i, k)] * yt[(k, j)];
            }
            let diag = rh[(i, i)] + sjj;
            if diag.norm() < threshold {
                return Err(LaError::SingularOperator {
                    i,
                    j,
                    value: diag.norm(),
                });
            }
            yt[(i, j)] = acc / diag;
        }
    }

    Ok(qh.matmul(&yt).matmul(&qg.transpose()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;

    #[test]
    fn scalar_case() {
        let h = RMat::from_rows(&[&[-1.0]]);
        let g = RMat::from_rows(&[&[-1.0]]);
        let c = RMat::from_rows(&[&[4.0]]);
        let y = solve_sylvester_dense(&h, &g, &c).unwrap();
        assert!((y[(0, 0)] + 2.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_coefficients_decouple() {
        let h = RMat::from_rows(&[&[2.0, 0.0], &[0.0, -3.0]]);
        let g = RMat::from_rows(&[&[1.0, 0.0, 0.0], &[0.0, 5.0, 0.0], &[0.0, 0.0, -1.0]]);
        let mut rng = CounterRng::new(1);
        let c = RMat::from_fn(2, 3, |_, _| rng.normal());
        let y = solve_sylvester_dense(&h, &g, &c).unwrap();
        for i in 0..2 {
            for j in 0..3 {
                let expected = c[(i, j)] / (h[(i, i)] + g[(j, j)]);
                assert!((y[(i, j)] - expected).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn residual_small_on_seeded_instances() {
        for seed in 0..20 {
            let m = 3 + (seed as usize % 6);
            let p = 2 + (seed as usize % 5);
            let mut rng = CounterRng::new(600 + seed);
            // Shift diagonals to keep spectra of H and -G^T apart.
            let mut h = RMat::from_fn(m, m, |_, _| rng.normal());
            for i in 0..m {
                h[(i, i)] -= 4.0;
            }
            let mut g = RMat::from_fn(p, p, |_, _| rng.normal());
            for i in 0..p {
                g[(i, i)] -= 4.0;
            }
            let c = RMat::from_fn(m, p, |_, _| rng.normal());
            let y = solve_sylvester_dense(&h, &g, &c).unwrap();
            let res = h
                .matmul(&y)
                .add(&y.matmul(&g.transpose()))
                .sub(&c)
                .frobenius_norm();
            let bound = 1e-10 * (h.frobenius_norm() + g.frobenius_norm()) * y.frobenius_norm()
                + 1e-10 * c.frobenius_norm();
            assert!(res <= bound, "seed {seed}: residual {res} > {bound}");
        }
    }

    #[test]
    fn detects_overlapping_spectra() {
        // H = [1], G = [-1]: 1 + (-1) = 0.
        let h = RMat::from_rows(&[&[1.0]]);
        let g = RMat::from_rows(&[&[-1.0]]);
        let c = RMat::from_rows(&[&[1.0]]);
        assert!(matches!(
            solve_sylvester_dense(&h, &g, &c),
            Err(LaError::SingularOperator { .. })
        ));
    }

    #[test]
    fn complex_hermitian_rhs_gives_hermitian_solution() {
        // Lyapunov-type complex equation: H Z + Z H^* = C with C Hermitian.
        let mut rng = CounterRng::new(33);
        let n = 5;
        let mut h = CMat::from_fn(n, n, |_, _| C::new(rng.normal(), rng.normal()));
        for i in 0..n {
            h[(i, i)] -= C::new(6.0, 0.0);
        }
        // G chosen so that G^T = H^H: G = conj(H).
        let g = CMat::from_fn(n, n, |i, j| h[(i, j)].conj());
        let w = CMat::from_fn(n, n, |_, _| C::new(rng.normal(), rng.normal()));
        let cmat = w.matmul(&w.adjoint()); // Hermitian PSD
        let z = solve_sylvester_complex(&h, &g, &cmat).unwrap();
        let herm_dev = z.sub(&z.adjoint()).frobenius_norm();
        assert!(herm_dev < 1e-10 * z.frobenius_norm());
        let res = h
            .matmul(&z)
            .add(&z.matmul(&g.transpose()))
            .sub(&cmat)
            .frobenius_norm();
        assert!(res < 1e-10 * (h.frobenius_norm() * 2.0) * z.frobenius_norm().max(1.0));
    }
}
