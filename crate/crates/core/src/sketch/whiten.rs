//! Incremental update of the whitened Hessenberg matrix
//! `Hhat_d = T_d H_d T_d^{-1}`.
//!
//! When the Hessenberg matrix gains a column and the sketched QR gains a
//! block, the similarity is not recomputed from scratch. With
//! `T_{d+1} = [[T_d, t_h], [0, tau_{d+1}]]` a direct computation gives
//!
//! ```text
//! Hhat_{d+1} = [ Hhat_d + t_h h_sub tau_d^{-1} E_d^T   hhat_new ]
//!              [ tau_{d+1} h_sub tau_d^{-1} E_d^T      tau_{d+1}(h_dd - h_sub tau_d^{-1} E_d^T t_h) tau_{d+1}^{-1} ]
//! ```
//!
//! with `hhat_new = -(Hhat_d + t_h h_sub tau_d^{-1} E_d^T) t_h tau_{d+1}^{-1}
//!   + T_d h_col tau_{d+1}^{-1} + t_h h_dd tau_{d+1}^{-1}`,
//! where `h_sub = h_{d+1,d}`, `h_col` is the above-diagonal part of the new
//! Hessenberg column and `h_dd = h_{d+1,d+1}`. The signs follow from the
//! block inverse of `T_{d+1}`, whose off-diagonal block is
//! `-T_d^{-1} t_h tau_{d+1}^{-1}`.

use super::SketchError;
use crate::la::{Entry, RMat};

/// One whitening transition. Arguments:
///
/// * `hhat_d` — current whitened Hessenberg, `dr x dr`;
/// * `t_u_d` — leading `dr x dr` triangular factor of the sketched QR;
/// * `t_h`, `tau_d1` — block column of `T` gained when block `U_{d+1}` was
///   appended (`dr x r` coupling and `r x r` diagonal);
/// * `tau_d` — previous diagonal block of `T` (`r x r`);
/// * `h_col` — new Hessenberg column `[h_{1,d+1}; ...; h_{d+1,d+1}]`,
///   `(d+1)r x r`;
/// * `h_sub` — subdiagonal block `h_{d+1,d}`, `r x r`.
///
/// Returns `(Hhat_{d+1}, corr)` where `corr = t_h h_sub tau_d^{-1}` is the
/// rank correction that turns `Hhat_d` into the projected matrix
/// `Hhat_d + corr E_d^T`.
pub fn whiten_hessenberg_update(
    hhat_d: &RMat,
    t_u_d: &RMat,
    t_h: &RMat,
    tau_d: &RMat,
    tau_d1: &RMat,
    h_col: &RMat,
    h_sub: &RMat,
) -> Result<(RMat, RMat), SketchError> {
    let dr = hhat_d.rows();
    let r = h_sub.rows();
    assert_eq!(hhat_d.cols(), dr);
    assert_eq!(t_h.rows(), dr);
    assert_eq!(t_h.cols(), r);
    assert_eq!(h_col.rows(), dr + r);
    assert_eq!(h_col.cols(), r);

    let tau_d_inv = invert_tau(tau_d)?;
    let tau_d1_inv = invert_tau(tau_d1)?;

    // corr = t_h h_sub tau_d^{-1}
    let corr = t_h.matmul(&h_sub.matmul(&tau_d_inv));

    // m11 = Hhat_d + corr E_d^T (adds into the last block column)
    let mut m11 = hhat_d.clone();
    for j in 0..r {
        for i in 0..dr {
            m11[(i, dr - r + j)] += corr[(i, j)];
        }
    }

    let h_col_top = h_col.block(0, dr, 0, r);
    let h_dd = h_col.block(dr, dr + r, 0, r);
    let e_d_t_h = t_h.block(dr - r, dr, 0, r); // E_d^T t_h

    // hhat_new = -m11 t_h tau_{d+1}^{-1} + T_d h_col tau_{d+1}^{-1}
    //            + t_h h_dd tau_{d+1}^{-1}
    let new_col = t_u_d
        .matmul(&h_col_top)
        .sub(&m11.matmul(t_h))
        .add(&t_h.matmul(&h_dd))
        .matmul(&tau_d1_inv);

    // bottom row blocks
    let bottom_left = tau_d1.matmul(&h_sub.matmul(&tau_d_inv));
    let bottom_right = tau_d1
        .matmul(&h_dd.sub(&h_sub.matmul(&tau_d_inv.matmul(&e_d_t_h))))
        .matmul(&tau_d1_inv);

    let mut out = RMat::zeros(dr + r, dr + r);
    out.set_block(0, 0, &m11);
    out.set_block(0, dr, &new_col);
    out.set_block(dr, dr - r, &bottom_left);
    out.set_block(dr, dr, &bottom_right);
    Ok((out, corr))
}

/// Inverse of a small upper-triangular block; rejects numerically singular
/// diagonals.
pub(crate) fn invert_tau(tau: &RMat) -> Result<RMat, SketchError> {
    let r = tau.rows();
    let scale = tau.frobenius_norm().max(f64::MIN_POSITIVE);
    for i in 0..r {
        if tau[(i, i)].abs() < 1e-14 * scale {
            return Err(SketchError::SingularTau);
        }
    }
    let mut inv = RMat::zeros(r, r);
    for j in (0..r).rev() {
        inv[(j, j)] = 1.0 / tau[(j, j)];
        for i in (0..j).rev() {
            let mut acc = f64::zero();
            for k in i + 1..=j {
                acc += tau[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = -acc / tau[(i, i)];
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::la::householder_qr;
    use crate::rng::CounterRng;

    /// Direct oracle: build T_{d+1} and H_{d+1} explicitly, run the update
    /// step by step, and compare against T_{d+1} H_{d+1} T_{d+1}^{-1}.
    fn run_direct_comparison(d_final: usize, r: usize, seed: u64) {
        let mut rng = CounterRng::new(seed);
        let n = (d_final + 1) * r;

        // Random block upper Hessenberg H ((d+1) r square).
        let mut h = RMat::zeros(n, n);
        for jb in 0..=d_final {
            for ib in 0..=(jb + 1).min(d_final) {
                for j in 0..r {
                    for i in 0..r {
                        h[(ib * r + i, jb * r + j)] = rng.normal();
                    }
                }
            }
        }
        // Make subdiagonal blocks upper triangular with positive diagonal,
        // as produced by the skinny QR in the Arnoldi step.
        for jb in 0..d_final {
            for j in 0..r {
                for i in j + 1..r {
                    h[((jb + 1) * r + i, jb * r + j)] = 0.0;
                }
                h[((jb + 1) * r + j, jb * r + j)] = 1.0 + rng.uniform();
            }
        }

        // Random invertible upper triangular T ((d+1) r) with positive diag.
        let mut t = RMat::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                t[(i, j)] = if i == j {
                    1.0 + rng.uniform()
                } else {
                    0.3 * rng.normal()
                };
            }
        }

        // Incremental: start at d = 1.
        let t1 = t.block(0, r, 0, r);
        let h1 = h.block(0, r, 0, r);
        let mut hhat = t1.matmul(&h1).matmul(&invert_tau(&t1).unwrap());

        for d in 1..d_final {
            let dr = d * r;
            let t_u_d = t.block(0, dr, 0, dr);
            let t_h = t.block(0, dr, dr, dr + r);
            let tau_d = t.block(dr - r, dr, dr - r, dr);
            let tau_d1 = t.block(dr, dr + r, dr, dr + r);
            let h_col = h.block(0, dr + r, dr, dr + r);
            let h_sub = h.block(dr, dr + r, dr - r, dr);
            let (next, _corr) =
                whiten_hessenberg_update(&hhat, &t_u_d, &t_h, &tau_d, &tau_d1, &h_col, &h_sub)
                    .unwrap();
            hhat = next;
        }

        let m = d_final * r;
        let t_lead = t.block(0, m, 0, m);
        let h_lead = h.block(0, m, 0, m);
        let direct = t_lead.matmul(&h_lead).matmul(&invert_tau_full(&t_lead));
        let err = hhat.sub(&direct).frobenius_norm() / direct.frobenius_norm();
        assert!(err < 1e-9, "relative deviation {err}");
    }

    fn invert_tau_full(t: &RMat) -> RMat {
        // triangular inverse of arbitrary size, test-side
        let n = t.rows();
        let mut inv = RMat::zeros(n, n);
        for j in (0..n).rev() {
            inv[(j, j)] = 1.0 / t[(j, j)];
            for i in (0..j).rev() {
                let mut acc = 0.0;
                for k in i + 1..=j {
                    acc += t[(i, k)] * inv[(k, j)];
                }
                inv[(i, j)] = -acc / t[(i, i)];
            }
        }
        inv
    }

    #[test]
    fn scalar_case_matches_direct_product() {
        run_direct_comparison(4, 1, 91);
    }

    #[test]
    fn block_case_matches_direct_product() {
        run_direct_comparison(4, 2, 92);
    }

    #[test]
    fn orthonormal_basis_reduces_to_plain_hessenberg() {
        // T = identity (exact sketch of an orthonormal basis): the update
        // must reproduce H and a zero correction.
        let mut rng = CounterRng::new(93);
        let d = 3;
        let n = d + 1;
        let mut h = RMat::zeros(n, n);
        for j in 0..n {
            for i in 0..=(j + 1).min(n - 1) {
                h[(i, j)] = rng.normal();
            }
        }
        let eye = |k: usize| RMat::identity(k);
        let mut hhat = h.block(0, 1, 0, 1);
        for dd in 1..d {
            let t_h = RMat::zeros(dd, 1);
            let (next, corr) = whiten_hessenberg_update(
                &hhat,
                &eye(dd),
                &t_h,
                &eye(1),
                &eye(1),
                &h.block(0, dd + 1, dd, dd + 1),
                &h.block(dd, dd + 1, dd - 1, dd),
            )
            .unwrap();
            assert_eq!(corr.frobenius_norm(), 0.0);
            hhat = next;
        }
        let want = h.block(0, d, 0, d);
        assert!(hhat.sub(&want).frobenius_norm() < 1e-13);
    }

    #[test]
    fn singular_tau_is_rejected() {
        let tau = RMat::from_rows(&[&[0.0]]);
        assert!(matches!(invert_tau(&tau), Err(SketchError::SingularTau)));
        let q = householder_qr(&RMat::identity(2), true).1;
        assert!(invert_tau(&q).is_ok());
    }
}
