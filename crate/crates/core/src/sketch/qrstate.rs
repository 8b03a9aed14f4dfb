//! Incremental QR factorization of the sketched Krylov basis.

use super::SketchError;
use crate::la::{householder_qr, RMat};

/// QR state `Q T` of the sketched basis `S [U_1, ..., U_d]`, extended one
/// block column at a time by block Gram–Schmidt with one full
/// reorthogonalization pass. `Q` is `s x m` with orthonormal columns and
/// `T` is `m x m` upper triangular.
#[derive(Debug, Clone)]
pub struct SketchedQRState {
    s: usize,
    q: RMat,
    t: RMat,
}

impl SketchedQRState {
    pub fn new(s: usize) -> Self {
        SketchedQRState {
            s,
            q: RMat::zeros(s, 0),
            t: RMat::zeros(0, 0),
        }
    }

    pub fn ncols(&self) -> usize {
        self.q.cols()
    }

    pub fn q(&self) -> &RMat {
        &self.q
    }

    pub fn t(&self) -> &RMat {
        &self.t
    }

    /// Leading `m0 x m0` principal block of `T`.
    pub fn t_leading(&self, m0: usize) -> RMat {
        self.t.block(0, m0, 0, m0)
    }

    /// Diagonal block `tau_j` of width `r` starting at column `j0`.
    pub fn tau_block(&self, j0: usize, r: usize) -> RMat {
        self.t.block(j0, j0 + r, j0, j0 + r)
    }

    /// Append a sketched block column `W` (`s x r`). Returns the new block
    /// column of `T`: the coupling `t` against the existing columns
    /// (`m_old x r`) and the local upper-triangular `tau` (`r x r`).
    pub fn append(&mut self, w: &RMat) -> Result<(RMat, RMat), SketchError> {
        if w.rows() != self.s {
            return Err(SketchError::DimensionMismatch {
                expected: format!("{} rows", self.s),
                got: format!("{} rows", w.rows()),
            });
        }
        let m_old = self.q.cols();
        let r = w.cols();
        let wnorm = w.frobenius_norm();

        // Block Gram-Schmidt with one full reorthogonalization pass.
        let t1 = self.q.adjoint_matmul(w);
        let mut w1 = w.sub(&self.q.matmul(&t1));
        let t2 = self.q.adjoint_matmul(&w1);
        w1 = w1.sub(&self.q.matmul(&t2));
        let t = t1.add(&t2);

        let (qn, tau) = householder_qr(&w1, true);
        for i in 0..r {
            if tau[(i, i)] < 1e-14 * wnorm {
                return Err(SketchError::Breakdown { column: m_old + i });
            }
        }

        // Extend Q and T.
        self.q = self.q.hcat(&qn);
        let mut t_new = RMat::zeros(m_old + r, m_old + r);
        t_new.set_block(0, 0, &self.t);
        t_new.set_block(0, m_old, &t);
        t_new.set_block(m_old, m_old, &tau);
        self.t = t_new;

        Ok((t, tau))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;

    #[test]
    fn first_append_is_plain_qr() {
        let mut rng = CounterRng::new(1);
        let w = RMat::from_fn(30, 2, |_, _| rng.normal());
        let mut st = SketchedQRState::new(30);
        let (t, tau) = st.append(&w).unwrap();
        assert_eq!(t.rows(), 0);
        let (_, r) = householder_qr(&w, true);
        assert!(tau.sub(&r).frobenius_norm() < 1e-13 * r.frobenius_norm());
        assert!(st.q().matmul(st.t()).sub(&w).frobenius_norm() < 1e-12);
    }

    #[test]
    fn dependent_column_breaks_down() {
        let mut rng = CounterRng::new(2);
        let w = RMat::from_fn(20, 1, |_, _| rng.normal());
        let mut st = SketchedQRState::new(20);
        st.append(&w).unwrap();
        match st.append(&w) {
            Err(SketchError::Breakdown { column }) => assert_eq!(column, 1),
            other => panic!("expected breakdown, got {other:?}"),
        }
    }

    #[test]
    fn forty_appends_reconstruct_and_stay_orthogonal() {
        let s = 200;
        let mut st = SketchedQRState::new(s);
        let mut stacked = RMat::zeros(s, 0);
        let mut rng = CounterRng::new(3);
        for _ in 0..40 {
            let w = RMat::from_fn(s, 1, |_, _| rng.normal());
            stacked = stacked.hcat(&w);
            st.append(&w).unwrap();
        }
        let m = st.ncols();
        assert_eq!(m, 40);
        let recon = st.q().matmul(st.t()).sub(&stacked).frobenius_norm();
        assert!(
            recon <= 1e-10 * stacked.frobenius_norm(),
            "reconstruction {recon}"
        );
        let orth = st
            .q()
            .adjoint_matmul(st.q())
            .sub(&RMat::identity(m))
            .frobenius_norm();
        assert!(orth <= 1e-10 * m as f64, "orthogonality {orth}");
        // T upper triangular
        for j in 0..m {
            for i in j + 1..m {
                assert_eq!(st.t()[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn block_appends_r2() {
        let s = 60;
        let mut st = SketchedQRState::new(s);
        let mut stacked = RMat::zeros(s, 0);
        let mut rng = CounterRng::new(4);
        for _ in 0..7 {
            let w = RMat::from_fn(s, 2, |_, _| rng.normal());
            stacked = stacked.hcat(&w);
            st.append(&w).unwrap();
        }
        let recon = st.q().matmul(st.t()).sub(&stacked).frobenius_norm();
        assert!(recon <= 1e-10 * stacked.frobenius_norm());
    }
}
