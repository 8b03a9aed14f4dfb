//! Shared iteration machinery for the three engines.
//!
//! A [`SylvesterSession`] owns one truncated Arnoldi recurrence per
//! coefficient matrix, plus (for the sketched engine) a sketching operator,
//! the incremental QR of the sketched basis and the whitened Hessenberg
//! state per side. The high-level solvers drive it step by step; the
//! analysis diagnostics use it directly to reach the projected matrices.

use super::arnoldi::ArnoldiFactorization;
use super::mem::MemCounter;
use super::{Engine, SolveError, SolverConfig};
use crate::la::{householder_qr, solve_sylvester_dense, svd, LaError, RMat};
use crate::sketch::{
    measure_distortion, whiten_hessenberg_update, SketchKind, SketchOperator, SketchedQRState,
};
use crate::sparse::{spmv_block, SparseMatrix};

/// Whitening bookkeeping for one side of the sketched engine.
struct SketchSide {
    op: SketchOperator,
    qr: SketchedQRState,
    /// Whitened Hessenberg `Hhat_d = T_d H_d T_d^{-1}` (`dr x dr`).
    hhat: RMat,
    /// Rank correction `T_H h_{d+1,d} tau_d^{-1}` for the projected matrix.
    corr: RMat,
    /// Whitened subdiagonal `tau_{d+1} h_{d+1,d} tau_d^{-1}`.
    h_eff: RMat,
    /// `T` column block and diagonal from the latest append.
    pend_th: RMat,
    pend_tau: RMat,
    /// Diagonal block from the append before that.
    prev_tau: RMat,
    /// Projected right-hand-side coefficient `tau_1 ell`.
    beta: RMat,
}

impl SketchSide {
    fn init(op: SketchOperator, b0: &RMat, ell: &RMat) -> Result<Self, SolveError> {
        let mut qr = SketchedQRState::new(op.sketch_dim());
        let sb = op.apply(b0)?;
        let (_t, tau1) = qr.append(&sb)?;
        let r = b0.cols();
        let beta = tau1.matmul(ell);
        Ok(SketchSide {
            op,
            qr,
            hhat: RMat::zeros(0, 0),
            corr: RMat::zeros(0, 0),
            h_eff: RMat::zeros(r, r),
            pend_th: RMat::zeros(0, r),
            pend_tau: tau1,
            prev_tau: RMat::zeros(0, 0),
            beta,
        })
    }

    /// Advance the whitening state after Arnoldi step `t` (1-based) of the
    /// owning factorization. `fact` has already committed Hessenberg column
    /// `t-1`; `new_block` is the freshly committed basis block, or `None`
    /// on lucky breakdown.
    fn advance(
        &mut self,
        fact: &ArnoldiFactorization,
        new_block: Option<&RMat>,
    ) -> Result<(), SolveError> {
        let t = fact.d();
        let r = fact.r();

        // Whitened Hessenberg for dimension t, from the pre-append state.
        if t == 1 {
            // Hhat_1 = tau_1 h_00 tau_1^{-1}
            let h00 = fact.hess().block(0, r, 0, r);
            let tau1_inv = crate::sketch::invert_tau(&self.pend_tau)?;
            self.hhat = self.pend_tau.matmul(&h00).matmul(&tau1_inv);
        } else {
            let h_col = fact.hess().block(0, t * r, (t - 1) * r, t * r);
            let h_sub_prev = fact.h_sub(t - 2);
            let t_lead = self.qr.t_leading((t - 1) * r);
            let (hhat_next, _corr_prev) = whiten_hessenberg_update(
                &self.hhat,
                &t_lead,
                &self.pend_th,
                &self.prev_tau,
                &self.pend_tau,
                &h_col,
                &h_sub_prev,
            )?;
            self.hhat = hhat_next;
        }

        match new_block {
            Some(b) => {
                let sb = self.op.apply(b)?;
                let (th, tau) = self.qr.append(&sb)?;
                let h_sub = fact.h_sub_latest();
                let prev_inv = crate::sketch::invert_tau(&self.pend_tau)?;
                self.corr = th.matmul(&h_sub).matmul(&prev_inv);
                self.h_eff = tau.matmul(&h_sub).matmul(&prev_inv);
                self.prev_tau = std::mem::replace(&mut self.pend_tau, tau);
                self.pend_th = th;
            }
            None => {
                // Lucky breakdown: h_{d+1,d} = 0, so both the correction and
                // the effective subdiagonal vanish.
                self.corr = RMat::zeros(t * r, r);
                self.h_eff = RMat::zeros(r, r);
            }
        }
        Ok(())
    }

    /// Projected matrix `Hhat_d + corr E_d^T`.
    fn projected_matrix(&self) -> RMat {
        let dr = self.hhat.rows();
        let r = self.corr.cols();
        let mut m = self.hhat.clone();
        for j in 0..r {
            for i in 0..dr {
                m[(i, dr - r + j)] += self.corr[(i, j)];
            }
        }
        m
    }
}

/// Result of one projected solve.
#[derive(Debug, Clone)]
pub struct ProjectedSolve {
    /// Projected solution of the reduced Sylvester equation (`dr x dr`).
    pub y: RMat,
    /// Absolute residual estimate (engine-specific formula).
    pub rho_abs: f64,
    /// `||beta1 beta2^T||_F`, the reference scale for relative residuals.
    pub rhs_norm: f64,
    /// Left and right projected coefficient matrices.
    pub h: RMat,
    pub g: RMat,
    /// Subdiagonal coefficients entering the estimator.
    pub h_next: RMat,
    pub g_next: RMat,
}

/// Per-check diagnostics recorded in verification mode.
#[derive(Debug, Clone)]
pub struct VerifyCheck {
    pub d: usize,
    pub rho_abs: f64,
    /// Explicit `||A X + X B - C1 C2^T||_F`.
    pub explicit_res: f64,
    /// Explicit `||S_U R S_V^T||_F` (sketched engine).
    pub explicit_sketched_res: Option<f64>,
    /// Measured embedding distortions on the exact (d+1)-block Krylov
    /// bases.
    pub eps_u: Option<f64>,
    pub eps_v: Option<f64>,
    /// Condition numbers of the whitened bases.
    pub kappa_u: Option<f64>,
    pub kappa_v: Option<f64>,
    /// `||C1 C2^T||_F` (true residual scale).
    pub c_norm: f64,
}

/// One in-flight Sylvester solve.
pub struct SylvesterSession<'a> {
    pub(crate) a: &'a SparseMatrix,
    pub(crate) b: &'a SparseMatrix,
    c1: &'a RMat,
    c2: &'a RMat,
    cfg: SolverConfig,
    counter: MemCounter,
    fact_u: ArnoldiFactorization,
    fact_v: ArnoldiFactorization,
    sk_u: Option<SketchSide>,
    sk_v: Option<SketchSide>,
    breakdown: bool,
}

impl<'a> SylvesterSession<'a> {
    pub fn new(
        a: &'a SparseMatrix,
        b: &'a SparseMatrix,
        c1: &'a RMat,
        c2: &'a RMat,
        cfg: &SolverConfig,
    ) -> Result<Self, SolveError> {
        cfg.validate()?;
        if a.n_rows() != a.n_cols() || b.n_rows() != b.n_cols() {
            return Err(SolveError::Config("coefficients must be square".into()));
        }
        if c1.rows() != a.n_rows() || c2.rows() != b.n_rows() || c1.cols() != c2.cols() {
            return Err(SolveError::Config(
                "right-hand side dimensions mismatch".into(),
            ));
        }
        let counter = MemCounter::new();
        let (k_a, k_b) = match cfg.engine {
            Engine::Full => (cfg.maxit, cfg.maxit),
            Engine::Truncated => (cfg.k, cfg.k_b.unwrap_or(cfg.k)),
            Engine::Sketched => (cfg.k, cfg.k),
        };
        let fact_u = ArnoldiFactorization::init(c1, k_a, cfg.maxit, &counter, cfg.verify)?;
        let fact_v = ArnoldiFactorization::init(c2, k_b, cfg.maxit, &counter, cfg.verify)?;

        let (sk_u, sk_v) = if cfg.engine == Engine::Sketched {
            let build = |n: usize, seed: u64| -> SketchOperator {
                match cfg.sketch_kind {
                    SketchKind::Gaussian => SketchOperator::gaussian(n, cfg.s.min(n), seed),
                    SketchKind::Srdct => {
                        SketchOperator::srdct(n, cfg.s.min(n), seed, cfg.paper_literal_scale)
                    }
                    SketchKind::Exact => SketchOperator::exact(n),
                }
            };
            let op_u = build(a.n_rows(), cfg.sketch_seed);
            let op_v = build(b.n_rows(), cfg.sketch_seed.wrapping_add(1));
            (
                Some(SketchSide::init(op_u, fact_u.latest_block(), fact_u.ell())?),
                Some(SketchSide::init(op_v, fact_v.latest_block(), fact_v.ell())?),
            )
        } else {
            (None, None)
        };

        Ok(SylvesterSession {
            a,
            b,
            c1,
            c2,
            cfg: cfg.clone(),
            counter,
            fact_u,
            fact_v,
            sk_u,
            sk_v,
            breakdown: false,
        })
    }

    pub fn d(&self) -> usize {
        debug_assert_eq!(self.fact_u.d(), self.fact_v.d());
        self.fact_u.d()
    }

    pub fn r(&self) -> usize {
        self.fact_u.r()
    }

    pub fn engine(&self) -> Engine {
        self.cfg.engine
    }

    pub fn counter(&self) -> &MemCounter {
        &self.counter
    }

    pub fn had_breakdown(&self) -> bool {
        self.breakdown
    }

    pub fn fact_u(&self) -> &ArnoldiFactorization {
        &self.fact_u
    }

    pub fn fact_v(&self) -> &ArnoldiFactorization {
        &self.fact_v
    }

    /// `||C1 C2^T||_F = ||ell_1 ell_2^T||_F`.
    pub fn c_norm(&self) -> f64 {
        self.fact_u
            .ell()
            .matmul(&self.fact_v.ell().transpose())
            .frobenius_norm()
    }

    /// Projected right-hand-side coefficients.
    pub fn betas(&self) -> (RMat, RMat) {
        match (&self.sk_u, &self.sk_v) {
            (Some(u), Some(v)) => (u.beta.clone(), v.beta.clone()),
            _ => (self.fact_u.ell().clone(), self.fact_v.ell().clone()),
        }
    }

    /// Advance both recurrences by one step. Returns true if a lucky
    /// breakdown occurred on either side (the caller should solve the
    /// projected problem and stop).
    pub fn step(&mut self) -> Result<bool, SolveError> {
        let out_u = self.fact_u.step(self.a, false, &self.counter)?;
        let out_v = self.fact_v.step(self.b, true, &self.counter)?;
        if let Some(sk) = &mut self.sk_u {
            let nb = if out_u.breakdown {
                None
            } else {
                Some(self.fact_u.latest_block())
            };
            sk.advance(&self.fact_u, nb)?;
        }
        if let Some(sk) = &mut self.sk_v {
            let nb = if out_v.breakdown {
                None
            } else {
                Some(self.fact_v.latest_block())
            };
            sk.advance(&self.fact_v, nb)?;
        }
        if out_u.breakdown || out_v.breakdown {
            self.breakdown = true;
        }
        Ok(self.breakdown)
    }

    /// Solve the projected equation on the current spaces and evaluate the
    /// engine's residual estimate.
    pub fn solve_projected(&self) -> Result<ProjectedSolve, LaError> {
        let d = self.d();
        let r = self.r();
        let (beta1, beta2) = self.betas();

        let (h, g, h_next, g_next) = match (&self.sk_u, &self.sk_v) {
            (Some(u), Some(v)) => (
                u.projected_matrix(),
                v.projected_matrix(),
                u.h_eff.clone(),
                v.h_eff.clone(),
            ),
            _ => (
                self.fact_u.h_square(),
                self.fact_v.h_square(),
                self.fact_u.h_sub_latest(),
                self.fact_v.h_sub_latest(),
            ),
        };

        let mut rhs = RMat::zeros(d * r, d * r);
        rhs.set_block(0, 0, &beta1.matmul(&beta2.transpose()));
        let y = solve_sylvester_dense(&h, &g, &rhs)?;

        let rho_abs = match self.cfg.engine {
            Engine::Truncated => super::residual_bound_truncated(&y, &h_next, &g_next, d, r),
            _ => super::residual_norm_sketched(&y, &h_next, &g_next, d, r),
        };
        let rhs_norm = beta1.matmul(&beta2.transpose()).frobenius_norm();
        Ok(ProjectedSolve {
            y,
            rho_abs,
            rhs_norm,
            h,
            g,
            h_next,
            g_next,
        })
    }

    /// Map the projected solution to the coefficients of the retained
    /// basis: identity for the plain engines,
    /// `T_U^{-1} Y T_V^{-T}` for the sketched one.
    pub fn dewhiten(&self, y: &RMat) -> Result<RMat, SolveError> {
        match (&self.sk_u, &self.sk_v) {
            (Some(u), Some(v)) => {
                let dr = y.rows();
                let tu_inv = invert_triangular(&u.qr.t_leading(dr));
                let tv_inv = invert_triangular(&v.qr.t_leading(dr));
                Ok(tu_inv.matmul(y).matmul(&tv_inv.transpose()))
            }
            _ => Ok(y.clone()),
        }
    }

    /// Whitening factors `T_{U,d}` and `T_{V,d}` (sketched engine only).
    pub fn whitening_factors(&self) -> Option<(RMat, RMat)> {
        let d = self.d();
        let r = self.r();
        match (&self.sk_u, &self.sk_v) {
            (Some(u), Some(v)) => Some((u.qr.t_leading(d * r), v.qr.t_leading(d * r))),
            _ => None,
        }
    }

    /// Full triangular factor of the sketched QR, left space.
    pub fn sketch_qr_t_u(&self) -> Option<&RMat> {
        self.sk_u.as_ref().map(|s| s.qr.t())
    }

    /// Full triangular factor of the sketched QR, right space.
    pub fn sketch_qr_t_v(&self) -> Option<&RMat> {
        self.sk_v.as_ref().map(|s| s.qr.t())
    }

    pub fn sketch_ops(&self) -> Option<(&SketchOperator, &SketchOperator)> {
        match (&self.sk_u, &self.sk_v) {
            (Some(u), Some(v)) => Some((&u.op, &v.op)),
            _ => None,
        }
    }

    /// Verification-mode diagnostics at the current dimension.
    pub fn verify_check(&self, ps: &ProjectedSolve) -> Result<VerifyCheck, SolveError> {
        let d = self.d();
        let r = self.r();
        let shadow_u_len = self.fact_u.shadow_len().unwrap_or(0);
        let shadow_v_len = self.fact_v.shadow_len().unwrap_or(0);
        let u_shadow = self
            .fact_u
            .shadow_stack((d + 1).min(shadow_u_len))
            .ok_or(SolveError::VerifyUnavailable("explicit residual"))?;
        let v_shadow = self
            .fact_v
            .shadow_stack((d + 1).min(shadow_v_len))
            .ok_or(SolveError::VerifyUnavailable("explicit residual"))?;
        let u_d = u_shadow.block(0, u_shadow.rows(), 0, d * r);
        let v_d = v_shadow.block(0, v_shadow.rows(), 0, d * r);

        // Left factor of X: U_d W with W = Y (plain) or T_U^{-1} Y T_V^{-T}.
        let w = self.dewhiten(&ps.y)?;
        let xl = u_d.matmul(&w);
        let xr = v_d.clone();

        // R = [A xl, xl, C1] [xr, B^T xr, -C2]^T
        let axl = spmv_block(self.a, &xl, false)?;
        let btxr = spmv_block(self.b, &xr, true)?;
        let mut negc2 = self.c2.clone();
        negc2.scale_assign(-1.0);
        let left = axl.hcat(&xl).hcat(self.c1);
        let right = xr.hcat(&btxr).hcat(&negc2);
        let explicit_res = product_norm(&left, &right);

        let (mut explicit_sk, mut eps_u, mut eps_v, mut kappa_u, mut kappa_v) =
            (None, None, None, None, None);
        if let (Some(su), Some(sv)) = (&self.sk_u, &self.sk_v) {
            let sl = su.op.apply(&left)?;
            let sr = sv.op.apply(&right)?;
            explicit_sk = Some(sl.matmul(&sr.transpose()).frobenius_norm());

            // Distortions on the exact Krylov bases (orthonormalized
            // shadow stacks).
            let qu = householder_qr(&u_shadow, true).0;
            let qv = householder_qr(&v_shadow, true).0;
            eps_u = Some(measure_distortion(&su.op, &qu)?);
            eps_v = Some(measure_distortion(&sv.op, &qv)?);

            // Condition numbers of the whitened bases U_d T_U^{-1}.
            let (tu, tv) = self.whitening_factors().expect("sketched engine");
            kappa_u = Some(cond2(&u_d.matmul(&invert_triangular(&tu))));
            kappa_v = Some(cond2(&v_d.matmul(&invert_triangular(&tv))));
        }

        Ok(VerifyCheck {
            d,
            rho_abs: ps.rho_abs,
            explicit_res,
            explicit_sketched_res: explicit_sk,
            eps_u,
            eps_v,
            kappa_u,
            kappa_v,
            c_norm: self.c_norm(),
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// Drop both basis windows (before a two-pass reconstruction).
    pub fn release_windows(&mut self) {
        self.fact_u.release_window();
        self.fact_v.release_window();
    }
}

/// `||L R^T||_F` through thin QR of both factors (backward stable, avoids
/// forming the n x n product).
pub(crate) fn product_norm(left: &RMat, right: &RMat) -> f64 {
    let (_, rl) = householder_qr(left, true);
    let (_, rr) = householder_qr(right, true);
    rl.matmul(&rr.transpose()).frobenius_norm()
}

pub(crate) fn invert_triangular(t: &RMat) -> RMat {
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

pub(crate) fn cond2(m: &RMat) -> f64 {
    let dec = svd(m);
    let smax = dec.sigma.first().copied().unwrap_or(0.0);
    let smin = dec.sigma.last().copied().unwrap_or(0.0);
    if smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}
