//! High-level solve drivers.

use super::session::{ProjectedSolve, SylvesterSession};
use super::twopass::{reconstruct_from_window, two_pass_reconstruct};
use super::{compress_y, Engine, HistEntry, SolveError, SolveResult, SolverConfig, VerifyCheck};
use crate::la::{householder_qr, LaError, RMat};
use crate::sparse::{spmv_block, SparseMatrix};
use std::time::Instant;

/// Solve `A X + X B = C1 C2^T` with the engine selected in `cfg`.
pub fn solve(
    a: &SparseMatrix,
    b: &SparseMatrix,
    c1: &RMat,
    c2: &RMat,
    cfg: &SolverConfig,
) -> Result<SolveResult, SolveError> {
    let t0 = Instant::now();
    let mut session = SylvesterSession::new(a, b, c1, c2, cfg)?;
    let mut history: Vec<HistEntry> = Vec::new();
    let mut verify: Vec<VerifyCheck> = Vec::new();
    let mut converged = false;
    let mut last_solve: Option<(usize, ProjectedSolve)> = None;
    let mut final_rho = f64::INFINITY;
    let mut consecutive_singular = 0usize;

    for t in 1..=cfg.maxit {
        let broke = session.step()?;
        let checkpoint = broke || t % cfg.p == 0 || t == cfg.maxit;
        if checkpoint {
            match session.solve_projected() {
                Ok(ps) => {
                    consecutive_singular = 0;
                    let rho_rel = ps.rho_abs / ps.rhs_norm;
                    let mut true_res = None;
                    if cfg.verify {
                        let check = session.verify_check(&ps)?;
                        true_res = Some(check.explicit_res / check.c_norm);
                        verify.push(check);
                    }
                    history.push(HistEntry {
                        d: t,
                        rho: rho_rel,
                        true_res,
                        wall_s: t0.elapsed().as_secs_f64(),
                        mem_vectors: session.counter().live(),
                    });
                    final_rho = rho_rel;
                    last_solve = Some((t, ps));
                    if rho_rel <= cfg.tol {
                        converged = true;
                    }
                }
                Err(e @ LaError::SingularOperator { .. }) => {
                    // The projected pencil can be transiently ill posed
                    // under sketching; skip the check and keep iterating.
                    consecutive_singular += 1;
                    if consecutive_singular >= 5 {
                        return Err(SolveError::ProjectedSolveStalled { d: t, last: e });
                    }
                }
                Err(e) => return Err(e.into()),
            }
        }
        if converged || broke {
            break;
        }
    }

    // Reconstruction must use the dimension at which the projected
    // solution was actually obtained; the final checkpoints may have been
    // skipped as singular.
    let (d, ps) = match last_solve {
        Some(pair) => pair,
        None => {
            // Every check failed as singular; surface the condition.
            return Err(SolveError::ProjectedSolveStalled {
                d: session.d(),
                last: LaError::SingularOperator {
                    i: 0,
                    j: 0,
                    value: 0.0,
                },
            });
        }
    };

    let r = session.r();
    let w = session.dewhiten(&ps.y)?;
    let (z1, z2, rank) = compress_y(&w, cfg.effective_rank_tol());

    let (x1t, x2t) = match cfg.engine {
        Engine::Full => {
            let x1 = reconstruct_from_window(session.fact_u(), &z1, session.counter());
            let x2 = reconstruct_from_window(session.fact_v(), &z2, session.counter());
            (x1, x2)
        }
        Engine::Truncated | Engine::Sketched => {
            let chunk = cfg.chunk.unwrap_or(cfg.k * r).max(1);
            session.release_windows();
            let (k_a, k_b) = match cfg.engine {
                Engine::Truncated => (cfg.k, cfg.k_b.unwrap_or(cfg.k)),
                _ => (cfg.k, cfg.k),
            };
            let x1 = two_pass_reconstruct(
                a,
                false,
                c1,
                session.fact_u().hess(),
                d,
                r,
                k_a,
                &z1,
                chunk,
                session.counter(),
            )?;
            let x2 = two_pass_reconstruct(
                b,
                true,
                c2,
                session.fact_v().hess(),
                d,
                r,
                k_b,
                &z2,
                chunk,
                session.counter(),
            )?;
            (x1, x2)
        }
    };

    let mem_long_vectors = session.counter().peak();
    let (x1, x2) = (x1t.into_mat(), x2t.into_mat());
    let true_residual = if cfg.compute_true_residual || cfg.verify {
        Some(true_residual_from_factors(a, b, c1, c2, &x1, &x2)?)
    } else {
        None
    };

    Ok(SolveResult {
        x1,
        x2,
        iterations: d,
        rank,
        converged,
        engine: cfg.engine,
        history,
        mem_long_vectors,
        final_rho,
        true_residual,
        verify,
    })
}

pub fn solve_full(
    a: &SparseMatrix,
    b: &SparseMatrix,
    c1: &RMat,
    c2: &RMat,
    cfg: &SolverConfig,
) -> Result<SolveResult, SolveError> {
    let mut cfg = cfg.clone();
    cfg.engine = Engine::Full;
    cfg.k = cfg.maxit;
    solve(a, b, c1, c2, &cfg)
}

pub fn solve_truncated(
    a: &SparseMatrix,
    b: &SparseMatrix,
    c1: &RMat,
    c2: &RMat,
    cfg: &SolverConfig,
) -> Result<SolveResult, SolveError> {
    let mut cfg = cfg.clone();
    cfg.engine = Engine::Truncated;
    solve(a, b, c1, c2, &cfg)
}

pub fn solve_sketched(
    a: &SparseMatrix,
    b: &SparseMatrix,
    c1: &RMat,
    c2: &RMat,
    cfg: &SolverConfig,
) -> Result<SolveResult, SolveError> {
    let mut cfg = cfg.clone();
    cfg.engine = Engine::Sketched;
    solve(a, b, c1, c2, &cfg)
}

/// Relative true residual `||A X1 X2^T + X1 X2^T B - C1 C2^T||_F /
/// ||C1 C2^T||_F` evaluated in factored form.
pub fn true_residual_from_factors(
    a: &SparseMatrix,
    b: &SparseMatrix,
    c1: &RMat,
    c2: &RMat,
    x1: &RMat,
    x2: &RMat,
) -> Result<f64, SolveError> {
    let c_norm = {
        let (_, r1) = householder_qr(c1, true);
        let (_, r2) = householder_qr(c2, true);
        r1.matmul(&r2.transpose()).frobenius_norm()
    };
    if x1.cols() == 0 {
        return Ok(1.0);
    }
    let ax1 = spmv_block(a, x1, false)?;
    let btx2 = spmv_block(b, x2, true)?;
    let mut negc2 = c2.clone();
    negc2.scale_assign(-1.0);
    let left = ax1.hcat(x1).hcat(c1);
    let right = x2.hcat(&btx2).hcat(&negc2);
    Ok(super::session::product_norm(&left, &right) / c_norm)
}
