//! Projection solvers for `A X + X B = C1 C2^T`.
//!
//! Three engines share one iteration skeleton ([`SylvesterSession`]):
//!
//! * [`Engine::Full`] — block Arnoldi with full orthogonalization; the
//!   residual norm is exact thanks to orthonormal bases.
//! * [`Engine::Truncated`] — orthogonalization against the last `k` blocks
//!   only; the residual is controlled through an a-posteriori upper bound.
//! * [`Engine::Sketched`] — truncated Arnoldi plus an oblivious subspace
//!   embedding per side; the projected problem lives in whitened
//!   coordinates and the estimator is the exact Frobenius norm of the
//!   doubly sketched residual. Basis blocks outside the window are
//!   discarded and the solution factors are rebuilt in a second pass.

mod arnoldi;
mod mem;
mod session;
mod solve;
mod twopass;

pub use arnoldi::{ArnoldiFactorization, StepOutcome};
pub use mem::{MemCounter, TrackedBlock};
pub use session::{ProjectedSolve, SylvesterSession, VerifyCheck};
pub use solve::{solve, solve_full, solve_sketched, solve_truncated, true_residual_from_factors};
pub use twopass::two_pass_reconstruct;

use crate::la::{svd, LaError, RMat};
use crate::sketch::{SketchError, SketchKind};
use crate::sparse::SparseError;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Full,
    Truncated,
    Sketched,
}

impl Engine {
    pub fn parse(s: &str) -> Option<Engine> {
        match s.to_lowercase().as_str() {
            "full" => Some(Engine::Full),
            "truncated" => Some(Engine::Truncated),
            "sketched" => Some(Engine::Sketched),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Engine::Full => "full",
            Engine::Truncated => "truncated",
            Engine::Sketched => "sketched",
        }
    }
}

/// Solver parameters. The names mirror the algorithm inputs: `tol`,
/// `maxit`, truncation depth `k`, residual check period `p`, sketch
/// dimension `s`.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub engine: Engine,
    pub tol: f64,
    pub maxit: usize,
    pub k: usize,
    /// Independent truncation depth for the second space (truncated engine
    /// only; the sketched engine uses a single `k`).
    pub k_b: Option<usize>,
    pub p: usize,
    pub s: usize,
    pub sketch_kind: SketchKind,
    pub sketch_seed: u64,
    pub paper_literal_scale: bool,
    /// Relative singular value cutoff for compressing Y; defaults to
    /// `tol / 10`.
    pub rank_tol: Option<f64>,
    /// Two-pass staging width in columns; defaults to `k * r`.
    pub chunk: Option<usize>,
    /// Retain untracked shadow bases and record per-check diagnostics
    /// (intended for n <= 2000).
    pub verify: bool,
    /// Compute the true relative residual from the returned factors.
    pub compute_true_residual: bool,
}

impl SolverConfig {
    pub fn new(engine: Engine) -> Self {
        SolverConfig {
            engine,
            tol: 1e-6,
            maxit: 300,
            k: 10,
            k_b: None,
            p: 1,
            s: 400,
            sketch_kind: SketchKind::Srdct,
            sketch_seed: 0,
            paper_literal_scale: false,
            rank_tol: None,
            chunk: None,
            verify: false,
            compute_true_residual: false,
        }
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        if self.tol <= 0.0 {
            return Err(SolveError::Config("tol must be positive".into()));
        }
        if self.k == 0 || self.k > self.maxit {
            return Err(SolveError::Config("require 0 < k <= maxit".into()));
        }
        if let Some(kb) = self.k_b {
            if kb == 0 || kb > self.maxit {
                return Err(SolveError::Config("require 0 < k_b <= maxit".into()));
            }
        }
        if self.p == 0 {
            return Err(SolveError::Config("p must be at least 1".into()));
        }
        Ok(())
    }

    pub fn effective_rank_tol(&self) -> f64 {
        self.rank_tol.unwrap_or(self.tol / 10.0)
    }
}

/// One residual check record.
#[derive(Debug, Clone, PartialEq)]
pub struct HistEntry {
    /// Iteration index `d`.
    pub d: usize,
    /// Relative residual estimate.
    pub rho: f64,
    /// Explicit relative residual (verification mode).
    pub true_res: Option<f64>,
    pub wall_s: f64,
    /// Live length-n vector count at the check.
    pub mem_vectors: usize,
}

/// Low-rank solution and run statistics.
#[derive(Debug)]
pub struct SolveResult {
    /// Solution factors: `X ~ X1 X2^T`.
    pub x1: RMat,
    pub x2: RMat,
    pub iterations: usize,
    pub rank: usize,
    pub converged: bool,
    pub engine: Engine,
    pub history: Vec<HistEntry>,
    /// Peak number of simultaneously live length-n vectors (measured).
    pub mem_long_vectors: usize,
    /// Relative estimator value at exit.
    pub final_rho: f64,
    /// True relative residual from the factors, when requested.
    pub true_residual: Option<f64>,
    /// Per-check diagnostics (verification mode).
    pub verify: Vec<VerifyCheck>,
}

#[derive(Debug)]
pub enum SolveError {
    Config(String),
    Sparse(SparseError),
    La(LaError),
    Sketch(SketchError),
    /// Projected problem stayed singular for 5 consecutive checks.
    ProjectedSolveStalled {
        d: usize,
        last: LaError,
    },
    ReplayMismatch {
        step: usize,
        deviation: f64,
    },
    VerifyUnavailable(&'static str),
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::Config(s) => write!(f, "invalid configuration: {s}"),
            SolveError::Sparse(e) => write!(f, "{e}"),
            SolveError::La(e) => write!(f, "{e}"),
            SolveError::Sketch(e) => write!(f, "{e}"),
            SolveError::ProjectedSolveStalled { d, last } => {
                write!(
                    f,
                    "projected solve failed 5 consecutive checks (d={d}): {last}"
                )
            }
            SolveError::ReplayMismatch { step, deviation } => {
                write!(
                    f,
                    "two-pass replay mismatch at step {step} (deviation {deviation:.3e})"
                )
            }
            SolveError::VerifyUnavailable(what) => {
                write!(f, "{what} requires verification mode")
            }
        }
    }
}

impl std::error::Error for SolveError {}

impl From<SparseError> for SolveError {
    fn from(e: SparseError) -> Self {
        SolveError::Sparse(e)
    }
}

impl From<LaError> for SolveError {
    fn from(e: LaError) -> Self {
        SolveError::La(e)
    }
}

impl From<SketchError> for SolveError {
    fn from(e: SketchError) -> Self {
        SolveError::Sketch(e)
    }
}

/// Truncated-engine residual bound:
/// `rho = sqrt(dr) (||Y E_d g^T||_F + ||h E_d^T Y||_F)`.
pub fn residual_bound_truncated(y: &RMat, h_last: &RMat, g_last: &RMat, d: usize, r: usize) -> f64 {
    let (ye_g, h_ey) = residual_terms(y, h_last, g_last, d, r);
    ((d * r) as f64).sqrt() * (ye_g + h_ey)
}

/// Sketched residual norm identity:
/// `rho^2 = ||h E_d^T Y||_F^2 + ||Y E_d g^T||_F^2`, the exact Frobenius
/// norm of the doubly sketched residual when `h` and `g` are the whitened
/// subdiagonal coefficients.
pub fn residual_norm_sketched(y: &RMat, h_last: &RMat, g_last: &RMat, d: usize, r: usize) -> f64 {
    let (ye_g, h_ey) = residual_terms(y, h_last, g_last, d, r);
    (ye_g * ye_g + h_ey * h_ey).sqrt()
}

fn residual_terms(y: &RMat, h_last: &RMat, g_last: &RMat, d: usize, r: usize) -> (f64, f64) {
    let dr = d * r;
    assert_eq!(y.rows(), dr);
    assert_eq!(y.cols(), dr);
    // Y E_d g^T: last block column of Y times g^T.
    let ye = y.block(0, dr, dr - r, dr);
    let ye_g = ye.matmul(&g_last.transpose()).frobenius_norm();
    // h E_d^T Y: h times the last block row of Y.
    let ey = y.block(dr - r, dr, 0, dr);
    let h_ey = h_last.matmul(&ey).frobenius_norm();
    (ye_g, h_ey)
}

/// SVD truncation of the projected solution: smallest factor rank with
/// `||Y - Y1 Y2^T||_F <= rank_tol ||Y||_F`; the factors are balanced, each
/// carrying `sqrt(sigma)`.
pub fn compress_y(y: &RMat, rank_tol: f64) -> (RMat, RMat, usize) {
    let dec = svd(y);
    let total: f64 = dec.sigma.iter().map(|s| s * s).sum();
    if total == 0.0 {
        return (RMat::zeros(y.rows(), 0), RMat::zeros(y.cols(), 0), 0);
    }
    let budget = rank_tol * rank_tol * total;
    // Drop the largest possible tail whose energy fits the budget.
    let mut keep = dec.sigma.len();
    let mut tail = 0.0;
    while keep > 0 {
        let s = dec.sigma[keep - 1];
        if tail + s * s > budget {
            break;
        }
        tail += s * s;
        keep -= 1;
    }
    let mut y1 = dec.u.block(0, y.rows(), 0, keep);
    let mut y2 = dec.v.block(0, y.cols(), 0, keep);
    for j in 0..keep {
        let w = dec.sigma[j].sqrt();
        for v in y1.col_mut(j) {
            *v *= w;
        }
        for v in y2.col_mut(j) {
            *v *= w;
        }
    }
    (y1, y2, keep)
}
