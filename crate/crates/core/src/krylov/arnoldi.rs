//! Block Arnoldi iteration with a truncated orthogonalization window.

use super::mem::{MemCounter, TrackedBlock};
use super::SolveError;
use crate::la::RMat;
use crate::sparse::{spmv_block, SparseMatrix};
use std::collections::VecDeque;

/// Fused `w -= b h` without temporaries (h is a small `r x r` block).
pub(crate) fn gemm_sub_inplace(w: &mut RMat, b: &RMat, h: &RMat) {
    debug_assert_eq!(b.cols(), h.rows());
    debug_assert_eq!(w.cols(), h.cols());
    debug_assert_eq!(w.rows(), b.rows());
    let n = b.rows();
    for c in 0..h.cols() {
        for k in 0..h.rows() {
            let coef = h[(k, c)];
            if coef == 0.0 {
                continue;
            }
            let bcol = b.col(k);
            let wcol = w.col_mut(c);
            for i in 0..n {
                wcol[i] -= coef * bcol[i];
            }
        }
    }
}

/// In-place thin QR of a skinny block by modified Gram-Schmidt with one
/// reorthogonalization pass: `w` becomes `Q`, the returned factor is the
/// `r x r` upper triangular `R` with nonnegative diagonal. Columns whose
/// post-orthogonalization norm falls below `floor[c]` are reported via the
/// returned breakdown flag and left unnormalized.
pub(crate) fn block_qr_inplace(w: &mut RMat, floor: &[f64]) -> (RMat, bool) {
    let r = w.cols();
    let n = w.rows();
    let mut rr = RMat::zeros(r, r);
    let mut breakdown = false;
    for c in 0..r {
        for j in 0..c {
            // two Gram-Schmidt passes against column j
            let mut coef = 0.0;
            for pass in 0..2 {
                let mut dot = 0.0;
                for i in 0..n {
                    dot += w[(i, j)] * w[(i, c)];
                }
                coef += dot;
                for i in 0..n {
                    let upd = dot * w[(i, j)];
                    w[(i, c)] -= upd;
                }
                let _ = pass;
            }
            rr[(j, c)] = coef;
        }
        let norm: f64 = w.col(c).iter().map(|x| x * x).sum::<f64>().sqrt();
        rr[(c, c)] = norm;
        if norm < floor[c] {
            breakdown = true;
        } else {
            for i in 0..n {
                w[(i, c)] /= norm;
            }
        }
    }
    (rr, breakdown)
}

/// Ring buffer of the most recent basis blocks.
#[derive(Debug)]
pub(crate) struct Window {
    blocks: VecDeque<TrackedBlock>,
    first: usize,
    cap: Option<usize>,
}

impl Window {
    fn new(cap: Option<usize>) -> Self {
        Window {
            blocks: VecDeque::new(),
            first: 0,
            cap,
        }
    }

    fn push(&mut self, b: TrackedBlock) {
        if let Some(cap) = self.cap {
            // Evict before allocating the caller's block charge persists:
            // the caller constructs the TrackedBlock after calling
            // `make_room`, so eviction happens first.
            debug_assert!(self.blocks.len() <= cap);
        }
        self.blocks.push_back(b);
    }

    fn make_room(&mut self) {
        if let Some(cap) = self.cap {
            while self.blocks.len() >= cap {
                self.blocks.pop_front();
                self.first += 1;
            }
        }
    }

    pub(crate) fn get(&self, j: usize) -> Option<&RMat> {
        j.checked_sub(self.first)
            .and_then(|off| self.blocks.get(off))
            .map(|b| b.mat())
    }

    pub(crate) fn latest(&self) -> &RMat {
        self.blocks
            .back()
            .expect("window is never empty after init")
            .mat()
    }

    #[cfg(test)]
    pub(crate) fn first_index(&self) -> usize {
        self.first
    }

    #[cfg(test)]
    pub(crate) fn len(&self) -> usize {
        self.blocks.len()
    }

    pub(crate) fn clear(&mut self) {
        self.blocks.clear();
    }
}

/// State of one truncated block Arnoldi recurrence.
///
/// After `d` steps the factorization holds basis blocks `b_0, ..., b_d`
/// (the most recent `k+1` of them when truncating) and the block upper
/// Hessenberg matrix with columns `0..d`, banded with upper block bandwidth
/// `k`. The truncated Arnoldi relation `M U_d = U_{d+1} Hbar_d` holds by
/// construction; the verification suite checks it explicitly against
/// retained bases.
pub struct ArnoldiFactorization {
    n: usize,
    r: usize,
    k: usize,
    maxit: usize,
    d: usize,
    pub(crate) window: Window,
    /// Set by a lucky breakdown; no further steps are possible.
    terminated: bool,
    /// Preallocated `(maxit+1) r x maxit r` Hessenberg storage.
    hess: RMat,
    /// Untracked copy of every basis block (verification mode only).
    pub(crate) shadow: Option<Vec<RMat>>,
    /// Upper triangular factor of the initial skinny QR `b_0 ell = C`.
    ell: RMat,
}

/// Outcome of one Arnoldi step.
pub struct StepOutcome {
    /// Lucky breakdown: the post-orthogonalization block was numerically
    /// zero, so the Krylov space is invariant. The Hessenberg column is
    /// committed with an exactly zero subdiagonal, no new basis block
    /// exists, and the factorization refuses further steps.
    pub breakdown: bool,
}

impl ArnoldiFactorization {
    /// Initialize from the starting block `C` (normalized into `b_0`).
    /// `k >= maxit` disables truncation (full orthogonalization).
    pub fn init(
        c: &RMat,
        k: usize,
        maxit: usize,
        counter: &MemCounter,
        keep_shadow: bool,
    ) -> Result<Self, SolveError> {
        let n = c.rows();
        let r = c.cols();
        if r == 0 || n == 0 {
            return Err(SolveError::Config("empty starting block".into()));
        }
        let cap = if k >= maxit { None } else { Some(k + 1) };
        let mut window = Window::new(cap);
        let mut q = c.clone();
        let floor = vec![1e-300; r];
        let (ell, degenerate) = block_qr_inplace(&mut q, &floor);
        if degenerate {
            return Err(SolveError::Config(
                "starting block is rank deficient".into(),
            ));
        }
        let shadow = if keep_shadow {
            Some(vec![q.clone()])
        } else {
            None
        };
        window.push(TrackedBlock::new(q, counter));
        Ok(ArnoldiFactorization {
            n,
            r,
            k,
            maxit,
            d: 0,
            window,
            terminated: false,
            hess: RMat::zeros((maxit + 1) * r, maxit * r),
            shadow,
            ell,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `ell` from the initial QR `b_0 ell = C`.
    pub fn ell(&self) -> &RMat {
        &self.ell
    }

    /// Square projected matrix `H_d` (`dr x dr`).
    pub fn h_square(&self) -> RMat {
        self.hess.block(0, self.d * self.r, 0, self.d * self.r)
    }

    /// Subdiagonal block `h_{j+2,j+1}` of column `j` (0-based).
    pub fn h_sub(&self, j: usize) -> RMat {
        self.hess.block(
            (j + 1) * self.r,
            (j + 2) * self.r,
            j * self.r,
            (j + 1) * self.r,
        )
    }

    /// Latest subdiagonal block `h_{d+1,d}`.
    pub fn h_sub_latest(&self) -> RMat {
        self.h_sub(self.d - 1)
    }

    /// In-band part of Hessenberg column `j`, rows `0..(j+1)r`.
    pub fn h_col_band(&self, j: usize) -> RMat {
        self.hess
            .block(0, (j + 1) * self.r, j * self.r, (j + 1) * self.r)
    }

    /// Full Hessenberg data (read access for the two-pass replay).
    pub fn hess(&self) -> &RMat {
        &self.hess
    }

    pub fn latest_block(&self) -> &RMat {
        self.window.latest()
    }

    /// Free every retained basis block (the Hessenberg data survives).
    pub fn release_window(&mut self) {
        self.window.clear();
    }

    pub fn shadow_len(&self) -> Option<usize> {
        self.shadow.as_ref().map(|v| v.len())
    }

    /// Stacked shadow basis `[b_0, ..., b_{upto-1}]` (verification mode).
    pub fn shadow_stack(&self, upto: usize) -> Option<RMat> {
        let blocks = self.shadow.as_ref()?;
        assert!(upto <= blocks.len());
        let mut m = RMat::zeros(self.n, upto * self.r);
        for (j, b) in blocks.iter().take(upto).enumerate() {
            m.set_block(0, j * self.r, b);
        }
        Some(m)
    }

    /// One Arnoldi step: multiply the latest block by `M` (or `M^T`),
    /// orthogonalize against the last `k` blocks, and commit the new block.
    pub fn step(
        &mut self,
        m: &SparseMatrix,
        transpose: bool,
        counter: &MemCounter,
    ) -> Result<StepOutcome, SolveError> {
        if self.d >= self.maxit {
            return Err(SolveError::Config("step beyond maxit".into()));
        }
        if self.terminated {
            return Err(SolveError::Config("step after lucky breakdown".into()));
        }
        let t = self.d; // Hessenberg column to fill
        let r = self.r;

        // Evicting before the product keeps the live count at (k+1) r.
        self.window.make_room();
        let mut w = TrackedBlock::new(spmv_block(m, self.window.latest(), transpose)?, counter);
        // Per-column breakdown floors: 1e-14 ||(M U_d) e_c||.
        let floor: Vec<f64> = (0..r)
            .map(|c| 1e-14 * w.mat().col(c).iter().map(|x| x * x).sum::<f64>().sqrt())
            .collect();

        let lo = (t + 1).saturating_sub(self.k);
        for j in lo..=t {
            let bj = self
                .window
                .get(j)
                .expect("block inside the truncation window");
            let hij = bj.adjoint_matmul(w.mat()); // r x r
            gemm_sub_inplace(w.mat_mut(), bj, &hij);
            self.hess.set_block(j * r, t * r, &hij);
        }

        let (h_sub, breakdown) = block_qr_inplace(w.mat_mut(), &floor);
        if breakdown {
            // Commit the column with a zero subdiagonal so the projected
            // problem of dimension d+1 is well defined, but keep no block.
            self.d += 1;
            self.terminated = true;
            return Ok(StepOutcome { breakdown: true });
        }
        self.hess.set_block((t + 1) * r, t * r, &h_sub);
        if let Some(shadow) = &mut self.shadow {
            shadow.push(w.mat().clone());
        }
        self.window.push(w);
        self.d += 1;
        Ok(StepOutcome { breakdown: false })
    }
}
