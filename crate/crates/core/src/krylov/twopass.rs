//! Second-pass reconstruction of the solution factors.
//!
//! The truncated and sketched engines discard basis blocks outside the
//! window during the first pass. Once the projected solution is known, the
//! Arnoldi recurrence is replayed with the stored orthogonalization
//! coefficients (no window inner products), regenerating each basis block
//! exactly, and the factor `X = U_d Z` is accumulated block by block
//! through a bounded staging buffer.

use super::arnoldi::{block_qr_inplace, gemm_sub_inplace, ArnoldiFactorization};
use super::mem::{MemCounter, TrackedBlock};
use super::SolveError;
use crate::la::RMat;
use crate::sparse::{spmv_block, SparseMatrix};

/// Replay one side: returns `X = U_d Z` (`n x l`, still charged against the
/// counter) using at most `(k+1) r + chunk + l` additional tracked
/// length-n vectors.
#[allow(clippy::too_many_arguments)]
pub fn two_pass_reconstruct(
    mat: &SparseMatrix,
    transpose: bool,
    c: &RMat,
    hess: &RMat,
    d: usize,
    r: usize,
    k: usize,
    z: &RMat,
    chunk: usize,
    counter: &MemCounter,
) -> Result<TrackedBlock, SolveError> {
    let n = c.rows();
    let l = z.cols();
    assert_eq!(
        z.rows(),
        d * r,
        "coefficient rows must match the basis size"
    );
    let chunk = chunk.max(1);
    if l == 0 {
        return Ok(TrackedBlock::new(RMat::zeros(n, 0), counter));
    }

    let mut x = TrackedBlock::new(RMat::zeros(n, l), counter);
    let mut stage = TrackedBlock::new(RMat::zeros(n, chunk), counter);
    let mut stage_rows: Vec<usize> = Vec::with_capacity(chunk);

    // Ring buffer of regenerated blocks (k+1 wide, like the first pass).
    let mut window: std::collections::VecDeque<TrackedBlock> = std::collections::VecDeque::new();
    let mut first = 0usize;

    // b_0 by the same in-place QR the first pass used.
    let mut b0 = TrackedBlock::new(c.clone(), counter);
    let floor0 = vec![1e-300; r];
    let _ = block_qr_inplace(b0.mat_mut(), &floor0);
    window.push_back(b0);

    let flush = |x: &mut TrackedBlock, stage: &RMat, rows: &mut Vec<usize>| {
        // Ordered rank-1 updates: the accumulation order into each entry of
        // x is the basis-column order, independent of the staging width, so
        // chunked and unchunked runs agree bitwise.
        for (q, &zrow) in rows.iter().enumerate() {
            let col = stage.col(q);
            for cc in 0..x.mat().cols() {
                let coef = z[(zrow, cc)];
                if coef == 0.0 {
                    continue;
                }
                let dst = x.mat_mut().col_mut(cc);
                for i in 0..n {
                    dst[i] += coef * col[i];
                }
            }
        }
        rows.clear();
    };

    for t in 0..d {
        // stage block b_t
        {
            let bt = window.back().expect("window nonempty").mat();
            for cloc in 0..r {
                if stage_rows.len() == chunk {
                    flush(&mut x, stage.mat(), &mut stage_rows);
                }
                let slot = stage_rows.len();
                let src = bt.col(cloc).to_vec();
                stage.mat_mut().col_mut(slot).copy_from_slice(&src);
                stage_rows.push(t * r + cloc);
            }
        }
        if t + 1 >= d {
            break;
        }
        // regenerate b_{t+1} replaying stored coefficients
        while window.len() > k {
            window.pop_front();
            first += 1;
        }
        let mut w = TrackedBlock::new(
            spmv_block(
                mat,
                window.back().expect("window nonempty").mat(),
                transpose,
            )?,
            counter,
        );
        let lo = (t + 1).saturating_sub(k);
        for j in lo..=t {
            let bj = window
                .get(j - first)
                .expect("replay block inside the truncation window")
                .mat();
            let hij = hess.block(j * r, (j + 1) * r, t * r, (t + 1) * r);
            gemm_sub_inplace(w.mat_mut(), bj, &hij);
        }
        let floor = vec![1e-300; r];
        let (rr, _) = block_qr_inplace(w.mat_mut(), &floor);
        let stored = hess.block((t + 1) * r, (t + 2) * r, t * r, (t + 1) * r);
        let dev = rr.sub(&stored).frobenius_norm();
        if dev > 1e-8 * stored.frobenius_norm().max(f64::MIN_POSITIVE) {
            return Err(SolveError::ReplayMismatch {
                step: t + 1,
                deviation: dev,
            });
        }
        window.push_back(w);
    }
    flush(&mut x, stage.mat(), &mut stage_rows);
    Ok(x)
}

/// Direct reconstruction from a fully retained factorization (full engine).
pub(crate) fn reconstruct_from_window(
    fact: &ArnoldiFactorization,
    z: &RMat,
    counter: &MemCounter,
) -> TrackedBlock {
    let n = fact.n();
    let r = fact.r();
    // The coefficient block dictates the dimension: the window may have
    // grown past the checkpoint the projected solution belongs to.
    let d = z.rows() / r;
    debug_assert!(d <= fact.d() + 1);
    let l = z.cols();
    let mut x = TrackedBlock::new(RMat::zeros(n, l), counter);
    for t in 0..d {
        let bt = fact.window.get(t).expect("full engine retains every block");
        for cc in 0..l {
            for cloc in 0..r {
                let coef = z[(t * r + cloc, cc)];
                if coef == 0.0 {
                    continue;
                }
                let src = bt.col(cloc);
                let dst = x.mat_mut().col_mut(cc);
                for i in 0..n {
                    dst[i] += coef * src[i];
                }
            }
        }
    }
    x
}
