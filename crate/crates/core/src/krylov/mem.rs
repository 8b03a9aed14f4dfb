//! Instrumented counting of length-n buffers.
//!
//! The memory figures reported by the solvers are measured, not estimated:
//! every algorithmic buffer with length-n columns (basis blocks, solution
//! factors, staging space) is allocated through [`TrackedBlock`], which
//! registers its column count with a per-solve [`MemCounter`]. Verification
//! shadow storage deliberately bypasses the counter, since it is diagnostic
//! machinery, not part of the algorithm.

use crate::la::RMat;
use std::cell::Cell;
use std::rc::Rc;

#[derive(Debug, Clone, Default)]
pub struct MemCounter {
    inner: Rc<Cell<(usize, usize)>>,
}

impl MemCounter {
    pub fn new() -> Self {
        Self::default()
    }

    fn alloc(&self, cols: usize) {
        let (live, peak) = self.inner.get();
        let live = live + cols;
        self.inner.set((live, peak.max(live)));
    }

    fn free(&self, cols: usize) {
        let (live, peak) = self.inner.get();
        self.inner.set((live.saturating_sub(cols), peak));
    }

    pub fn live(&self) -> usize {
        self.inner.get().0
    }

    pub fn peak(&self) -> usize {
        self.inner.get().1
    }
}

/// A dense block whose column count is charged against a [`MemCounter`]
/// for its lifetime.
#[derive(Debug)]
pub struct TrackedBlock {
    mat: RMat,
    counter: MemCounter,
}

impl TrackedBlock {
    pub fn new(mat: RMat, counter: &MemCounter) -> Self {
        counter.alloc(mat.cols());
        TrackedBlock {
            mat,
            counter: counter.clone(),
        }
    }

    pub fn mat(&self) -> &RMat {
        &self.mat
    }

    pub fn mat_mut(&mut self) -> &mut RMat {
        &mut self.mat
    }

    /// Release the tracking charge and hand the buffer out.
    pub fn into_mat(mut self) -> RMat {
        let m = std::mem::replace(&mut self.mat, RMat::zeros(0, 0));
        self.counter.free(m.cols());
        m
    }
}

impl Drop for TrackedBlock {
    fn drop(&mut self) {
        self.counter.free(self.mat.cols());
    }
}
