//! Complex Schur decomposition `M = Q R Q^H` with eigenvalue reordering.
//!
//! The implementation reduces to upper Hessenberg form by Householder
//! similarity, then runs an implicit single-shift QR iteration with
//! Wilkinson shifts and Givens bulge chasing. Working in complex arithmetic
//! from the start avoids the 2x2-block case analysis of the real quasi
//! triangular form, which the downstream Sylvester solver and field-of-values
//! partitions would otherwise have to unravel.

use super::{CMat, Entry, LaError, RMat};
use num_complex::Complex64 as C;

/// Unitary Schur factorization of a square matrix.
#[derive(Debug, Clone)]
pub struct SchurDecomposition {
    /// Unitary factor (Schur vectors in columns).
    pub q: CMat,
    /// Upper triangular factor; the diagonal carries the eigenvalues.
    pub r: CMat,
    /// Dimension of the factored matrix.
    pub dim: usize,
}

impl SchurDecomposition {
    pub fn eigenvalues(&self) -> Vec<C> {
        (0..self.dim).map(|i| self.r[(i, i)]).collect()
    }

    /// Reorder the decomposition so that the eigenvalues with `select[i] ==
    /// true` (indexed by current diagonal position) appear first, via
    /// unitary swaps of adjacent diagonal entries.
    pub fn reorder(&mut self, select: &[bool]) {
        assert_eq!(select.len(), self.dim);
        let mut flags = select.to_vec();
        let mut front = 0;
        for j in 0..self.dim {
            if flags[j] {
                let mut t = j;
                while t > front {
                    self.swap_adjacent(t - 1);
                    flags.swap(t - 1, t);
                    t -= 1;
                }
                front += 1;
            }
        }
    }

    /// Unitary similarity exchanging diagonal entries i and i+1.
    fn swap_adjacent(&mut self, i: usize) {
        let a = self.r[(i, i)];
        let b = self.r[(i, i + 1)];
        let d = self.r[(i + 1, i + 1)];
        // Eigenvector of [[a, b], [0, d]] for eigenvalue d is [b, d - a].
        let v0 = b;
        let v1 = d - a;
        let nrm = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
        let (g00, g10) = if nrm == 0.0 {
            // Equal eigenvalues with zero coupling: a plain exchange works.
            (C::new(0.0, 0.0), C::new(1.0, 0.0))
        } else {
            (v0 / nrm, v1 / nrm)
        };
        // G = [[g00, -conj(g10)], [g10, conj(g00)]] is unitary with first
        // column the normalized eigenvector, so G^H R G swaps the diagonal.
        let g01 = -g10.conj();
        let g11 = g00.conj();

        let n = self.dim;
        // R <- G^H R (rows i, i+1)
        for j in 0..n {
            let x = self.r[(i, j)];
            let y = self.r[(i + 1, j)];
            self.r[(i, j)] = g00.conj() * x + g10.conj() * y;
            self.r[(i + 1, j)] = g01.conj() * x + g11.conj() * y;
        }
        // R <- R G (columns i, i+1)
        for k in 0..n {
            let x = self.r[(k, i)];
            let y = self.r[(k, i + 1)];
            self.r[(k, i)] = x * g00 + y * g10;
            self.r[(k, i + 1)] = x * g01 + y * g11;
        }
        // Q <- Q G
        for k in 0..n {
            let x = self.q[(k, i)];
            let y = self.q[(k, i + 1)];
            self.q[(k, i)] = x * g00 + y * g10;
            self.q[(k, i + 1)] = x * g01 + y * g11;
        }
        self.r[(i + 1, i)] = C::new(0.0, 0.0);
    }
}

/// Complex Schur decomposition of a real matrix (promoted internally).
pub fn complex_schur(m: &RMat) -> Result<SchurDecomposition, LaError> {
    complex_schur_c(&m.to_complex())
}

/// Complex Schur decomposition of a complex matrix.
pub fn complex_schur_c(m: &CMat) -> Result<SchurDecomposition, LaError> {
    assert!(
        m.is_square(),
        "Schur decomposition requires a square matrix"
    );
    let n = m.rows();
    if n == 0 {
        return Ok(SchurDecomposition {
            q: CMat::zeros(0, 0),
            r: CMat::zeros(0, 0),
            dim: 0,
        });
    }

    let mut h = m.clone();
    let mut q = CMat::identity(n);
    // The projected matrices fed in by the solvers are already upper
    // Hessenberg; the reduction would only permute signs at O(n^3) cost.
    if !is_hessenberg(&h) {
        hessenberg_reduce(&mut h, &mut q);
    }
    qr_iteration(&mut h, &mut q, n)?;

    // Force exact triangularity.
    for j in 0..n {
        for i in j + 1..n {
            h[(i, j)] = C::new(0.0, 0.0);
        }
    }
    Ok(SchurDecomposition { q, r: h, dim: n })
}

fn is_hessenberg(h: &CMat) -> bool {
    let n = h.rows();
    for j in 0..n {
        for i in j + 2..n {
            if h[(i, j)] != C::new(0.0, 0.0) {
                return false;
            }
        }
    }
    true
}

/// Householder similarity reduction to upper Hessenberg, accumulating Q.
fn hessenberg_reduce(h: &mut CMat, q: &mut CMat) {
    let n = h.rows();
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let mut v: Vec<C> = (0..len).map(|i| h[(k + 1 + i, k)]).collect();
        let sigma = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if sigma == 0.0 {
            continue;
        }
        let phase = if v[0].norm() == 0.0 {
            C::new(1.0, 0.0)
        } else {
            v[0] / v[0].norm()
        };
        let alpha = -phase * sigma;
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;

        // H <- P H with P = I - beta v v^H acting on rows k+1.. .
        for j in k..n {
            let mut dot = C::new(0.0, 0.0);
            for i in 0..len {
                dot += v[i].conj() * h[(k + 1 + i, j)];
            }
            let t = dot * beta;
            for i in 0..len {
                let upd = t * v[i];
                h[(k + 1 + i, j)] -= upd;
            }
        }
        // H <- H P on columns k+1.. .
        for r in 0..n {
            let mut dot = C::new(0.0, 0.0);
            for i in 0..len {
                dot += h[(r, k + 1 + i)] * v[i];
            }
            let t = dot * beta;
            for i in 0..len {
                let upd = t * v[i].conj();
                h[(r, k + 1 + i)] -= upd;
            }
        }
        // Q <- Q P.
        for r in 0..q.rows() {
            let mut dot = C::new(0.0, 0.0);
            for i in 0..len {
                dot += q[(r, k + 1 + i)] * v[i];
            }
            let t = dot * beta;
            for i in 0..len {
                let upd = t * v[i].conj();
                q[(r, k + 1 + i)] -= upd;
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = C::new(0.0, 0.0);
        }
    }
}

/// Givens pair (c real, s complex) with G [a; b] = [r; 0] for
/// G = [[c, s], [-conj(s), c]].
fn givens(a: C, b: C) -> (f64, C) {
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, C::new(0.0, 0.0));
    }
    let an = a.norm();
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let t = (an * an + bn * bn).sqrt();
    let c = an / t;
    let s = (a / an) * b.conj() / t;
    (c, s)
}

fn qr_iteration(h: &mut CMat, q: &mut CMat, n: usize) -> Result<(), LaError> {
    let zero = C::new(0.0, 0.0);
    let hnorm = h.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut since_deflation = 0usize;
    let budget = 30 * n;

    while hi > 0 {
        // Zero negligible subdiagonals inside the active range.
        for i in 0..hi {
            let scale = h[(i, i)].norm() + h[(i + 1, i + 1)].norm();
            let scale = if scale == 0.0 { hnorm } else { scale };
            if h[(i + 1, i)].norm() <= f64::EPSILON * scale {
                h[(i + 1, i)] = zero;
            }
        }
        if h[(hi, hi - 1)] == zero {
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        // Start of the unreduced block ending at hi.
        let mut lo = hi;
        while lo > 0 && h[(lo, lo - 1)] != zero {
            lo -= 1;
        }

        since_deflation += 1;
        if since_deflation > budget {
            return Err(LaError::NonConvergence { dim: n });
        }

        let mu = if since_deflation % 20 == 0 {
            // Exceptional shift to break rare symmetric cycles.
            h[(hi, hi)] + C::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(h, hi)
        };

        implicit_qr_step(h, q, lo, hi, mu, n);
    }
    Ok(())
}

/// Eigenvalue of the trailing 2x2 block closest to the corner entry.
fn wilkinson_shift(h: &CMat, hi: usize) -> C {
    let a = h[(hi - 1, hi - 1)];
    let b = h[(hi - 1, hi)];
    let c = h[(hi, hi - 1)];
    let d = h[(hi, hi)];
    let tr_half = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (tr_half * tr_half - det).sqrt();
    let l1 = tr_half + disc;
    let l2 = tr_half - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// One implicit single-shift bulge chase on the window [lo..=hi].
fn implicit_qr_step(h: &mut CMat, q: &mut CMat, lo: usize, hi: usize, mu: C, n: usize) {
    let mut x = h[(lo, lo)] - mu;
    let mut y = h[(lo + 1, lo)];

    for k in lo..hi {
        let (c, s) = givens(x, y);
        let sc = s.conj();

        // Left rotation on rows k, k+1.
        let j0 = if k == lo { lo } else { k - 1 };
        for j in j0..n {
            let p = h[(k, j)];
            let r = h[(k + 1, j)];
            h[(k, j)] = p.scale(c) + s * r;
            h[(k + 1, j)] = -sc * p + r.scale(c);
        }
        // Right rotation on columns k, k+1.
        let imax = (k + 2).min(hi);
        for i in 0..=imax {
            let p = h[(i, k)];
            let r = h[(i, k + 1)];
            h[(i, k)] = p.scale(c) + sc * r;
            h[(i, k + 1)] = -s * p + r.scale(c);
        }
        // Accumulate Q <- Q G^H.
        for i in 0..n {
            let p = q[(i, k)];
            let r = q[(i, k + 1)];
            q[(i, k)] = p.scale(c) + sc * r;
            q[(i, k + 1)] = -s * p + r.scale(c);
        }
        if k > lo {
            h[(k + 1, k - 1)] = C::new(0.0, 0.0);
        }
        if k + 1 < hi {
            x = h[(k + 1, k)];
            y = h[(k + 2, k)];
        }
    }
}

/// Eigenvector of the upper triangular `r` for the eigenvalue at diagonal
/// position `k`, by back substitution. Near-defective denominators are
/// floored at machine precision scale so the routine never divides by zero.
pub fn triangular_eigenvector(r: &CMat, k: usize) -> Vec<C> {
    let n = r.rows();
    let lambda = r[(k, k)];
    let smallnum = f64::EPSILON * r.frobenius_norm().max(1.0);
    let mut x = vec![C::new(0.0, 0.0); n];
    x[k] = C::new(1.0, 0.0);
    for i in (0..k).rev() {
        let mut acc = C::new(0.0, 0.0);
        for j in i + 1..=k {
            acc += r[(i, j)] * x[j];
        }
        let mut denom = r[(i, i)] - lambda;
        if denom.norm() < smallnum {
            denom = C::new(smallnum, 0.0);
        }
        x[i] = -acc / denom;
    }
    let nrm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut x {
        *z /= nrm;
    }
    x
}
