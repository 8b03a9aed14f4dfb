//! Field-of-values boundary by the support-function sweep: for each angle
//! the rightmost point of the rotated matrix is the top eigenvalue of its
//! Hermitian part, and the corresponding Rayleigh quotient lies on the
//! boundary.

use super::AnalysisError;
use crate::la::{hermitian_eig, CMat};
use num_complex::Complex64 as C;

#[derive(Debug, Clone)]
pub struct FovBoundary {
    pub angles: Vec<f64>,
    /// Boundary points `v^H M v` for the top eigenvector at each angle.
    pub points: Vec<C>,
    /// Support values `alpha(e^{i theta} M)` per angle.
    pub supports: Vec<f64>,
    /// Rightmost real part, `alpha(M)` (the support at angle zero).
    pub alpha: f64,
}

impl FovBoundary {
    /// Signed distance of `z` from the sampled outer approximation of the
    /// field of values: zero inside, the maximal half-plane violation
    /// outside.
    pub fn distance_from(&self, z: C) -> f64 {
        let mut worst: f64 = f64::NEG_INFINITY;
        for (theta, s) in self.angles.iter().zip(&self.supports) {
            let rot = C::new(theta.cos(), theta.sin()) * z;
            worst = worst.max(rot.re - s);
        }
        worst.max(0.0)
    }
}

/// Sample the boundary of `W(M)` at `n_angles` uniform angles.
pub fn fov_boundary(m: &CMat, n_angles: usize) -> Result<FovBoundary, AnalysisError> {
    assert!(n_angles >= 8, "need at least 8 angles");
    assert!(m.is_square());
    let n = m.rows();
    let mut angles = Vec::with_capacity(n_angles);
    let mut points = Vec::with_capacity(n_angles);
    let mut supports = Vec::with_capacity(n_angles);
    let mut alpha = f64::NEG_INFINITY;

    for t in 0..n_angles {
        let theta = 2.0 * std::f64::consts::PI * t as f64 / n_angles as f64;
        let rot = C::new(theta.cos(), theta.sin());
        let mut rm = m.clone();
        for v in rm.as_mut_slice() {
            *v *= rot;
        }
        let mut herm = rm.add(&rm.adjoint());
        herm.scale_assign(0.5);
        let (vals, vecs) = hermitian_eig(&herm)?;
        let top = *vals.last().expect("nonempty");
        supports.push(top);
        if t == 0 {
            alpha = top;
        }
        // Rayleigh quotient of M at the top eigenvector.
        let v = vecs.block(0, n, n - 1, n);
        let z = v.adjoint_matmul(&m.matmul(&v))[(0, 0)];
        angles.push(theta);
        points.push(z);
    }
    Ok(FovBoundary {
        angles,
        points,
        supports,
        alpha,
    })
}
