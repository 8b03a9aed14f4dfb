//! Effective field of values: partition of the Schur basis of the
//! perturbed matrix `Hhat + hhat e_d^T` into vectors with negligible
//! versus nonnegligible first components, and the decay profile relating
//! eigenvalue location to that first component.

use super::fov::fov_boundary;
use super::AnalysisError;
use crate::la::{complex_schur_c, solve_sylvester_complex, triangular_eigenvector, CMat, RMat};
use num_complex::Complex64 as C;

#[derive(Debug, Clone)]
pub struct EffectiveFovResult {
    /// Schur vectors (of the transposed matrix) with first component below
    /// the threshold; the solution has no weight on them.
    pub q0: CMat,
    /// Remaining Schur vectors: the effective subspace.
    pub q1: CMat,
    pub kept: usize,
    pub dropped: usize,
    /// Compression `Q1^H (Hhat + hhat e_d^T) Q1`, whose field of values is
    /// the effective field of values.
    pub compressed: CMat,
    /// First-row magnitudes of the reordered Schur basis.
    pub first_row_magnitudes: Vec<f64>,
    /// Absolute threshold used for the partition.
    pub threshold_abs: f64,
    /// The perturbed matrix itself (for follow-on solves and plots).
    pub perturbed: CMat,
}

/// Build `M = Hhat + hhat e_d^T`.
pub(crate) fn perturbed_matrix(hhat: &RMat, hvec: &[f64]) -> CMat {
    let d = hhat.rows();
    assert_eq!(hvec.len(), d);
    let mut m = hhat.to_complex();
    for i in 0..d {
        m[(i, d - 1)] += C::new(hvec[i], 0.0);
    }
    m
}

/// Schur-partition the perturbed matrix. `drop_threshold` is relative to
/// `||M||_F`: eigenvectors of `M^T` whose first component is at most
/// `drop_threshold ||M||_F` form the dropped block `Q0`.
pub fn effective_fov(
    hhat: &RMat,
    hvec: &[f64],
    drop_threshold: f64,
) -> Result<EffectiveFovResult, AnalysisError> {
    assert!(drop_threshold > 0.0 && drop_threshold < 1.0);
    let d = hhat.rows();
    let m = perturbed_matrix(hhat, hvec);
    let mt = m.transpose();
    let mut schur = complex_schur_c(&mt)?;
    let cutoff = drop_threshold * m.frobenius_norm();

    // Per-eigenvalue first components of unit eigenvectors of M^T.
    let select: Vec<bool> = (0..d)
        .map(|k| {
            let x = triangular_eigenvector(&schur.r, k);
            // q = Q x; only its first component is needed.
            let mut q0 = C::new(0.0, 0.0);
            for (j, xv) in x.iter().enumerate() {
                q0 += schur.q[(0, j)] * xv;
            }
            q0.norm() <= cutoff
        })
        .collect();
    let dropped = select.iter().filter(|&&b| b).count();
    schur.reorder(&select);

    let q0 = schur.q.block(0, d, 0, dropped);
    let q1 = schur.q.block(0, d, dropped, d);
    let compressed = q1.adjoint_matmul(&m.matmul(&q1));
    let first_row_magnitudes: Vec<f64> = (0..d).map(|j| schur.q[(0, j)].norm()).collect();

    Ok(EffectiveFovResult {
        q0,
        q1,
        kept: d - dropped,
        dropped,
        compressed,
        first_row_magnitudes,
        threshold_abs: cutoff,
        perturbed: m,
    })
}

/// Solve the compressed Lyapunov equation in the Gramian convention,
/// `(Q1^H M Q1) Z + Z (Q1^H M Q1)^H + Q1^H e1 beta^2 e1^H Q1 = 0`,
/// and reassemble `Y = Q1 Z Q1^H`; for a stable compressed matrix the
/// solution is Hermitian positive semidefinite.
pub fn effective_lyapunov_solve(
    eff: &EffectiveFovResult,
    beta: f64,
) -> Result<(CMat, CMat), AnalysisError> {
    let l = eff.kept;
    let cmpr = &eff.compressed;
    // u = Q1^H e1
    let d = eff.q1.rows();
    let e1 = {
        let mut e = CMat::zeros(d, 1);
        e[(0, 0)] = C::new(1.0, 0.0);
        e
    };
    let u = eff.q1.adjoint_matmul(&e1);
    let mut rhs = CMat::zeros(l, l);
    for j in 0..l {
        for i in 0..l {
            rhs[(i, j)] = -u[(i, 0)] * u[(j, 0)].conj() * beta * beta;
        }
    }
    // C Z + Z C^H = rhs written as C Z + Z G^T with G = conj(C).
    let g = CMat::from_fn(l, l, |i, j| cmpr[(i, j)].conj());
    let z = solve_sylvester_complex(cmpr, &g, &rhs)?;
    let y = eff.q1.matmul(&z).matmul(&eff.q1.adjoint());
    Ok((y, z))
}

#[derive(Debug, Clone)]
pub struct DecayProfile {
    /// Pairs `(distance of eigenvalue from W(Hhat), first component
    /// magnitude)`, sorted by distance.
    pub pairs: Vec<(f64, f64)>,
    /// Spearman rank correlation of `log10(magnitude)` against distance.
    pub spearman: f64,
}

/// Per-eigenvalue decay diagnostic: eigenvalues of the perturbed matrix far
/// outside `W(Hhat)` must have tiny first Schur-vector components.
pub fn schur_decay_profile(hhat: &RMat, hvec: &[f64]) -> Result<DecayProfile, AnalysisError> {
    let d = hhat.rows();
    let m = perturbed_matrix(hhat, hvec);
    let mt = m.transpose();
    let schur = complex_schur_c(&mt)?;
    let boundary = fov_boundary(&hhat.to_complex(), 256)?;

    let mut pairs: Vec<(f64, f64)> = (0..d)
        .map(|k| {
            let lambda = schur.r[(k, k)];
            let x = triangular_eigenvector(&schur.r, k);
            let mut q0 = C::new(0.0, 0.0);
            for (j, xv) in x.iter().enumerate() {
                q0 += schur.q[(0, j)] * xv;
            }
            (boundary.distance_from(lambda), q0.norm())
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let dists: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let logmags: Vec<f64> = pairs.iter().map(|p| (p.1 + 1e-300).log10()).collect();
    let spearman = spearman_rho(&dists, &logmags);
    Ok(DecayProfile { pairs, spearman })
}

/// Spearman rank correlation (Pearson correlation of average ranks).
fn spearman_rho(x: &[f64], y: &[f64]) -> f64 {
    let rx = ranks(x);
    let ry = ranks(y);
    pearson(&rx, &ry)
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
    let mut out = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &raw in &idx[i..=j] {
            out[raw] = avg;
        }
        i = j + 1;
    }
    out
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::gen_hhat_ex45;

    #[test]
    fn zero_perturbation_drops_nothing() {
        // hhat = 0 and a normal Hhat: every eigenvector has honest first
        // components, Q0 stays empty with the default-ish threshold.
        let d = 10;
        let hhat = RMat::from_fn(d, d, |i, j| {
            if i == j {
                -2.0 - i as f64
            } else if i == j + 1 || j == i + 1 {
                0.5
            } else {
                0.0
            }
        });
        let hvec = vec![0.0; d];
        let eff = effective_fov(&hhat, &hvec, 1e-12).unwrap();
        assert_eq!(eff.dropped, 0);
        assert_eq!(eff.kept, d);
    }

    #[test]
    fn threshold_monotonicity() {
        let (hhat, hvec) = gen_hhat_ex45(40, 7);
        let lo = effective_fov(&hhat, &hvec, 1e-14).unwrap();
        let hi = effective_fov(&hhat, &hvec, 1e-3).unwrap();
        assert!(lo.dropped <= hi.dropped, "{} > {}", lo.dropped, hi.dropped);
        // near-unit threshold keeps (almost) nothing
        let all = effective_fov(&hhat, &hvec, 0.999).unwrap();
        assert!(all.kept <= hi.kept);
    }

    #[test]
    fn partition_is_unitary_and_exhaustive() {
        let (hhat, hvec) = gen_hhat_ex45(30, 3);
        let eff = effective_fov(&hhat, &hvec, 1e-12).unwrap();
        assert_eq!(eff.kept + eff.dropped, 30);
        let q = eff.q0.hcat(&eff.q1);
        let orth = q
            .adjoint_matmul(&q)
            .sub(&CMat::identity(30))
            .frobenius_norm();
        assert!(orth < 1e-10 * 30.0, "partition orthogonality {orth}");
    }

    #[test]
    fn decay_profile_trends_negative() {
        // Larger distance from W(Hhat) should pair with smaller first
        // components: negative rank correlation.
        let (hhat, hvec) = gen_hhat_ex45(60, 21);
        let prof = schur_decay_profile(&hhat, &hvec).unwrap();
        // only meaningful when some eigenvalues escape the field of values
        let escaped = prof.pairs.iter().filter(|p| p.0 > 1e-8).count();
        assert!(escaped > 0, "no eigenvalue escaped W(Hhat)");
        assert!(prof.spearman < 0.0, "spearman {}", prof.spearman);
    }

    #[test]
    fn scaled_perturbation_pushes_further_and_decays_harder() {
        let (hhat, hvec) = gen_hhat_ex45(50, 5);
        let mut max_dist = Vec::new();
        let mut min_mag = Vec::new();
        for scale in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let sv: Vec<f64> = hvec.iter().map(|v| v * scale).collect();
            let prof = schur_decay_profile(&hhat, &sv).unwrap();
            max_dist.push(prof.pairs.last().unwrap().0);
            min_mag.push(prof.pairs.iter().map(|p| p.1).fold(f64::INFINITY, f64::min));
        }
        // trend over the sweep, not strict per-step monotonicity
        assert!(max_dist.last().unwrap() > max_dist.first().unwrap());
        assert!(min_mag.last().unwrap() <= min_mag.first().unwrap());
    }
}
