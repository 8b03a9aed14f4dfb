//! Dense-kernel oracle battery: the Bartels-Stewart solver against the
//! independent Kronecker-vectorization route.

mod common;

use common::kron_sylvester_oracle;
use sylkit::la::{solve_sylvester_dense, RMat};
use sylkit::rng::CounterRng;

fn random_stable(n: usize, rng: &mut CounterRng) -> RMat {
    let mut m = RMat::from_fn(n, n, |_, _| rng.normal());
    for i in 0..n {
        m[(i, i)] -= 3.0 + n as f64 * 0.2;
    }
    m
}

#[test]
fn sylvester_matches_kronecker_oracle_on_50_instances() {
    let mut rng = CounterRng::new(2024);
    let mut tested = 0;
    let mut seed_stream = CounterRng::new(55);
    while tested < 50 {
        // sizes with m * p <= 100
        let m = 2 + seed_stream.below(9); // 2..10
        let p = 2 + seed_stream.below(9);
        if m * p > 100 {
            continue;
        }
        tested += 1;
        let h = random_stable(m, &mut rng);
        let g = random_stable(p, &mut rng);
        let c = RMat::from_fn(m, p, |_, _| rng.normal());
        let y = solve_sylvester_dense(&h, &g, &c).expect("well-separated spectra");
        let y_oracle = kron_sylvester_oracle(&h, &g, &c);
        let rel = y.sub(&y_oracle).frobenius_norm() / y_oracle.frobenius_norm().max(1e-300);
        assert!(
            rel <= 1e-10,
            "instance {tested} ({m}x{p}): relative error {rel}"
        );
    }
}

#[test]
fn sylvester_handles_nonsymmetric_indefinite_blocks() {
    // Spectra separated but individual matrices indefinite.
    let mut rng = CounterRng::new(77);
    let m = 7;
    let p = 5;
    let mut h = RMat::from_fn(m, m, |_, _| rng.normal());
    for i in 0..m {
        h[(i, i)] += 6.0; // spectrum near +6
    }
    let mut g = RMat::from_fn(p, p, |_, _| rng.normal());
    for i in 0..p {
        g[(i, i)] += 4.0; // -G^T spectrum near -4: separated
    }
    let c = RMat::from_fn(m, p, |_, _| rng.normal());
    let y = solve_sylvester_dense(&h, &g, &c).unwrap();
    let y_oracle = kron_sylvester_oracle(&h, &g, &c);
    let rel = y.sub(&y_oracle).frobenius_norm() / y_oracle.frobenius_norm();
    assert!(rel <= 1e-10, "relative error {rel}");
}

mod stress {
    use num_complex::Complex64 as C;
    use sylkit::la::{complex_schur_c, hermitian_eig_real, svd, CMat, RMat};
    use sylkit::rng::CounterRng;

    #[test]
    fn schur_handles_jordan_blocks_and_clusters() {
        // Defective and clustered spectra: the factorization must still
        // reconstruct to working accuracy even when individual eigenvalues
        // are ill conditioned.
        let n = 24;
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            // three clusters with Jordan coupling
            let lam = match i / 8 {
                0 => C::new(1.0, 0.0),
                1 => C::new(1.0 + 1e-9, 0.5),
                _ => C::new(-2.0, -0.25),
            };
            m[(i, i)] = lam;
            if i + 1 < n && i % 8 != 7 {
                m[(i, i + 1)] = C::new(1.0, 0.0);
            }
        }
        // similarity-scramble with a random unitary so the structure is
        // not already triangular
        let mut rng = CounterRng::new(17);
        let g = RMat::from_fn(n, n, |_, _| rng.normal());
        let q = sylkit::la::householder_qr(&g, true).0.to_complex();
        let scrambled = q.matmul(&m).matmul(&q.adjoint());

        let s = complex_schur_c(&scrambled).unwrap();
        let recon =
            s.q.matmul(&s.r)
                .matmul(&s.q.adjoint())
                .sub(&scrambled)
                .frobenius_norm();
        assert!(
            recon <= 1e-10 * scrambled.frobenius_norm(),
            "reconstruction {recon}"
        );
        let orth =
            s.q.adjoint_matmul(&s.q)
                .sub(&CMat::identity(n))
                .frobenius_norm();
        assert!(orth <= 1e-12 * n as f64);
        // trace preserved by the eigenvalue multiset
        let tr_direct: C = (0..n).map(|i| scrambled[(i, i)]).sum();
        let tr_eigs: C = s.eigenvalues().into_iter().sum();
        assert!((tr_direct - tr_eigs).norm() <= 1e-10 * scrambled.frobenius_norm());
    }

    #[test]
    fn hermitian_eig_resolves_near_degenerate_clusters() {
        let n = 30;
        let mut rng = CounterRng::new(23);
        // eigenvalues in three tight clusters
        let targets: Vec<f64> = (0..n)
            .map(|i| match i / 10 {
                0 => -1.0 + 1e-11 * i as f64,
                1 => 0.5 + 1e-12 * i as f64,
                _ => 2.0,
            })
            .collect();
        let g = RMat::from_fn(n, n, |_, _| rng.normal());
        let q = sylkit::la::householder_qr(&g, true).0;
        let mut m = RMat::zeros(n, n);
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    m[(i, j)] += targets[k] * q[(i, k)] * q[(j, k)];
                }
            }
        }
        let msym = {
            let mut s = m.add(&m.transpose());
            s.scale_assign(0.5);
            s
        };
        let (vals, vecs) = hermitian_eig_real(&msym).unwrap();
        let mut want = targets.clone();
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (have, want) in vals.iter().zip(&want) {
            assert!((have - want).abs() <= 1e-10 * 2.0, "{have} vs {want}");
        }
        let orth = vecs
            .adjoint_matmul(&vecs)
            .sub(&RMat::identity(n))
            .frobenius_norm();
        assert!(orth <= 1e-12 * n as f64);
    }

    #[test]
    fn svd_resolves_tiny_singular_values_of_graded_matrices() {
        // One-sided Jacobi keeps relative accuracy on strongly graded
        // matrices where bidiagonalization-based methods lose the small
        // singular values.
        let n = 12;
        let mut rng = CounterRng::new(29);
        let gl = RMat::from_fn(n, n, |_, _| rng.normal());
        let gr = RMat::from_fn(n, n, |_, _| rng.normal());
        let ql = sylkit::la::householder_qr(&gl, true).0;
        let qr = sylkit::la::householder_qr(&gr, true).0;
        let sig: Vec<f64> = (0..n).map(|i| 10f64.powi(-(i as i32))).collect();
        let mut m = RMat::zeros(n, n);
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    m[(i, j)] += sig[k] * ql[(i, k)] * qr[(j, k)];
                }
            }
        }
        let dec = svd(&m);
        // Assembling m commits entrywise noise of order n*eps, which is an
        // absolute perturbation of every singular value; the small ones can
        // only be recovered to that floor.
        let floor = 50.0 * n as f64 * f64::EPSILON;
        for (have, want) in dec.sigma.iter().zip(&sig) {
            let err = (have - want).abs();
            assert!(
                err <= 1e-10 * want + floor,
                "sigma {want:.1e}: error {err:.2e}"
            );
        }
        // the well-scaled leaders must be sharp in the relative sense
        for (have, want) in dec.sigma.iter().zip(&sig).take(4) {
            assert!((have - want).abs() <= 1e-11 * want);
        }
    }
}
