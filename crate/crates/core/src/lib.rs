//! Low-rank solvers for large sparse Sylvester and Lyapunov equations
//!
//! The equation `A X + X B = C1 C2^T` is solved by projection onto block
//! Krylov subspaces of `A` and `B^T`. Three engines are provided:
//!
//! * **full** — classical block Arnoldi with full orthogonalization
//!   (the memory-hungry baseline),
//! * **truncated** — block Arnoldi orthogonalizing only against the last
//!   `k` basis blocks,
//! * **sketched** — truncated Arnoldi combined with an oblivious subspace
//!   embedding; the sketched basis is kept orthonormal through an
//!   incrementally updated QR factorization and the projected problem is
//!   posed in whitened coordinates. Basis blocks outside the truncation
//!   window are discarded and the solution factors are rebuilt by a second
//!   (inner-product free) pass.
//!
//! The [`analysis`] module contains diagnostics for the theory behind the
//! sketched engine: residual identities, embedding distortion, effective
//! field of values, and an explicit ellipse convergence bound.
//!
//! All randomness flows through the seeded, counter-based generator in
//! [`rng`], so every solve and every generated test matrix is bit
//! reproducible.
//!
//! ```
//! use sylkit::krylov::{solve, Engine, SolverConfig};
//! use sylkit::sparse::{gen_toeplitz_ex41, BlockVec};
//!
//! let a = gen_toeplitz_ex41(60);
//! let b = a.transpose();
//! let c1 = BlockVec::random_unit(60, 1, 0).into_mat();
//! let c2 = BlockVec::random_unit(60, 1, 1).into_mat();
//!
//! let mut cfg = SolverConfig::new(Engine::Sketched);
//! cfg.k = 5;
//! cfg.s = 40;
//! cfg.sketch_kind = sylkit::sketch::SketchKind::Gaussian;
//! cfg.tol = 1e-8;
//! cfg.compute_true_residual = true;
//!
//! let res = solve(&a, &b, &c1, &c2, &cfg).unwrap();
//! assert!(res.converged);
//! assert!(res.true_residual.unwrap() < 1e-7);
//! ```

pub mod analysis;
pub mod krylov;
pub mod la;
pub mod rng;
pub mod sketch;
pub mod sparse;

pub use la::{CMat, RMat};
pub use sparse::{BlockVec, SparseMatrix};
