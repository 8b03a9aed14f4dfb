//! Oblivious subspace embeddings and the incremental sketched-QR engine.
//!
//! A [`SketchOperator`] maps length-`n` vectors to length-`s` sketches while
//! approximately preserving norms on a low-dimensional subspace. Three kinds
//! are provided: dense Gaussian (entries `N(0, 1/s)`), a subsampled
//! randomized discrete cosine transform, and an exact (identity) embedding
//! used to reduce the sketched solver to the classical one in tests.
//!
//! [`SketchedQRState`] maintains a QR factorization `Q T` of the sketched
//! Krylov basis, extended one block column at a time, and
//! [`whiten_hessenberg_update`] propagates the similarity
//! `T H T^{-1}` incrementally as the Hessenberg matrix grows.

mod dct;
mod qrstate;
mod whiten;

pub use qrstate::SketchedQRState;
pub(crate) use whiten::invert_tau;
pub use whiten::whiten_hessenberg_update;

use crate::la::{svd, RMat};
use crate::rng::CounterRng;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SketchKind {
    Gaussian,
    Srdct,
    Exact,
}

impl SketchKind {
    pub fn parse(s: &str) -> Option<SketchKind> {
        match s.to_lowercase().as_str() {
            "gaussian" => Some(SketchKind::Gaussian),
            "srdct" => Some(SketchKind::Srdct),
            "exact" => Some(SketchKind::Exact),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SketchKind::Gaussian => "gaussian",
            SketchKind::Srdct => "srdct",
            SketchKind::Exact => "exact",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SketchError {
    DimensionMismatch {
        expected: String,
        got: String,
    },
    NotOrthonormal {
        deviation: f64,
    },
    /// Sketched basis became numerically dependent at the reported column.
    Breakdown {
        column: usize,
    },
    SingularTau,
}

impl fmt::Display for SketchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SketchError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            SketchError::NotOrthonormal { deviation } => {
                write!(f, "basis is not orthonormal (deviation {deviation:.3e})")
            }
            SketchError::Breakdown { column } => {
                write!(f, "sketched QR breakdown at column {column}")
            }
            SketchError::SingularTau => write!(f, "singular tau block in whitening update"),
        }
    }
}

impl std::error::Error for SketchError {}

enum Payload {
    Gaussian(RMat),
    Srdct {
        signs: Vec<f64>,
        rows: Vec<usize>,
        scale: f64,
        plan: Arc<dct::DctPlan>,
    },
    Exact,
}

/// An oblivious subspace embedding `S` of size `s x n`, reconstructible
/// from `(kind, n, s, seed)` alone.
pub struct SketchOperator {
    kind: SketchKind,
    s: usize,
    n: usize,
    seed: u64,
    payload: Payload,
}

impl fmt::Debug for SketchOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "SketchOperator({}, s={}, n={}, seed={})",
            self.kind.name(),
            self.s,
            self.n,
            self.seed
        )
    }
}

impl SketchOperator {
    /// Dense Gaussian embedding with entries `N(0, 1/s)`; materializes the
    /// `s x n` matrix, so intended for moderate `n`.
    pub fn gaussian(n: usize, s: usize, seed: u64) -> Self {
        assert!(s <= n, "sketch dimension must not exceed source dimension");
        let mut rng = CounterRng::new(seed);
        let scale = 1.0 / (s as f64).sqrt();
        // Row-major draw order (row by row), stored column-major.
        let mut m = RMat::zeros(s, n);
        for i in 0..s {
            for j in 0..n {
                m[(i, j)] = scale * rng.normal();
            }
        }
        SketchOperator {
            kind: SketchKind::Gaussian,
            s,
            n,
            seed,
            payload: Payload::Gaussian(m),
        }
    }

    /// Subsampled randomized DCT embedding `S = scale * D N E` with
    /// Rademacher signs `E`, the orthonormal DCT-II `N` and a row sampler
    /// `D` (s of n rows, without replacement).
    ///
    /// The default scale is `sqrt(n/s)`, which makes `E ||S v||^2 = ||v||^2`;
    /// `paper_literal_scale` selects `sqrt(s/n)` instead for side-by-side
    /// comparison (that choice shrinks every sketch by a factor `s/n` and
    /// breaks the embedding property, which is the point of exposing it).
    pub fn srdct(n: usize, s: usize, seed: u64, paper_literal_scale: bool) -> Self {
        assert!(s <= n, "sketch dimension must not exceed source dimension");
        let mut rng = CounterRng::new(seed);
        let signs: Vec<f64> = (0..n).map(|_| rng.rademacher()).collect();
        let rows = rng.sample_without_replacement(n, s);
        let scale = if paper_literal_scale {
            (s as f64 / n as f64).sqrt()
        } else {
            (n as f64 / s as f64).sqrt()
        };
        SketchOperator {
            kind: SketchKind::Srdct,
            s,
            n,
            seed,
            payload: Payload::Srdct {
                signs,
                rows,
                scale,
                plan: Arc::new(dct::DctPlan::new(n)),
            },
        }
    }

    /// Identity embedding (`s = n`); turns the sketched solver into the
    /// classical one.
    pub fn exact(n: usize) -> Self {
        SketchOperator {
            kind: SketchKind::Exact,
            s: n,
            n,
            seed: 0,
            payload: Payload::Exact,
        }
    }

    pub fn kind(&self) -> SketchKind {
        self.kind
    }

    pub fn sketch_dim(&self) -> usize {
        self.s
    }

    pub fn source_dim(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Apply the embedding to a block of columns: `S X`, an `s x r` matrix.
    pub fn apply(&self, x: &RMat) -> Result<RMat, SketchError> {
        if x.rows() != self.n {
            return Err(SketchError::DimensionMismatch {
                expected: format!("{} rows", self.n),
                got: format!("{} rows", x.rows()),
            });
        }
        match &self.payload {
            Payload::Exact => Ok(x.clone()),
            Payload::Gaussian(g) => Ok(g.matmul(x)),
            Payload::Srdct {
                signs,
                rows,
                scale,
                plan,
            } => {
                let r = x.cols();
                let mut out = RMat::zeros(self.s, r);
                let mut work = vec![0.0; self.n];
                for c in 0..r {
                    let xc = x.col(c);
                    for i in 0..self.n {
                        work[i] = signs[i] * xc[i];
                    }
                    let coeffs = plan.dct2_orthonormal(&work);
                    for (k, &row) in rows.iter().enumerate() {
                        out[(k, c)] = scale * coeffs[row];
                    }
                }
                Ok(out)
            }
        }
    }
}

/// Free function form of [`SketchOperator::apply`].
pub fn sketch_apply(s: &SketchOperator, x: &RMat) -> Result<RMat, SketchError> {
    s.apply(x)
}

/// Smallest `eps` such that `(1-eps)||v||^2 <= ||S v||^2 <= (1+eps)||v||^2`
/// holds on the range of the given orthonormal basis, computed as
/// `max(1 - sigma_min^2, sigma_max^2 - 1)` of the sketched basis.
pub fn measure_distortion(s: &SketchOperator, basis: &RMat) -> Result<f64, SketchError> {
    let m = basis.cols();
    let gram_dev = basis
        .adjoint_matmul(basis)
        .sub(&RMat::identity(m))
        .frobenius_norm();
    if gram_dev > 1e-10 * (m as f64).max(1.0) {
        return Err(SketchError::NotOrthonormal {
            deviation: gram_dev,
        });
    }
    let sb = s.apply(basis)?;
    let dec = svd(&sb);
    let smax = dec.sigma.first().copied().unwrap_or(0.0);
    let smin = dec.sigma.last().copied().unwrap_or(0.0);
    Ok((1.0 - smin * smin).max(smax * smax - 1.0).max(0.0))
}
