//! Diagnostics for the theory behind the sketched solver: field-of-values
//! boundaries, the effective field of values of the perturbed whitened
//! Hessenberg matrix, Schur-vector decay profiles, an explicit ellipse
//! convergence bound, the distance between the sketched and the full
//! Galerkin solutions, and tensorized embedding checks.

mod bounds;
mod effective;
mod embed;
mod fov;

pub use bounds::{
    bounding_ellipse, distance_to_full_bound, ellipse_bound, eta_eps, invert_dense, kron_sum,
    DistanceBound,
};
pub use effective::{
    effective_fov, effective_lyapunov_solve, schur_decay_profile, DecayProfile, EffectiveFovResult,
};
pub use embed::{tensor_embedding_check, TensorCheck};
pub use fov::{fov_boundary, FovBoundary};

use crate::krylov::SolveError;
use crate::la::LaError;
use crate::sketch::SketchError;
use std::fmt;

#[derive(Debug)]
pub enum AnalysisError {
    /// Ellipse parameters violate the bound's hypotheses.
    InvalidGeometry(String),
    La(LaError),
    Sketch(SketchError),
    Solve(SolveError),
    /// The diagnostic needs retained bases (verification mode, small n).
    VerificationRequired(String),
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisError::InvalidGeometry(s) => write!(f, "invalid geometry: {s}"),
            AnalysisError::La(e) => write!(f, "{e}"),
            AnalysisError::Sketch(e) => write!(f, "{e}"),
            AnalysisError::Solve(e) => write!(f, "{e}"),
            AnalysisError::VerificationRequired(s) => {
                write!(f, "verification mode required: {s}")
            }
        }
    }
}

impl std::error::Error for AnalysisError {}

impl From<LaError> for AnalysisError {
    fn from(e: LaError) -> Self {
        AnalysisError::La(e)
    }
}

impl From<SketchError> for AnalysisError {
    fn from(e: SketchError) -> Self {
        AnalysisError::Sketch(e)
    }
}

impl From<SolveError> for AnalysisError {
    fn from(e: SolveError) -> Self {
        AnalysisError::Solve(e)
    }
}
