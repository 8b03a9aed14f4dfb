//! Tensorized embedding checks: two one-sided embeddings sandwich the
//! Frobenius norm of `U Z V^T` with accuracy `eps_tilde = eps (2 + eps)`.

use super::AnalysisError;
use crate::la::RMat;
use crate::sketch::{measure_distortion, SketchOperator};

#[derive(Debug, Clone)]
pub struct TensorCheck {
    /// `||S_U M S_V^T||_F / ||M||_F`.
    pub ratio: f64,
    /// Max of the measured one-sided distortions.
    pub eps: f64,
    /// `eps (2 + eps)`.
    pub eps_tilde: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

/// Verify `(1 - eps~) ||M||_F <= ||S_U M S_V^T||_F <= (1 + eps~) ||M||_F`
/// for `M = U Z V^T` with orthonormal `U`, `V`, using the *measured*
/// distortions of the embeddings on the two ranges.
pub fn tensor_embedding_check(
    s_u: &SketchOperator,
    s_v: &SketchOperator,
    u: &RMat,
    v: &RMat,
    z: &RMat,
) -> Result<TensorCheck, AnalysisError> {
    assert_eq!(z.rows(), u.cols());
    assert_eq!(z.cols(), v.cols());
    let eps_u = measure_distortion(s_u, u)?;
    let eps_v = measure_distortion(s_v, v)?;
    let eps = eps_u.max(eps_v);
    let eps_tilde = eps * (2.0 + eps);

    let su = s_u.apply(u)?;
    let sv = s_v.apply(v)?;
    let m_norm = z.frobenius_norm(); // ||U Z V^T||_F = ||Z||_F
    let sketched = su.matmul(&z.matmul(&sv.transpose())).frobenius_norm();
    let ratio = if m_norm == 0.0 {
        1.0
    } else {
        sketched / m_norm
    };

    Ok(TensorCheck {
        ratio,
        eps,
        eps_tilde,
        lower_ok: sketched >= (1.0 - eps_tilde) * m_norm - 1e-12 * m_norm,
        upper_ok: sketched <= (1.0 + eps_tilde) * m_norm + 1e-12 * m_norm,
    })
}
