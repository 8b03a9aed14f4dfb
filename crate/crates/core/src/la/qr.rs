//! Householder QR with a fixed sign convention.

use super::RMat;

/// QR factorization `M = Q R` by Householder reflections.
///
/// With `thin` set (requires `rows >= cols`), `Q` is `rows x cols` with
/// orthonormal columns and `R` is `cols x cols`; otherwise `Q` is square
/// `rows x rows` and `R` is `rows x cols`. The diagonal of `R` is forced
/// nonnegative so the factorization is deterministic. Rank deficiency shows
/// up as (near-)zero diagonal entries of `R` and is not rejected here.
pub fn householder_qr(m: &RMat, thin: bool) -> (RMat, RMat) {
    let rows = m.rows();
    let cols = m.cols();
    if thin {
        assert!(rows >= cols, "thin QR requires rows >= cols");
    }
    let steps = cols
        .min(rows.saturating_sub(1))
        .min(if thin { cols } else { rows });

    let mut r = m.clone();
    // Householder vectors stored per step; applied to assemble Q afterwards.
    let mut vs: Vec<Vec<f64>> = Vec::with_capacity(steps);

    for k in 0..steps {
        // Reflector annihilating r[k+1.., k].
        let mut v: Vec<f64> = (k..rows).map(|i| r[(i, k)]).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            vs.push(Vec::new());
            continue;
        }
        let alpha = if v[0] >= 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            vs.push(Vec::new());
            continue;
        }
        // Apply I - 2 v v^T / (v^T v) to the trailing columns.
        for j in k..cols {
            let mut dot = 0.0;
            for i in k..rows {
                dot += v[i - k] * r[(i, j)];
            }
            let t = 2.0 * dot / vnorm2;
            for i in k..rows {
                let dv = t * v[i - k];
                r[(i, j)] -= dv;
            }
        }
        // Clean the annihilated entries exactly.
        r[(k, k)] = alpha;
        for i in k + 1..rows {
            r[(i, k)] = 0.0;
        }
        vs.push(v);
    }

    // Assemble Q by applying the reflectors to the identity, last first.
    let qcols = if thin { cols } else { rows };
    let mut q = RMat::zeros(rows, qcols);
    for j in 0..qcols {
        q[(j, j)] = 1.0;
    }
    for k in (0..steps).rev() {
        let v = &vs[k];
        if v.is_empty() {
            continue;
        }
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        for j in 0..qcols {
            let mut dot = 0.0;
            for i in k..rows {
                dot += v[i - k] * q[(i, j)];
            }
            let t = 2.0 * dot / vnorm2;
            for i in k..rows {
                q[(i, j)] -= t * v[i - k];
            }
        }
    }

    let mut r_out = if thin { r.block(0, cols, 0, cols) } else { r };

    // Sign convention: nonnegative diagonal of R.
    for k in 0..r_out.rows().min(r_out.cols()) {
        if r_out[(k, k)] < 0.0 {
            for j in 0..r_out.cols() {
                r_out[(k, j)] = -r_out[(k, j)];
            }
            for i in 0..rows {
                q[(i, k)] = -q[(i, k)];
            }
        }
    }

    (q, r_out)
}
