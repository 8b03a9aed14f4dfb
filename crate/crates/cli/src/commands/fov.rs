//! Field-of-values exports: boundaries, the effective partition of the
//! perturbed test matrix, Schur decay profiles, and the random-sketch
//! alpha-shift sweep.

use crate::exit;
use clap::{Args, Subcommand};
use std::io::Write;
use std::path::{Path, PathBuf};
use sylkit::analysis::{
    bounding_ellipse, effective_fov, ellipse_bound, fov_boundary, schur_decay_profile,
};
use sylkit::krylov::{Engine, SolverConfig, SylvesterSession};
use sylkit::la::{
    complex_schur_c, householder_qr, read_dense_matrix_market, solve_sylvester_dense, svd,
    symmetric_alpha, RMat,
};
use sylkit::sketch::{SketchKind, SketchOperator};
use sylkit::sparse::{
    gen_hhat_ex45, gen_toeplitz_ex41, read_matrix_market, spmv_block, BlockVec, SparseMatrix,
};

#[derive(Args)]
pub struct FovArgs {
    #[command(subcommand)]
    pub mode: FovMode,
}

#[derive(Subcommand)]
pub enum FovMode {
    /// Boundary of W(M) as theta,re,im samples
    Boundary {
        /// Sparse Matrix Market file
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Dense Matrix Market array file
        #[arg(long)]
        dense: Option<PathBuf>,
        #[arg(long, default_value_t = 256)]
        angles: usize,
        #[arg(long, default_value = "boundary.csv")]
        out: PathBuf,
    },
    /// Effective-field-of-values partition of the perturbed test matrix
    Effective {
        /// Use the banded Toeplitz test pair of the given dimension
        #[arg(long, default_value_t = true)]
        example45: bool,
        #[arg(long, default_value_t = 100)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-12)]
        drop_threshold: f64,
        #[arg(long, default_value = "effective.csv")]
        out: PathBuf,
    },
    /// Distance-vs-first-entry decay profile (dist,first_entry_mag)
    Decay {
        #[arg(long, default_value_t = true)]
        example45: bool,
        #[arg(long, default_value_t = 100)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "decay.csv")]
        out: PathBuf,
    },
    /// Ellipse convergence bound versus true error on the 1D-Laplacian
    /// Lyapunov problem (d,bound,error rows; empty bound when the
    /// hypotheses fail at that dimension)
    BoundSweep {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        d_min: usize,
        #[arg(long, default_value_t = 30)]
        d_max: usize,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 42)]
        rhs_seed: u64,
        #[arg(long, default_value = "bound.csv")]
        out: PathBuf,
    },
    /// Per-seed shift of alpha under Gaussian sketching of the projected
    /// matrix (banded Toeplitz problem, 5-step Krylov basis)
    SketchSweep {
        #[arg(long, default_value_t = true)]
        example41: bool,
        #[arg(long, default_value_t = 30)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        seeds: u64,
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
    },
}

pub fn run(args: FovArgs) -> i32 {
    match run_inner(args) {
        Ok(()) => exit::OK,
        Err((code, msg)) => {
            eprintln!("sylkit fov: {msg}");
            code
        }
    }
}

fn run_inner(args: FovArgs) -> Result<(), (i32, String)> {
    let data = |e: String| (exit::DATA, e);
    match args.mode {
        FovMode::Boundary {
            matrix,
            dense,
            angles,
            out,
        } => {
            let m = match (matrix, dense) {
                (Some(p), _) => read_matrix_market(&p)
                    .map_err(|e| data(e.to_string()))?
                    .to_dense()
                    .to_complex(),
                (None, Some(p)) => read_dense_matrix_market(&p)
                    .map_err(|e| data(e.to_string()))?
                    .to_complex(),
                (None, None) => return Err((exit::USAGE, "need --matrix or --dense".to_string())),
            };
            let b = fov_boundary(&m, angles).map_err(|e| data(e.to_string()))?;
            let mut f = csv_writer(&out)?;
            wln(&mut f, "theta,re,im")?;
            for (t, z) in b.angles.iter().zip(&b.points) {
                wln(&mut f, &format!("{t:.12},{:.17e},{:.17e}", z.re, z.im))?;
            }
            println!("alpha = {:.12e}", b.alpha);
        }
        FovMode::Effective {
            example45: _,
            d,
            seed,
            drop_threshold,
            out,
        } => {
            let (hhat, hvec) = gen_hhat_ex45(d, seed);
            let eff =
                effective_fov(&hhat, &hvec, drop_threshold).map_err(|e| data(e.to_string()))?;
            let spec = complex_schur_c(&eff.compressed).map_err(|e| data(e.to_string()))?;
            let mut f = csv_writer(&out)?;
            wln(&mut f, "re,im")?;
            for z in spec.eigenvalues() {
                wln(&mut f, &format!("{:.17e},{:.17e}", z.re, z.im))?;
            }
            println!("kept = {}, dropped = {}", eff.kept, eff.dropped);
        }
        FovMode::Decay {
            example45: _,
            d,
            seed,
            out,
        } => {
            let (hhat, hvec) = gen_hhat_ex45(d, seed);
            let prof = schur_decay_profile(&hhat, &hvec).map_err(|e| data(e.to_string()))?;
            let mut f = csv_writer(&out)?;
            wln(&mut f, "dist,first_entry_mag")?;
            for (dist, mag) in &prof.pairs {
                wln(&mut f, &format!("{dist:.17e},{mag:.17e}"))?;
            }
            println!("spearman = {:.6}", prof.spearman);
        }
        FovMode::BoundSweep {
            n,
            d_min,
            d_max,
            k,
            rhs_seed,
            out,
        } => {
            bound_sweep(n, d_min, d_max, k, rhs_seed, &out)?;
        }
        FovMode::SketchSweep {
            example41: _,
            n,
            seeds,
            out,
        } => {
            let a = gen_toeplitz_ex41(n);
            let ones = RMat::from_fn(n, 1, |_, _| 1.0 / (n as f64).sqrt());
            // 5-column Krylov block [b, Ab, ..., A^4 b], orthonormalized.
            let mut cols = ones.clone();
            let mut prev = ones.clone();
            for _ in 0..4 {
                prev = spmv_block(&a, &prev, false).map_err(|e| data(e.to_string()))?;
                cols = cols.hcat(&prev);
            }
            let v = householder_qr(&cols, true).0;
            let dv = a.to_dense();
            let av = dv.matmul(&v);
            let plain = v.adjoint_matmul(&av);
            let alpha_plain = symmetric_alpha(&plain).map_err(|e| data(e.to_string()))?;
            let mut f = csv_writer(&out)?;
            wln(&mut f, "seed,alpha_plain,alpha_sketched,shift")?;
            let s = 2 * v.cols();
            for seed in 0..seeds {
                let op = SketchOperator::gaussian(n, s, seed);
                let sv = op.apply(&v).map_err(|e| data(e.to_string()))?;
                let sav = op.apply(&av).map_err(|e| data(e.to_string()))?;
                let sketched = sv.adjoint_matmul(&sav);
                let alpha_sk = symmetric_alpha(&sketched).map_err(|e| data(e.to_string()))?;
                wln(
                    &mut f,
                    &format!(
                        "{seed},{alpha_plain:.12e},{alpha_sk:.12e},{:.12e}",
                        alpha_sk - alpha_plain
                    ),
                )?;
            }
        }
    }
    Ok(())
}

fn bound_sweep(
    n: usize,
    d_min: usize,
    d_max: usize,
    k: usize,
    rhs_seed: u64,
    out: &Path,
) -> Result<(), (i32, String)> {
    let data = |e: String| (exit::DATA, e);
    let h = 1.0 / (n as f64 + 1.0);
    let w = 1.0 / (h * h);
    let mut t = Vec::with_capacity(3 * n);
    for i in 0..n {
        t.push((i, i, -2.0 * w));
        if i > 0 {
            t.push((i, i - 1, w));
        }
        if i + 1 < n {
            t.push((i, i + 1, w));
        }
    }
    let a = SparseMatrix::from_triplets(n, n, &t).map_err(|e| data(e.to_string()))?;
    let b = a.transpose();
    let c = BlockVec::random_unit(n, 1, rhs_seed).into_mat();
    let x_exact = solve_sylvester_dense(&a.to_dense(), &a.to_dense(), &c.matmul(&c.transpose()))
        .map_err(|e| data(e.to_string()))?;
    let lam_lo = -4.0
        * w
        * ((n as f64) * std::f64::consts::PI / (2.0 * (n as f64 + 1.0)))
            .sin()
            .powi(2);
    let lam_hi = -4.0
        * w
        * (std::f64::consts::PI / (2.0 * (n as f64 + 1.0)))
            .sin()
            .powi(2);

    let mut cfg = SolverConfig::new(Engine::Sketched);
    cfg.k = k;
    cfg.sketch_kind = SketchKind::Exact;
    cfg.maxit = d_max + 2;
    cfg.verify = true;
    cfg.tol = 1e-30;
    let mut session =
        SylvesterSession::new(&a, &b, &c, &c, &cfg).map_err(|e| data(e.to_string()))?;

    let mut f = csv_writer(out)?;
    wln(&mut f, "d,bound,error")?;
    for d in 1..=d_max {
        session.step().map_err(|e| data(e.to_string()))?;
        if d < d_min {
            continue;
        }
        let ps = session.solve_projected().map_err(|e| data(e.to_string()))?;
        let check = session.verify_check(&ps).map_err(|e| data(e.to_string()))?;
        let eps = check.eps_u.unwrap_or(0.0).max(check.eps_v.unwrap_or(0.0));
        let u_shadow = session.fact_u().shadow_stack(d).expect("verify mode");
        let v_shadow = session.fact_v().shadow_stack(d).expect("verify mode");
        let wmat = session.dewhiten(&ps.y).map_err(|e| data(e.to_string()))?;
        let xd = u_shadow.matmul(&wmat).matmul(&v_shadow.transpose());
        let err = svd(&x_exact.sub(&xd)).sigma[0];

        let alpha_m = symmetric_alpha(&ps.h).map_err(|e| data(e.to_string()))?;
        let bound = if alpha_m < 0.0 && eps < 1.0 {
            let fb = fov_boundary(&ps.h.to_complex(), 128).map_err(|e| data(e.to_string()))?;
            let mut pts = fb.points.clone();
            pts.push(num_complex::Complex64::new(lam_lo, 0.0));
            pts.push(num_complex::Complex64::new(lam_hi, 0.0));
            let (ec, a1, a2) = bounding_ellipse(&pts, 0.01);
            ellipse_bound(d, lam_hi.max(fb.alpha), ec, a1, a2, eps).ok()
        } else {
            None
        };
        let bound_field = bound.map(|x| format!("{x:.17e}")).unwrap_or_default();
        wln(&mut f, &format!("{d},{bound_field},{err:.17e}"))?;
    }
    Ok(())
}

fn csv_writer(path: &Path) -> Result<std::io::BufWriter<std::fs::File>, (i32, String)> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| {
                (
                    exit::DATA,
                    format!("cannot create {}: {e}", parent.display()),
                )
            })?;
        }
    }
    std::fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|e| (exit::DATA, format!("cannot create {}: {e}", path.display())))
}

fn wln(f: &mut impl Write, line: &str) -> Result<(), (i32, String)> {
    writeln!(f, "{line}").map_err(|e| (exit::DATA, format!("write failed: {e}")))
}
