//! End-to-end solve: load or generate the problem, run the selected engine,
//! write history.csv, result.json and the solution factors.

use crate::config::KvConfig;
use crate::exit;
use clap::Args;
use std::io::Write;
use std::path::{Path, PathBuf};
use sylkit::krylov::{solve, Engine, SolveResult, SolverConfig};
use sylkit::la::{read_dense_matrix_market, write_dense_matrix_market, RMat};
use sylkit::sketch::SketchKind;
use sylkit::sparse::{
    gen_convdiff_2d, gen_convdiff_3d, gen_toeplitz_ex41, read_matrix_market, BlockVec, ConvField,
    SparseMatrix,
};

#[derive(Args)]
pub struct SolveArgs {
    /// key=value configuration file; flags override its entries
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Problem source: files | convdiff2d | convdiff3d | toeplitz41
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long)]
    pub a: Option<PathBuf>,
    #[arg(long)]
    pub b: Option<PathBuf>,
    #[arg(long)]
    pub c1: Option<PathBuf>,
    #[arg(long)]
    pub c2: Option<PathBuf>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub field: Option<String>,
    #[arg(long)]
    pub field_b: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub rhs_seed: Option<u64>,
    /// Engine: full | truncated | sketched
    #[arg(long)]
    pub engine: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub maxit: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub k_b: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub s: Option<usize>,
    /// Sketch kind: srdct | gaussian | exact
    #[arg(long)]
    pub sketch: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Keep the printed sqrt(s/n) scaling of the subsampled DCT
    #[arg(long)]
    pub paper_literal_scale: bool,
    #[arg(long)]
    pub rank_tol: Option<f64>,
    #[arg(long)]
    pub chunk: Option<usize>,
    /// Retain shadow bases and per-check diagnostics (small n only)
    #[arg(long)]
    pub verify: bool,
    /// Compute the true relative residual from the factors
    #[arg(long)]
    pub true_residual: bool,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

pub fn run(args: SolveArgs) -> i32 {
    let out = args.out.clone();
    match run_inner(args) {
        Ok(res) => {
            if res.converged {
                exit::OK
            } else {
                exit::MAX_ITERATIONS
            }
        }
        Err((code, msg)) => {
            eprintln!("sylkit solve: {msg}");
            // Machine-readable error in result.json when the directory exists.
            let _ = std::fs::create_dir_all(&out);
            let err_json = serde_json::json!({
                "error": { "code": code, "message": msg }
            });
            let _ = std::fs::write(
                out.join("result.json"),
                serde_json::to_string_pretty(&err_json).unwrap(),
            );
            code
        }
    }
}

fn merged_config(args: &SolveArgs) -> Result<KvConfig, (i32, String)> {
    let mut kv = match &args.config {
        Some(path) => KvConfig::from_file(path).map_err(|e| (exit::DATA, e))?,
        None => KvConfig::default(),
    };
    kv.set_opt("problem", &args.problem);
    kv.set_opt("a", &args.a.as_ref().map(|p| p.display().to_string()));
    kv.set_opt("b", &args.b.as_ref().map(|p| p.display().to_string()));
    kv.set_opt("c1", &args.c1.as_ref().map(|p| p.display().to_string()));
    kv.set_opt("c2", &args.c2.as_ref().map(|p| p.display().to_string()));
    kv.set_opt("grid", &args.grid);
    kv.set_opt("nu", &args.nu);
    kv.set_opt("field", &args.field);
    kv.set_opt("field_b", &args.field_b);
    kv.set_opt("n", &args.n);
    kv.set_opt("r", &args.r);
    kv.set_opt("rhs_seed", &args.rhs_seed);
    kv.set_opt("engine", &args.engine);
    kv.set_opt("tol", &args.tol);
    kv.set_opt("maxit", &args.maxit);
    kv.set_opt("k", &args.k);
    kv.set_opt("k_b", &args.k_b);
    kv.set_opt("p", &args.p);
    kv.set_opt("s", &args.s);
    kv.set_opt("sketch", &args.sketch);
    kv.set_opt("seed", &args.seed);
    if args.paper_literal_scale {
        kv.set("paper_literal_scale", "true".into());
    }
    kv.set_opt("rank_tol", &args.rank_tol);
    kv.set_opt("chunk", &args.chunk);
    if args.verify {
        kv.set("verify", "true".into());
    }
    if args.true_residual {
        kv.set("true_residual", "true".into());
    }
    Ok(kv)
}

pub fn solver_config_from_kv(kv: &KvConfig) -> Result<SolverConfig, (i32, String)> {
    let usage = |e: String| (exit::USAGE, e);
    let engine_name = kv.get("engine").unwrap_or("sketched");
    let engine = Engine::parse(engine_name)
        .ok_or((exit::USAGE, format!("unknown engine `{engine_name}`")))?;
    let mut cfg = SolverConfig::new(engine);
    cfg.tol = kv.parse_or("tol", cfg.tol).map_err(usage)?;
    cfg.maxit = kv.parse_or("maxit", cfg.maxit).map_err(usage)?;
    cfg.k = kv.parse_or("k", cfg.k).map_err(usage)?;
    cfg.k_b = kv.parse("k_b").map_err(usage)?;
    cfg.p = kv.parse_or("p", cfg.p).map_err(usage)?;
    cfg.s = kv.parse_or("s", cfg.s).map_err(usage)?;
    if let Some(name) = kv.get("sketch") {
        cfg.sketch_kind = SketchKind::parse(name)
            .ok_or((exit::USAGE, format!("unknown sketch kind `{name}`")))?;
    }
    cfg.sketch_seed = kv.parse_or("seed", 0).map_err(usage)?;
    cfg.paper_literal_scale = kv.parse_or("paper_literal_scale", false).map_err(usage)?;
    cfg.rank_tol = kv.parse("rank_tol").map_err(usage)?;
    cfg.chunk = kv.parse("chunk").map_err(usage)?;
    cfg.verify = kv.parse_or("verify", false).map_err(usage)?;
    cfg.compute_true_residual = kv.parse_or("true_residual", false).map_err(usage)?;
    if engine == Engine::Full {
        cfg.k = cfg.maxit;
    }
    Ok(cfg)
}

pub struct Problem {
    pub a: SparseMatrix,
    pub b: SparseMatrix,
    pub c1: RMat,
    pub c2: RMat,
}

pub fn problem_from_kv(kv: &KvConfig) -> Result<Problem, (i32, String)> {
    let source = kv
        .get("problem")
        .or(if kv.get("a").is_some() {
            Some("files")
        } else {
            None
        })
        .ok_or((
            exit::USAGE,
            "no problem source (set `problem` or `--a`)".to_string(),
        ))?;
    let data = |e: String| (exit::DATA, e);
    match source {
        "files" => {
            let a_path = kv
                .get("a")
                .ok_or((exit::USAGE, "missing `a`".to_string()))?;
            let a = read_matrix_market(Path::new(a_path)).map_err(|e| data(e.to_string()))?;
            let b = match kv.get("b") {
                Some(p) => read_matrix_market(Path::new(p)).map_err(|e| data(e.to_string()))?,
                None => a.transpose(), // Lyapunov default
            };
            let (c1, c2) = match (kv.get("c1"), kv.get("c2")) {
                (Some(p1), Some(p2)) => (
                    read_dense_matrix_market(Path::new(p1)).map_err(|e| data(e.to_string()))?,
                    read_dense_matrix_market(Path::new(p2)).map_err(|e| data(e.to_string()))?,
                ),
                _ => {
                    let r: usize = kv.parse_or("r", 1).map_err(data)?;
                    let seed: u64 = kv.parse_or("rhs_seed", 0).map_err(data)?;
                    (
                        BlockVec::random_unit(a.n_rows(), r, seed).into_mat(),
                        BlockVec::random_unit(b.n_rows(), r, seed.wrapping_add(1)).into_mat(),
                    )
                }
            };
            Ok(Problem { a, b, c1, c2 })
        }
        "convdiff2d" | "convdiff3d" => {
            let grid: usize = kv
                .parse("grid")
                .map_err(data)?
                .ok_or((exit::USAGE, "missing `grid`".to_string()))?;
            let nu: f64 = kv
                .parse("nu")
                .map_err(data)?
                .ok_or((exit::USAGE, "missing `nu`".to_string()))?;
            let fa = ConvField::parse(kv.get("field").unwrap_or("example61_A"))
                .map_err(|e| data(e.to_string()))?;
            let fb_name = kv.get("field_b").unwrap_or(if source == "convdiff2d" {
                "example61_B"
            } else {
                "example63_B"
            });
            let fb = ConvField::parse(fb_name).map_err(|e| data(e.to_string()))?;
            let (a, b) = if source == "convdiff2d" {
                (
                    gen_convdiff_2d(grid, nu, &fa).map_err(|e| data(e.to_string()))?,
                    gen_convdiff_2d(grid, nu, &fb).map_err(|e| data(e.to_string()))?,
                )
            } else {
                (
                    gen_convdiff_3d(grid, nu, &fa).map_err(|e| data(e.to_string()))?,
                    gen_convdiff_3d(grid, nu, &fb).map_err(|e| data(e.to_string()))?,
                )
            };
            let r: usize = kv.parse_or("r", 1).map_err(data)?;
            let seed: u64 = kv.parse_or("rhs_seed", 0).map_err(data)?;
            let c1 = BlockVec::random_unit(a.n_rows(), r, seed).into_mat();
            let c2 = BlockVec::random_unit(b.n_rows(), r, seed.wrapping_add(1)).into_mat();
            Ok(Problem { a, b, c1, c2 })
        }
        "toeplitz41" => {
            let n: usize = kv.parse_or("n", 30).map_err(data)?;
            let a = gen_toeplitz_ex41(n);
            let b = a.transpose();
            let r: usize = kv.parse_or("r", 1).map_err(data)?;
            let seed: u64 = kv.parse_or("rhs_seed", 0).map_err(data)?;
            let c1 = BlockVec::random_unit(n, r, seed).into_mat();
            let c2 = BlockVec::random_unit(n, r, seed.wrapping_add(1)).into_mat();
            Ok(Problem { a, b, c1, c2 })
        }
        other => Err((exit::USAGE, format!("unknown problem source `{other}`"))),
    }
}

fn run_inner(args: SolveArgs) -> Result<SolveResult, (i32, String)> {
    let kv = merged_config(&args)?;
    let cfg = solver_config_from_kv(&kv)?;
    let problem = problem_from_kv(&kv)?;
    std::fs::create_dir_all(&args.out).map_err(|e| {
        (
            exit::DATA,
            format!("cannot create {}: {e}", args.out.display()),
        )
    })?;

    let t0 = std::time::Instant::now();
    let res = solve(&problem.a, &problem.b, &problem.c1, &problem.c2, &cfg)
        .map_err(|e| (exit::INTERNAL, e.to_string()))?;
    let wall = t0.elapsed().as_secs_f64();

    write_history(&args.out.join("history.csv"), &res).map_err(|e| (exit::DATA, e.to_string()))?;
    write_dense_matrix_market(&res.x1, &args.out.join("X1.mtx"))
        .map_err(|e| (exit::DATA, e.to_string()))?;
    write_dense_matrix_market(&res.x2, &args.out.join("X2.mtx"))
        .map_err(|e| (exit::DATA, e.to_string()))?;

    let mut params = serde_json::Map::new();
    for (k, v) in kv.entries() {
        params.insert(k.clone(), serde_json::Value::String(v.clone()));
    }
    let result_json = serde_json::json!({
        "engine": res.engine.name(),
        "d": res.iterations,
        "rank": res.rank,
        "converged": res.converged,
        "final_rho": res.final_rho,
        "true_residual": res.true_residual,
        "mem_long_vectors": res.mem_long_vectors,
        "wall_s": wall,
        "params": params,
        "error": serde_json::Value::Null,
    });
    std::fs::write(
        args.out.join("result.json"),
        serde_json::to_string_pretty(&result_json).unwrap(),
    )
    .map_err(|e| (exit::DATA, format!("cannot write result.json: {e}")))?;

    Ok(res)
}

fn write_history(path: &Path, res: &SolveResult) -> std::io::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "d,rho,true_res,wall_s,mem_vectors")?;
    for h in &res.history {
        let tr = h.true_res.map(|t| format!("{t:.17e}")).unwrap_or_default();
        writeln!(
            f,
            "{},{:.17e},{},{:.6},{}",
            h.d, h.rho, tr, h.wall_s, h.mem_vectors
        )?;
    }
    Ok(())
}
