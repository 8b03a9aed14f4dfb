//! Desk-scale benchmark suites mirroring the shapes of the reference
//! experiments: 2D convection-diffusion with full vs sketched engines,
//! the truncated engine with split truncation depths, and the 3D problem.

use crate::exit;
use clap::Args;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Mutex;
use sylkit::krylov::{solve, Engine, SolverConfig};
use sylkit::sketch::SketchKind;
use sylkit::sparse::{gen_convdiff_2d, gen_convdiff_3d, BlockVec, ConvField};

#[derive(Args)]
pub struct BenchArgs {
    /// Suite: table1-desk | table2-desk | table3-desk
    pub suite: String,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Use the reference-scale problem sizes instead of desk scale
    #[arg(long)]
    pub full_scale: bool,
}

#[derive(Clone)]
struct Job {
    label: String,
    nu: f64,
    grid: usize,
    three_d: bool,
    cfg: SolverConfig,
}

struct Row {
    idx: usize,
    label: String,
    nu: f64,
    grid: usize,
    engine: String,
    p: usize,
    k: usize,
    k_b: usize,
    s: usize,
    d: usize,
    time_s: f64,
    mem: usize,
    rank: usize,
    converged: bool,
    final_rho: f64,
    error: String,
}

pub fn run(args: BenchArgs) -> i32 {
    let jobs = match build_jobs(&args) {
        Ok(j) => j,
        Err(msg) => {
            eprintln!("sylkit bench: {msg}");
            return exit::USAGE;
        }
    };
    if let Err(e) = std::fs::create_dir_all(&args.out) {
        eprintln!("sylkit bench: cannot create {}: {e}", args.out.display());
        return exit::DATA;
    }

    let threads: usize = std::env::var("SYLKIT_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(1)
        .max(1);

    let queue: Mutex<Vec<(usize, Job)>> = Mutex::new(jobs.into_iter().enumerate().rev().collect());
    let rows: Mutex<Vec<Row>> = Mutex::new(Vec::new());

    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let job = { queue.lock().unwrap().pop() };
                let Some((idx, job)) = job else { break };
                let row = run_job(idx, job);
                rows.lock().unwrap().push(row);
            });
        }
    });

    let mut rows = rows.into_inner().unwrap();
    rows.sort_by_key(|r| r.idx);
    let path = args.out.join("report.csv");
    match write_report(&path, &rows) {
        Ok(()) => {
            println!("wrote {}", path.display());
            exit::OK
        }
        Err(e) => {
            eprintln!("sylkit bench: cannot write report: {e}");
            exit::DATA
        }
    }
}

fn build_jobs(args: &BenchArgs) -> Result<Vec<Job>, String> {
    let mut jobs = Vec::new();
    match args.suite.as_str() {
        "table1-desk" => {
            let grid = if args.full_scale { 300 } else { 100 };
            let s = if args.full_scale { 1200 } else { 400 };
            let maxit = if args.full_scale { 800 } else { 400 };
            for &nu in &[0.1, 0.01] {
                for engine in [Engine::Full, Engine::Sketched] {
                    for &p in &[1usize, 10] {
                        let mut cfg = SolverConfig::new(engine);
                        cfg.tol = 1e-6;
                        cfg.maxit = maxit;
                        cfg.k = if engine == Engine::Full { maxit } else { 10 };
                        cfg.p = p;
                        cfg.s = s;
                        cfg.sketch_kind = SketchKind::Srdct;
                        cfg.compute_true_residual = true;
                        jobs.push(Job {
                            label: format!("{}-nu{nu}-p{p}", engine.name()),
                            nu,
                            grid,
                            three_d: false,
                            cfg,
                        });
                    }
                }
            }
        }
        "table2-desk" => {
            let grid = if args.full_scale { 300 } else { 100 };
            let maxit = if args.full_scale { 1000 } else { 600 };
            for &nu in &[0.1, 0.01] {
                let mut cfg = SolverConfig::new(Engine::Full);
                cfg.tol = 1e-6;
                cfg.maxit = maxit;
                cfg.k = maxit;
                cfg.p = 10;
                cfg.compute_true_residual = true;
                jobs.push(Job {
                    label: format!("full-nu{nu}"),
                    nu,
                    grid,
                    three_d: false,
                    cfg,
                });
                for &k_b in &[40usize, 60] {
                    let mut cfg = SolverConfig::new(Engine::Truncated);
                    cfg.tol = 1e-6;
                    cfg.maxit = maxit;
                    cfg.k = 40;
                    cfg.k_b = Some(k_b);
                    cfg.p = 10;
                    cfg.compute_true_residual = true;
                    jobs.push(Job {
                        label: format!("truncated-nu{nu}-kb{k_b}"),
                        nu,
                        grid,
                        three_d: false,
                        cfg,
                    });
                }
            }
        }
        "table3-desk" => {
            let grids: &[usize] = if args.full_scale {
                &[50, 60]
            } else {
                &[22, 27]
            };
            for &grid in grids {
                let mut cfg = SolverConfig::new(Engine::Sketched);
                cfg.tol = 1e-6;
                cfg.maxit = 250;
                cfg.k = 3;
                cfg.p = 10;
                cfg.s = 500;
                cfg.sketch_kind = SketchKind::Srdct;
                cfg.compute_true_residual = true;
                jobs.push(Job {
                    label: format!("sketched-3d-grid{grid}"),
                    nu: 0.005,
                    grid,
                    three_d: true,
                    cfg,
                });
            }
        }
        other => return Err(format!("unknown suite `{other}`")),
    }
    Ok(jobs)
}

fn run_job(idx: usize, job: Job) -> Row {
    let t0 = std::time::Instant::now();
    let outcome = (|| -> Result<_, String> {
        let (a, b) = if job.three_d {
            (
                gen_convdiff_3d(job.grid, job.nu, &ConvField::Example63A)
                    .map_err(|e| e.to_string())?,
                gen_convdiff_3d(job.grid, job.nu, &ConvField::Example63B)
                    .map_err(|e| e.to_string())?,
            )
        } else {
            (
                gen_convdiff_2d(job.grid, job.nu, &ConvField::Example61A)
                    .map_err(|e| e.to_string())?,
                gen_convdiff_2d(job.grid, job.nu, &ConvField::Example61B)
                    .map_err(|e| e.to_string())?,
            )
        };
        let c1 = BlockVec::random_unit(a.n_rows(), 1, 0).into_mat();
        let c2 = BlockVec::random_unit(b.n_rows(), 1, 1).into_mat();
        solve(&a, &b, &c1, &c2, &job.cfg).map_err(|e| e.to_string())
    })();
    let time_s = t0.elapsed().as_secs_f64();

    match outcome {
        Ok(res) => Row {
            idx,
            label: job.label,
            nu: job.nu,
            grid: job.grid,
            engine: job.cfg.engine.name().to_string(),
            p: job.cfg.p,
            k: job.cfg.k,
            k_b: job.cfg.k_b.unwrap_or(job.cfg.k),
            s: if job.cfg.engine == Engine::Sketched {
                job.cfg.s
            } else {
                0
            },
            d: res.iterations,
            time_s,
            mem: res.mem_long_vectors,
            rank: res.rank,
            converged: res.converged,
            final_rho: res.final_rho,
            error: String::new(),
        },
        Err(msg) => Row {
            idx,
            label: job.label,
            nu: job.nu,
            grid: job.grid,
            engine: job.cfg.engine.name().to_string(),
            p: job.cfg.p,
            k: job.cfg.k,
            k_b: job.cfg.k_b.unwrap_or(job.cfg.k),
            s: job.cfg.s,
            d: 0,
            time_s,
            mem: 0,
            rank: 0,
            converged: false,
            final_rho: f64::NAN,
            error: msg,
        },
    }
}

fn write_report(path: &std::path::Path, rows: &[Row]) -> std::io::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        f,
        "label,nu,grid,engine,p,k,k_b,s,d,time_s,mem,rank,converged,final_rho,error"
    )?;
    for r in rows {
        writeln!(
            f,
            "{},{},{},{},{},{},{},{},{},{:.3},{},{},{},{:.6e},{}",
            r.label,
            r.nu,
            r.grid,
            r.engine,
            r.p,
            r.k,
            r.k_b,
            r.s,
            r.d,
            r.time_s,
            r.mem,
            r.rank,
            r.converged,
            r.final_rho,
            r.error
        )?;
    }
    Ok(())
}
