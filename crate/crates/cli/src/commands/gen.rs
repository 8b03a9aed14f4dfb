//! Problem generation: matrices, right-hand sides and a manifest.

use crate::exit;
use clap::Args;
use std::path::PathBuf;
use sylkit::la::write_dense_matrix_market;
use sylkit::sparse::{
    gen_convdiff_2d, gen_convdiff_3d, gen_hhat_ex45, gen_toeplitz_ex41, write_matrix_market,
    BlockVec, ConvField,
};

#[derive(Args)]
pub struct GenArgs {
    /// Generator: convdiff2d | convdiff3d | toeplitz41 | hhat45
    pub generator: String,
    /// Grid points per dimension (convdiff generators)
    #[arg(long)]
    pub grid: Option<usize>,
    /// Viscosity
    #[arg(long)]
    pub nu: Option<f64>,
    /// Convection field for A (e.g. example61_A, example63_A, zero,
    /// constant:w1,w2[,w3])
    #[arg(long)]
    pub field: Option<String>,
    /// Convection field for B; when present B.mtx is also written
    #[arg(long)]
    pub field_b: Option<String>,
    /// Matrix size (toeplitz41) or dimension d (hhat45)
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    /// Right-hand-side block width
    #[arg(long, default_value_t = 1)]
    pub r: usize,
    /// Seed for the right-hand sides / random entries
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

pub fn run(args: GenArgs) -> i32 {
    match run_inner(&args) {
        Ok(()) => exit::OK,
        Err((code, msg)) => {
            eprintln!("sylkit gen: {msg}");
            code
        }
    }
}

fn run_inner(args: &GenArgs) -> Result<(), (i32, String)> {
    std::fs::create_dir_all(&args.out).map_err(|e| {
        (
            exit::DATA,
            format!("cannot create {}: {e}", args.out.display()),
        )
    })?;
    let io_err = |e: sylkit::sparse::SparseError| (exit::DATA, e.to_string());
    let la_err = |e: sylkit::la::LaError| (exit::DATA, e.to_string());

    let mut manifest = serde_json::Map::new();
    manifest.insert("generator".into(), args.generator.clone().into());
    manifest.insert("seed".into(), args.seed.into());
    manifest.insert("r".into(), args.r.into());

    let mut n_rows = 0usize;
    match args.generator.as_str() {
        "convdiff2d" | "convdiff3d" => {
            let grid = args
                .grid
                .ok_or((exit::USAGE, "--grid is required".to_string()))?;
            let nu = args
                .nu
                .ok_or((exit::USAGE, "--nu is required".to_string()))?;
            let field_a = args
                .field
                .as_deref()
                .ok_or((exit::USAGE, "--field is required".to_string()))?;
            let fa = ConvField::parse(field_a).map_err(io_err)?;
            let a = if args.generator == "convdiff2d" {
                gen_convdiff_2d(grid, nu, &fa).map_err(io_err)?
            } else {
                gen_convdiff_3d(grid, nu, &fa).map_err(io_err)?
            };
            n_rows = a.n_rows();
            write_matrix_market(&a, &args.out.join("A.mtx")).map_err(io_err)?;
            manifest.insert("grid".into(), grid.into());
            manifest.insert("nu".into(), nu.into());
            manifest.insert("field".into(), field_a.into());
            if let Some(fb_name) = &args.field_b {
                let fb = ConvField::parse(fb_name).map_err(io_err)?;
                let b = if args.generator == "convdiff2d" {
                    gen_convdiff_2d(grid, nu, &fb).map_err(io_err)?
                } else {
                    gen_convdiff_3d(grid, nu, &fb).map_err(io_err)?
                };
                write_matrix_market(&b, &args.out.join("B.mtx")).map_err(io_err)?;
                manifest.insert("field_b".into(), fb_name.clone().into());
            }
        }
        "toeplitz41" => {
            let n = args.n.ok_or((exit::USAGE, "--n is required".to_string()))?;
            let a = gen_toeplitz_ex41(n);
            n_rows = a.n_rows();
            write_matrix_market(&a, &args.out.join("A.mtx")).map_err(io_err)?;
            manifest.insert("n".into(), n.into());
        }
        "hhat45" => {
            let d = args.d.ok_or((exit::USAGE, "--d is required".to_string()))?;
            let (hhat, hvec) = gen_hhat_ex45(d, args.seed);
            write_dense_matrix_market(&hhat, &args.out.join("Hhat.mtx")).map_err(la_err)?;
            let hv = sylkit::la::RMat::from_fn(d, 1, |i, _| hvec[i]);
            write_dense_matrix_market(&hv, &args.out.join("hhat.mtx")).map_err(la_err)?;
            manifest.insert("d".into(), d.into());
        }
        other => return Err((exit::USAGE, format!("unknown generator `{other}`"))),
    }

    if n_rows > 0 {
        let c1 = BlockVec::random_unit(n_rows, args.r, args.seed).into_mat();
        let c2 = BlockVec::random_unit(n_rows, args.r, args.seed.wrapping_add(1)).into_mat();
        write_dense_matrix_market(&c1, &args.out.join("C1.mtx")).map_err(la_err)?;
        write_dense_matrix_market(&c2, &args.out.join("C2.mtx")).map_err(la_err)?;
        manifest.insert("n".into(), n_rows.into());
    }

    let manifest_path = args.out.join("manifest.json");
    std::fs::write(
        &manifest_path,
        serde_json::to_string_pretty(&serde_json::Value::Object(manifest)).unwrap(),
    )
    .map_err(|e| (exit::DATA, format!("cannot write manifest: {e}")))?;
    Ok(())
}
