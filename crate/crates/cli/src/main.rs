//! `sylkit` — generate benchmark problems, run the Sylvester solvers,
//! reproduce the benchmark tables at desk scale, and export
//! field-of-values diagnostics.

mod commands;
mod config;

use clap::Parser;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const MAX_ITERATIONS: i32 = 2;
    pub const USAGE: i32 = 64;
    pub const DATA: i32 = 65;
    pub const INTERNAL: i32 = 70;
}

#[derive(Parser)]
#[command(
    name = "sylkit",
    version,
    about = "Sparse Sylvester/Lyapunov solver toolkit"
)]
enum Cli {
    /// Generate benchmark matrices and right-hand sides
    Gen(commands::gen::GenArgs),
    /// Solve A X + X B = C1 C2^T
    Solve(commands::solve::SolveArgs),
    /// Run a desk-scale benchmark suite
    Bench(commands::bench::BenchArgs),
    /// Field-of-values diagnostics
    Fov(commands::fov::FovArgs),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Render clap's message but use the usage exit code.
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            std::process::exit(if is_help { exit::OK } else { exit::USAGE });
        }
    };
    let code = match cli {
        Cli::Gen(args) => commands::gen::run(args),
        Cli::Solve(args) => commands::solve::run(args),
        Cli::Bench(args) => commands::bench::run(args),
        Cli::Fov(args) => commands::fov::run(args),
    };
    std::process::exit(code);
}
