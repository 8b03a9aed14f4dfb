//! Python bindings for the sylkit solvers: problem generators, the three
//! Sylvester engines, the dense projected solver, and the ellipse
//! convergence bound.
//!
//! Dense matrices cross the boundary as flat column-major `Vec<f64>` plus
//! explicit dimensions, which keeps the interface free of any array
//! library dependency.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use sylkit::krylov::{solve, Engine, SolveResult, SolverConfig};
use sylkit::la::{solve_sylvester_dense, RMat};
use sylkit::sketch::SketchKind;
use sylkit::sparse::{
    gen_convdiff_2d, gen_convdiff_3d, gen_toeplitz_ex41, read_matrix_market, write_matrix_market,
    BlockVec, ConvField,
};

fn value_err(msg: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(msg.to_string())
}

fn runtime_err(msg: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(msg.to_string())
}

fn rmat_from_flat(data: Vec<f64>, rows: usize, cols: usize) -> PyResult<RMat> {
    if data.len() != rows * cols {
        return Err(value_err(format!(
            "expected {} entries for a {rows}x{cols} matrix, got {}",
            rows * cols,
            data.len()
        )));
    }
    Ok(RMat::from_col_major(rows, cols, &data))
}

/// Sparse coefficient matrix (CSR storage).
#[pyclass(name = "SparseMatrix")]
struct PySparseMatrix {
    inner: sylkit::SparseMatrix,
}

#[pymethods]
impl PySparseMatrix {
    /// 2D convection-diffusion operator (negated discretization) on the
    /// unit square; fields: "example61_A", "example61_B", "zero",
    /// "constant:w1,w2".
    #[staticmethod]
    fn convdiff_2d(grid: usize, nu: f64, field: &str) -> PyResult<Self> {
        let f = ConvField::parse(field).map_err(value_err)?;
        Ok(PySparseMatrix {
            inner: gen_convdiff_2d(grid, nu, &f).map_err(value_err)?,
        })
    }

    /// 3D analogue; fields "example63_A", "example63_B", "zero3",
    /// "constant:w1,w2,w3".
    #[staticmethod]
    fn convdiff_3d(grid: usize, nu: f64, field: &str) -> PyResult<Self> {
        let f = ConvField::parse(field).map_err(value_err)?;
        Ok(PySparseMatrix {
            inner: gen_convdiff_3d(grid, nu, &f).map_err(value_err)?,
        })
    }

    /// Banded Toeplitz test matrix.
    #[staticmethod]
    fn toeplitz(n: usize) -> Self {
        PySparseMatrix {
            inner: gen_toeplitz_ex41(n),
        }
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        Ok(PySparseMatrix {
            inner: read_matrix_market(std::path::Path::new(path)).map_err(value_err)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        write_matrix_market(&self.inner, std::path::Path::new(path)).map_err(runtime_err)
    }

    fn shape(&self) -> (usize, usize) {
        (self.inner.n_rows(), self.inner.n_cols())
    }

    fn nnz(&self) -> usize {
        self.inner.nnz()
    }

    fn transpose(&self) -> Self {
        PySparseMatrix {
            inner: self.inner.transpose(),
        }
    }

    /// Matrix-vector product.
    fn matvec(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        let xm = rmat_from_flat(x, self.inner.n_cols(), 1)?;
        let y = sylkit::sparse::spmv_block(&self.inner, &xm, false).map_err(value_err)?;
        Ok(y.as_slice().to_vec())
    }
}

/// Result of a solver run; the solution is `X ~ X1 @ X2.T`.
#[pyclass(name = "SolveReport")]
struct PySolveReport {
    #[pyo3(get)]
    converged: bool,
    #[pyo3(get)]
    iterations: usize,
    #[pyo3(get)]
    rank: usize,
    #[pyo3(get)]
    mem_long_vectors: usize,
    #[pyo3(get)]
    final_rho: f64,
    #[pyo3(get)]
    true_residual: Option<f64>,
    x1: RMat,
    x2: RMat,
    history: Vec<(usize, f64, usize)>,
}

#[pymethods]
impl PySolveReport {
    /// Left factor: `(rows, cols, column_major_entries)`.
    fn x1(&self) -> (usize, usize, Vec<f64>) {
        (self.x1.rows(), self.x1.cols(), self.x1.as_slice().to_vec())
    }

    fn x2(&self) -> (usize, usize, Vec<f64>) {
        (self.x2.rows(), self.x2.cols(), self.x2.as_slice().to_vec())
    }

    /// Residual-check history as `(d, relative_rho, live_long_vectors)`.
    fn history(&self) -> Vec<(usize, f64, usize)> {
        self.history.clone()
    }
}

impl PySolveReport {
    fn from_result(res: SolveResult) -> Self {
        PySolveReport {
            converged: res.converged,
            iterations: res.iterations,
            rank: res.rank,
            mem_long_vectors: res.mem_long_vectors,
            final_rho: res.final_rho,
            true_residual: res.true_residual,
            history: res
                .history
                .iter()
                .map(|h| (h.d, h.rho, h.mem_vectors))
                .collect(),
            x1: res.x1,
            x2: res.x2,
        }
    }
}

/// Solve `A X + X B = c1 c2^T` by Krylov projection.
///
/// `c1`/`c2` are flat column-major blocks with `r` columns; pass `None`
/// for seeded random unit columns.
#[pyfunction]
#[pyo3(signature = (a, b, c1=None, c2=None, r=1, rhs_seed=0, engine="sketched",
    tol=1e-6, maxit=300, k=10, k_b=None, p=1, s=400, sketch="srdct", seed=0,
    true_residual=false))]
#[allow(clippy::too_many_arguments)]
fn solve_sylvester(
    a: &PySparseMatrix,
    b: &PySparseMatrix,
    c1: Option<Vec<f64>>,
    c2: Option<Vec<f64>>,
    r: usize,
    rhs_seed: u64,
    engine: &str,
    tol: f64,
    maxit: usize,
    k: usize,
    k_b: Option<usize>,
    p: usize,
    s: usize,
    sketch: &str,
    seed: u64,
    true_residual: bool,
) -> PyResult<PySolveReport> {
    let eng = Engine::parse(engine).ok_or_else(|| value_err(format!("unknown engine {engine}")))?;
    let mut cfg = SolverConfig::new(eng);
    cfg.tol = tol;
    cfg.maxit = maxit;
    cfg.k = if eng == Engine::Full { maxit } else { k };
    cfg.k_b = k_b;
    cfg.p = p;
    cfg.s = s;
    cfg.sketch_kind =
        SketchKind::parse(sketch).ok_or_else(|| value_err(format!("unknown sketch {sketch}")))?;
    cfg.sketch_seed = seed;
    cfg.compute_true_residual = true_residual;

    let n1 = a.inner.n_rows();
    let n2 = b.inner.n_rows();
    let c1m = match c1 {
        Some(v) => rmat_from_flat(v, n1, r)?,
        None => BlockVec::random_unit(n1, r, rhs_seed).into_mat(),
    };
    let c2m = match c2 {
        Some(v) => rmat_from_flat(v, n2, r)?,
        None => BlockVec::random_unit(n2, r, rhs_seed.wrapping_add(1)).into_mat(),
    };
    let res = solve(&a.inner, &b.inner, &c1m, &c2m, &cfg).map_err(runtime_err)?;
    Ok(PySolveReport::from_result(res))
}

/// Dense Bartels–Stewart solve of `H Y + Y G^T = C`; all matrices flat
/// column-major, returns `Y` the same way.
#[pyfunction]
#[pyo3(name = "solve_sylvester_dense")]
fn solve_sylvester_dense_py(
    h: Vec<f64>,
    m: usize,
    g: Vec<f64>,
    p: usize,
    c: Vec<f64>,
) -> PyResult<Vec<f64>> {
    let hm = rmat_from_flat(h, m, m)?;
    let gm = rmat_from_flat(g, p, p)?;
    let cm = rmat_from_flat(c, m, p)?;
    let y = solve_sylvester_dense(&hm, &gm, &cm).map_err(runtime_err)?;
    Ok(y.as_slice().to_vec())
}

/// Explicit ellipse convergence bound (center at `(-c, 0)`).
#[pyfunction]
#[pyo3(name = "ellipse_bound")]
fn ellipse_bound_py(d: usize, alpha_max: f64, c: f64, a1: f64, a2: f64, eps: f64) -> PyResult<f64> {
    sylkit::analysis::ellipse_bound(d, alpha_max, c, a1, a2, eps).map_err(value_err)
}

/// Faber-bound constant.
#[pyfunction]
#[pyo3(name = "eta_eps")]
fn eta_eps_py(eps: f64) -> PyResult<f64> {
    sylkit::analysis::eta_eps(eps).map_err(value_err)
}

#[pymodule]
fn pysylkit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySparseMatrix>()?;
    m.add_class::<PySolveReport>()?;
    m.add_function(wrap_pyfunction!(solve_sylvester, m)?)?;
    m.add_function(wrap_pyfunction!(solve_sylvester_dense_py, m)?)?;
    m.add_function(wrap_pyfunction!(ellipse_bound_py, m)?)?;
    m.add_function(wrap_pyfunction!(eta_eps_py, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
