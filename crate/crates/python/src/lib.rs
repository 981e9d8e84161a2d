//! Python bindings for the batched PDHG solver and its drivers.

use pyo3::exceptions::{PyIOError, PyIndexError, PyValueError};
use pyo3::prelude::*;

use batchlp_core::bounds::Bounds;
use batchlp_core::fsb::{self, FsbConfig, FsbRequest};
use batchlp_core::io::{self as bio, Family, InstanceSpec};
use batchlp_core::model::{self, BatchProblem, ColumnOverride, ObjectiveMode, OverrideKind};
use batchlp_core::obbt::{self, ObbtConfig};
use batchlp_core::oracle::{self, OracleStatus};
use batchlp_core::pdhg::{self, ReducedCostMode};
use batchlp_core::sparse::SparseMatrix;
use batchlp_core::{tuner, Error};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(msg) => PyIOError::new_err(msg),
        Error::ColumnOutOfRange { .. } => PyIndexError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// A linear program `min cᵀx` subject to `l ≤ Ax ≤ u` and `x̲ ≤ x ≤ x̄`.
#[pyclass(name = "LpProblem", module = "batchlp", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyLpProblem {
    inner: model::LpProblem,
}

#[pymethods]
impl PyLpProblem {
    /// `triplets` holds `(row, column, value)` entries of `A`.
    #[new]
    #[pyo3(signature = (n_rows, n_cols, triplets, c, row_lower, row_upper, var_lower, var_upper))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        n_rows: usize,
        n_cols: usize,
        triplets: Vec<(usize, usize, f64)>,
        c: Vec<f64>,
        row_lower: Vec<f64>,
        row_upper: Vec<f64>,
        var_lower: Vec<f64>,
        var_upper: Vec<f64>,
    ) -> PyResult<Self> {
        let a = SparseMatrix::from_triplets(n_rows, n_cols, &triplets).map_err(to_py)?;
        let rows = Bounds::new(row_lower, row_upper).map_err(to_py)?;
        let vars = Bounds::new(var_lower, var_upper).map_err(to_py)?;
        let inner = model::LpProblem::new(a, c, rows, vars).map_err(to_py)?;
        Ok(PyLpProblem { inner })
    }

    #[getter]
    fn n_rows(&self) -> usize {
        self.inner.n_rows()
    }

    #[getter]
    fn n_cols(&self) -> usize {
        self.inner.n_cols()
    }

    #[getter]
    fn nnz(&self) -> usize {
        self.inner.a.nnz()
    }

    #[getter]
    fn c(&self) -> Vec<f64> {
        self.inner.c.clone()
    }

    #[getter]
    fn var_bounds(&self) -> Vec<(f64, f64)> {
        self.inner.var_bounds.iter().map(|iv| (iv.lower, iv.upper)).collect()
    }

    #[getter]
    fn row_bounds(&self) -> Vec<(f64, f64)> {
        self.inner.row_bounds.iter().map(|iv| (iv.lower, iv.upper)).collect()
    }

    fn triplets(&self) -> Vec<(usize, usize, f64)> {
        self.inner.a.triplets()
    }

    fn objective(&self, x: Vec<f64>) -> PyResult<f64> {
        if x.len() != self.inner.n_cols() {
            return Err(PyValueError::new_err(format!("expected {} values, got {}", self.inner.n_cols(), x.len())));
        }
        Ok(self.inner.objective(&x))
    }

    fn __repr__(&self) -> String {
        format!("LpProblem(n_rows={}, n_cols={}, nnz={})", self.inner.n_rows(), self.inner.n_cols(), self.inner.a.nnz())
    }
}

#[pyclass(name = "SolverConfig", module = "batchlp", get_all, set_all, skip_from_py_object)]
#[derive(Clone)]
struct PySolverConfig {
    eps_opt: f64,
    eps_infeas: f64,
    eps_dual: Option<f64>,
    theta: f64,
    beta_sufficient: f64,
    beta_necessary: f64,
    beta_artificial: f64,
    max_iterations: usize,
    termination_check_period: usize,
    w_init: f64,
    /// "projection" or "primal_aware".
    reduced_cost: String,
    average_over_all_columns: bool,
}

impl PySolverConfig {
    fn to_core(&self) -> PyResult<pdhg::SolverConfig> {
        let reduced_cost = match self.reduced_cost.as_str() {
            "projection" => ReducedCostMode::Projection,
            "primal_aware" => ReducedCostMode::PrimalAware,
            other => return Err(PyValueError::new_err(format!("unknown reduced cost mode '{other}'"))),
        };
        let cfg = pdhg::SolverConfig {
            eps_opt: self.eps_opt,
            eps_infeas: self.eps_infeas,
            eps_dual: self.eps_dual,
            theta: self.theta,
            beta_sufficient: self.beta_sufficient,
            beta_necessary: self.beta_necessary,
            beta_artificial: self.beta_artificial,
            max_iterations: self.max_iterations,
            termination_check_period: self.termination_check_period,
            w_init: self.w_init,
            reduced_cost,
            average_over_all_columns: self.average_over_all_columns,
            trace: false,
        };
        cfg.validate().map_err(to_py)?;
        Ok(cfg)
    }
}

#[pymethods]
impl PySolverConfig {
    #[new]
    #[pyo3(signature = (
        eps_opt = 1e-4, eps_infeas = 1e-8, eps_dual = None, theta = 0.5,
        beta_sufficient = 0.2, beta_necessary = 0.8, beta_artificial = 0.36,
        max_iterations = 100_000, termination_check_period = 64, w_init = 1.0,
        reduced_cost = "projection".to_string(), average_over_all_columns = false
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        eps_opt: f64,
        eps_infeas: f64,
        eps_dual: Option<f64>,
        theta: f64,
        beta_sufficient: f64,
        beta_necessary: f64,
        beta_artificial: f64,
        max_iterations: usize,
        termination_check_period: usize,
        w_init: f64,
        reduced_cost: String,
        average_over_all_columns: bool,
    ) -> PyResult<Self> {
        let cfg = PySolverConfig {
            eps_opt,
            eps_infeas,
            eps_dual,
            theta,
            beta_sufficient,
            beta_necessary,
            beta_artificial,
            max_iterations,
            termination_check_period,
            w_init,
            reduced_cost,
            average_over_all_columns,
        };
        cfg.to_core()?;
        Ok(cfg)
    }
}

fn core_config(config: Option<PyRef<'_, PySolverConfig>>) -> PyResult<pdhg::SolverConfig> {
    match config {
        Some(c) => c.to_core(),
        None => Ok(pdhg::SolverConfig::default()),
    }
}

#[pyclass(name = "SolveResult", module = "batchlp", frozen, get_all)]
struct PySolveResult {
    /// "optimal", "primal_infeasible", "dual_infeasible" or "iteration_limit".
    status: String,
    objective: f64,
    dual_objective: f64,
    x: Vec<f64>,
    y: Vec<f64>,
    r: Vec<f64>,
    iterations: usize,
    restarts: usize,
    primal_weight: f64,
}

impl From<pdhg::SolveResult> for PySolveResult {
    fn from(r: pdhg::SolveResult) -> Self {
        PySolveResult {
            status: r.status.as_str().to_string(),
            objective: r.objective,
            dual_objective: r.dual_objective,
            x: r.x,
            y: r.y,
            r: r.r,
            iterations: r.iterations,
            restarts: r.restarts,
            primal_weight: r.primal_weight,
        }
    }
}

#[pymethods]
impl PySolveResult {
    fn __repr__(&self) -> String {
        format!("SolveResult(status='{}', objective={}, iterations={})", self.status, self.objective, self.iterations)
    }
}

/// Solves one LP, optionally warm started from `(x, y)`.
#[pyfunction]
#[pyo3(signature = (problem, config = None, x0 = None, y0 = None))]
fn solve(
    py: Python<'_>,
    problem: PyRef<'_, PyLpProblem>,
    config: Option<PyRef<'_, PySolverConfig>>,
    x0: Option<Vec<f64>>,
    y0: Option<Vec<f64>>,
) -> PyResult<PySolveResult> {
    let cfg = core_config(config)?;
    let initial = match (x0, y0) {
        (Some(x), Some(y)) => Some((x, y)),
        (None, None) => None,
        _ => return Err(PyValueError::new_err("give both x0 and y0 or neither")),
    };
    let p = &problem.inner;
    let r = py.detach(|| pdhg::solve(p, &cfg, initial)).map_err(to_py)?;
    Ok(r.into())
}

fn override_kind(name: &str) -> PyResult<OverrideKind> {
    match name {
        "objective" => Ok(OverrideKind::Objective),
        "lower" => Ok(OverrideKind::VariableLower),
        "upper" => Ok(OverrideKind::VariableUpper),
        other => Err(PyValueError::new_err(format!("unknown override kind '{other}', expected objective, lower or upper"))),
    }
}

/// Solves `width` variants of `problem` in one batch. Each override is
/// `(column, kind, variable, value)` with kind "objective", "lower" or "upper".
#[pyfunction]
#[pyo3(signature = (problem, width, overrides = Vec::new(), config = None))]
fn solve_batch(
    py: Python<'_>,
    problem: PyRef<'_, PyLpProblem>,
    width: usize,
    overrides: Vec<(usize, String, usize, f64)>,
    config: Option<PyRef<'_, PySolverConfig>>,
) -> PyResult<Vec<PySolveResult>> {
    let cfg = core_config(config)?;
    let ovs = overrides
        .into_iter()
        .map(|(column, kind, variable, value)| Ok(ColumnOverride { column, kind: override_kind(&kind)?, variable, value }))
        .collect::<PyResult<Vec<_>>>()?;
    let batch = BatchProblem::new(problem.inner.clone(), width, ObjectiveMode::Shared, ovs, None).map_err(to_py)?;
    let res = py.detach(|| pdhg::solve_batch(&batch, &cfg)).map_err(to_py)?;
    Ok(res.results.into_iter().map(Into::into).collect())
}

/// Reference vertex-enumeration solve for tiny problems.
/// Returns `(status, objective, vertex)`.
#[pyfunction]
fn oracle_solve(problem: PyRef<'_, PyLpProblem>) -> PyResult<(String, f64, Option<Vec<f64>>)> {
    let r = oracle::oracle_solve(&problem.inner).map_err(to_py)?;
    let status = match r.status {
        OracleStatus::Optimal => "optimal",
        OracleStatus::Infeasible => "infeasible",
        OracleStatus::Unbounded => "unbounded",
    };
    Ok((status.to_string(), r.objective, r.vertex))
}

#[pyclass(name = "MpsModel", module = "batchlp", frozen, get_all)]
struct PyMpsModel {
    name: String,
    problem: Py<PyLpProblem>,
    integer: Vec<usize>,
    row_names: Vec<String>,
    col_names: Vec<String>,
    objective_offset: f64,
}

fn wrap_model(py: Python<'_>, m: bio::MpsModel) -> PyResult<PyMpsModel> {
    Ok(PyMpsModel {
        name: m.name,
        problem: Py::new(py, PyLpProblem { inner: m.problem })?,
        integer: m.integer,
        row_names: m.row_names,
        col_names: m.col_names,
        objective_offset: m.objective_offset,
    })
}

#[pyfunction]
fn parse_mps(py: Python<'_>, text: &str) -> PyResult<PyMpsModel> {
    wrap_model(py, bio::parse_mps(text).map_err(to_py)?)
}

#[pyfunction]
fn read_mps(py: Python<'_>, path: std::path::PathBuf) -> PyResult<PyMpsModel> {
    wrap_model(py, bio::read_mps(path).map_err(to_py)?)
}

/// MPS text for `problem`, with generic row and column names.
#[pyfunction]
#[pyo3(signature = (problem, name = "PROBLEM", integer = Vec::new()))]
fn write_mps(problem: PyRef<'_, PyLpProblem>, name: &str, integer: Vec<usize>) -> String {
    bio::write_mps(&bio::MpsModel::from_problem(name, problem.inner.clone(), integer))
}

/// Generates an instance of `family` ("set-cover", "comb-auction",
/// "max-ind-set" or "facility-loc") from a size string such as "100x1500".
/// Returns `(name, problem, integer_columns)`.
#[pyfunction]
#[pyo3(signature = (family, sizes, seed = 0))]
fn generate(family: &str, sizes: &str, seed: u64) -> PyResult<(String, PyLpProblem, Vec<usize>)> {
    let family: Family = family.parse().map_err(to_py)?;
    let spec = InstanceSpec::parse(family, sizes).map_err(to_py)?;
    let g = bio::generate(spec, seed).map_err(to_py)?;
    Ok((g.name, PyLpProblem { inner: g.problem }, g.integer))
}

#[pyclass(name = "Branch", module = "batchlp", frozen, get_all)]
struct PyBranch {
    variable: usize,
    value: f64,
    up_status: String,
    up_objective: f64,
    up_delta: f64,
    down_status: String,
    down_objective: f64,
    down_delta: f64,
    score: f64,
}

#[pymethods]
impl PyBranch {
    fn __repr__(&self) -> String {
        format!("Branch(variable={}, down_delta={}, up_delta={}, score={})", self.variable, self.down_delta, self.up_delta, self.score)
    }
}

#[pyclass(name = "FsbOutcome", module = "batchlp", frozen, get_all)]
struct PyFsbOutcome {
    root_objective: f64,
    branches: Vec<Py<PyBranch>>,
    batch_iterations: usize,
    spmm_count: usize,
    /// Variable indices, best product score first.
    ranking: Vec<usize>,
}

/// Full strong branching on the fractional entries of `x_rel`. Candidates are
/// `fractional` when given, otherwise the fractional members of `integer`.
#[pyfunction]
#[pyo3(signature = (problem, x_rel, fractional = None, integer = None, tolerance = fsb::DEFAULT_INTEGRALITY_TOLERANCE, config = None))]
fn strong_branching(
    py: Python<'_>,
    problem: PyRef<'_, PyLpProblem>,
    x_rel: Vec<f64>,
    fractional: Option<Vec<usize>>,
    integer: Option<Vec<usize>>,
    tolerance: f64,
    config: Option<PyRef<'_, PySolverConfig>>,
) -> PyResult<PyFsbOutcome> {
    let cfg = FsbConfig { solver: core_config(config)?, ..FsbConfig::default() };
    let p = problem.inner.clone();
    let req = match (fractional, integer) {
        (Some(f), None) => FsbRequest::with_tolerance(p, x_rel, f, tolerance),
        (None, Some(i)) => FsbRequest::from_candidates(p, x_rel, &i, tolerance),
        (None, None) => {
            let all: Vec<usize> = (0..p.n_cols()).collect();
            FsbRequest::from_candidates(p, x_rel, &all, tolerance)
        }
        (Some(_), Some(_)) => return Err(PyValueError::new_err("give fractional or integer, not both")),
    }
    .map_err(to_py)?;
    let out = py.detach(|| fsb::run_fsb(&req, &cfg)).map_err(to_py)?;
    let ranking = fsb::score_branching(&out, fsb::DEFAULT_SCORE_EPS).iter().map(|r| r.variable).collect();
    let branches = out
        .branches
        .into_iter()
        .map(|b| {
            Py::new(
                py,
                PyBranch {
                    variable: b.variable,
                    value: b.value,
                    up_status: b.up.status.as_str().to_string(),
                    up_objective: b.up.objective,
                    up_delta: b.up.delta,
                    down_status: b.down.status.as_str().to_string(),
                    down_objective: b.down.objective,
                    down_delta: b.down.delta,
                    score: b.score,
                },
            )
        })
        .collect::<PyResult<Vec<_>>>()?;
    Ok(PyFsbOutcome {
        root_objective: out.root_objective,
        branches,
        batch_iterations: out.batch_iterations,
        spmm_count: out.spmm_count,
        ranking,
    })
}

#[pyclass(name = "ObbtOutcome", module = "batchlp", frozen)]
struct PyObbtOutcome {
    inner: obbt::ObbtOutcome,
}

#[pymethods]
impl PyObbtOutcome {
    /// Tightened `(lower, upper)` per variable.
    #[getter]
    fn bounds(&self) -> Vec<(f64, f64)> {
        self.inner.variables.iter().map(|v| (v.new.lower, v.new.upper)).collect()
    }

    /// `(variable, side, old, new)` for every bound that moved.
    #[getter]
    fn changes(&self) -> Vec<(usize, &'static str, f64, f64)> {
        let mut out = Vec::new();
        for v in &self.inner.variables {
            if v.lower_changed {
                out.push((v.variable, "lower", v.old.lower, v.new.lower));
            }
            if v.upper_changed {
                out.push((v.variable, "upper", v.old.upper, v.new.upper));
            }
        }
        out
    }

    #[getter]
    fn solved(&self) -> usize {
        self.inner.solved
    }

    #[getter]
    fn subproblems(&self) -> usize {
        self.inner.subproblems
    }

    #[getter]
    fn iteration_limit(&self) -> usize {
        self.inner.iteration_limit
    }

    #[getter]
    fn mean_reduction(&self) -> f64 {
        self.inner.mean_reduction
    }

    /// `problem` with the tightened variable bounds.
    fn apply(&self, problem: PyRef<'_, PyLpProblem>) -> PyLpProblem {
        PyLpProblem { inner: self.inner.apply(&problem.inner) }
    }
}

#[pyfunction]
#[pyo3(signature = (problem, eps_opt = 1e-4, eps_dual = 1e-8, min_improvement = 1e-4, max_iterations = 100_000, cutoff = None, lenient = false))]
#[allow(clippy::too_many_arguments)]
fn tighten_bounds(
    py: Python<'_>,
    problem: PyRef<'_, PyLpProblem>,
    eps_opt: f64,
    eps_dual: f64,
    min_improvement: f64,
    max_iterations: usize,
    cutoff: Option<f64>,
    lenient: bool,
) -> PyResult<PyObbtOutcome> {
    let cfg = ObbtConfig { eps_opt, eps_dual, min_improvement, max_iterations, cutoff, lenient };
    let p = &problem.inner;
    let inner = py.detach(|| obbt::run_obbt(p, &cfg)).map_err(to_py)?;
    Ok(PyObbtOutcome { inner })
}

/// Times `AX` and `AᵀY` for each width. Returns `(chosen, rows, csv)` where
/// each row is `(width, repetitions, total_s, per_column_s, clamped)`.
#[pyfunction]
#[pyo3(signature = (problem, widths = tuner::DEFAULT_CANDIDATES.to_vec(), repetitions = tuner::DEFAULT_REPETITIONS))]
#[allow(clippy::type_complexity)]
fn tune(
    py: Python<'_>,
    problem: PyRef<'_, PyLpProblem>,
    widths: Vec<usize>,
    repetitions: usize,
) -> PyResult<(usize, Vec<(usize, usize, f64, f64, bool)>, String)> {
    let a = &problem.inner.a;
    let report = py.detach(|| tuner::tune(a, &widths, repetitions)).map_err(to_py)?;
    let mut buf = Vec::new();
    report.write_csv(&mut buf).map_err(to_py)?;
    let rows = report
        .timings
        .iter()
        .map(|t| (t.width, t.repetitions, t.total, t.per_column, t.clamped))
        .collect();
    Ok((report.chosen, rows, String::from_utf8_lossy(&buf).into_owned()))
}

#[pymodule]
mod batchlp {
    #[pymodule_export]
    use super::{
        generate, oracle_solve, parse_mps, read_mps, solve, solve_batch, strong_branching, tighten_bounds, tune,
        write_mps, PyBranch, PyFsbOutcome, PyLpProblem, PyMpsModel, PyObbtOutcome, PySolveResult, PySolverConfig,
    };
}
