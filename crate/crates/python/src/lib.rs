//! Python bindings. Maps and `φ` are chosen from the catalog by id; reports
//! come back as JSON strings for `json.loads`.

use pyo3::exceptions::{PyKeyError, PyNotImplementedError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use ::qpfix::catalog::{get_coupled_map, get_phi, get_self_map, get_space, Params, ENTRIES};
use ::qpfix::config::CatalogRef;
use ::qpfix::maps::{CoupledMap, SelfMap};
use ::qpfix::oracle::{enumerate_points, fuzz_campaign, oracle_vs_solver, FuzzConfig};
use ::qpfix::order::check_preorder_laws;
use ::qpfix::solver::{kmap_round_robin, solve, verify_point, SolverConfig};
use ::qpfix::space::{check_axioms, check_t0, IntervalDist};
use ::qpfix::{Error, Point, PreorderCtx, QPSpace, Sample};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Lookup(m) => PyKeyError::new_err(m),
        Error::Unsupported(m) => PyNotImplementedError::new_err(m),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn to_json(v: &impl Serialize) -> PyResult<String> {
    serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn parse<T: serde::de::DeserializeOwned + Default>(text: Option<&str>, what: &str) -> PyResult<T> {
    match text {
        None => Ok(T::default()),
        Some(t) => serde_json::from_str(t).map_err(|e| PyValueError::new_err(format!("{what}: {e}"))),
    }
}

fn sample(grid: Option<usize>) -> Sample {
    grid.map_or(Sample::default(), Sample::Grid)
}

/// Resolve `[{"id": ..., "params": {...}}, ...]`: the first entry is `F`.
fn resolve_maps(maps_json: &str) -> PyResult<(CoupledMap, Vec<SelfMap>)> {
    let refs: Vec<CatalogRef> =
        serde_json::from_str(maps_json).map_err(|e| PyValueError::new_err(format!("maps: {e}")))?;
    let (first, rest) =
        refs.split_first().ok_or_else(|| PyValueError::new_err("maps must name a coupled map first"))?;
    let f = get_coupled_map(&first.id, &first.params).map_err(py_err)?;
    let gs = rest.iter().map(|m| get_self_map(&m.id, &m.params)).collect::<Result<_, _>>().map_err(py_err)?;
    Ok((f, gs))
}

#[pyclass(name = "Space", module = "qpfix")]
struct PySpace {
    inner: QPSpace,
}

#[pymethods]
impl PySpace {
    /// Catalog space, e.g. `Space.catalog("upper_interval", '{"lo": 0, "hi": 1}')`.
    #[staticmethod]
    #[pyo3(signature = (id, params_json=None))]
    fn catalog(id: &str, params_json: Option<&str>) -> PyResult<Self> {
        let params: Params = parse(params_json, "params")?;
        Ok(PySpace { inner: get_space(id, &params).map_err(py_err)?.space })
    }

    #[staticmethod]
    fn finite(matrix: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(PySpace { inner: QPSpace::finite(matrix).map_err(py_err)? })
    }

    /// `dist` is one of `upper`, `lower`, `abs`.
    #[staticmethod]
    #[pyo3(signature = (lo, hi, dist="upper"))]
    fn interval(lo: f64, hi: f64, dist: &str) -> PyResult<Self> {
        let dist: IntervalDist = serde_json::from_value(serde_json::Value::from(dist))
            .map_err(|_| PyValueError::new_err(format!("unknown interval distance {dist:?}")))?;
        Ok(PySpace { inner: QPSpace::interval(lo, hi, dist).map_err(py_err)? })
    }

    fn dist(&self, x: f64, y: f64) -> PyResult<f64> {
        let s = &self.inner;
        s.dist(s.point(x).map_err(py_err)?, s.point(y).map_err(py_err)?).map_err(py_err)
    }

    fn sym_dist(&self, x: f64, y: f64) -> PyResult<f64> {
        let s = &self.inner;
        s.sym_dist(s.point(x).map_err(py_err)?, s.point(y).map_err(py_err)?).map_err(py_err)
    }

    fn conjugate(&self) -> Self {
        PySpace { inner: self.inner.conjugate() }
    }

    fn is_finite(&self) -> bool {
        self.inner.is_finite()
    }

    #[pyo3(signature = (grid=None))]
    fn check_axioms(&self, grid: Option<usize>) -> PyResult<String> {
        to_json(&check_axioms(&self.inner, &sample(grid)).map_err(py_err)?)
    }

    #[pyo3(signature = (grid=None))]
    fn check_t0(&self, grid: Option<usize>) -> PyResult<String> {
        to_json(&check_t0(&self.inner, &sample(grid)).map_err(py_err)?)
    }

    fn __repr__(&self) -> String {
        format!("Space({})", self.inner.describe())
    }
}

/// A space preordered by a catalog `φ`.
#[pyclass(name = "Context", module = "qpfix")]
struct PyContext {
    inner: PreorderCtx,
}

impl PyContext {
    fn seed(&self, seed: (f64, f64)) -> PyResult<(Point, Point)> {
        let s = &self.inner.space;
        Ok((s.point(seed.0).map_err(py_err)?, s.point(seed.1).map_err(py_err)?))
    }
}

#[pymethods]
impl PyContext {
    #[new]
    #[pyo3(signature = (space, phi="identity", phi_params_json=None, slack=None))]
    fn new(space: PyRef<'_, PySpace>, phi: &str, phi_params_json: Option<&str>, slack: Option<f64>) -> PyResult<Self> {
        let params: Params = parse(phi_params_json, "phi params")?;
        let phi = get_phi(phi, &params, &space.inner).map_err(py_err)?.phi;
        let mut ctx = PreorderCtx::new(space.inner.clone(), phi);
        if let Some(s) = slack {
            ctx = ctx.with_slack(s).map_err(py_err)?;
        }
        Ok(PyContext { inner: ctx })
    }

    fn induced_leq(&self, x: f64, y: f64) -> PyResult<bool> {
        let (x, y) = self.seed((x, y))?;
        self.inner.induced_leq(x, y).map_err(py_err)
    }

    #[pyo3(signature = (grid=None))]
    fn check_preorder_laws(&self, grid: Option<usize>) -> PyResult<String> {
        to_json(&check_preorder_laws(&self.inner, &sample(grid)).map_err(py_err)?)
    }

    /// Run the scheme matching the number of self maps (or the K-map scheme
    /// with `kmap=True`). Returns `(report_json, trace_csv)`.
    #[pyo3(signature = (maps_json, seed, config_json=None, kmap=false))]
    fn solve(
        &self,
        maps_json: &str,
        seed: (f64, f64),
        config_json: Option<&str>,
        kmap: bool,
    ) -> PyResult<(String, String)> {
        let (f, gs) = resolve_maps(maps_json)?;
        let cfg: SolverConfig = parse(config_json, "solver config")?;
        let seed = self.seed(seed)?;
        let run = if kmap {
            kmap_round_robin(&self.inner, &f, &gs, seed, &cfg)
        } else {
            solve(&self.inner, &f, &gs, seed, &cfg)
        }
        .map_err(py_err)?;
        let mut csv = Vec::new();
        run.trace.write_csv(&mut csv).map_err(py_err)?;
        Ok((to_json(&run.report)?, String::from_utf8(csv).expect("csv is utf-8")))
    }

    #[pyo3(signature = (maps_json, x, y, tol=1e-9))]
    fn verify_point(&self, maps_json: &str, x: f64, y: f64, tol: f64) -> PyResult<String> {
        let (f, gs) = resolve_maps(maps_json)?;
        let (x, y) = self.seed((x, y))?;
        to_json(&verify_point(&self.inner, &f, &gs, x, y, tol).map_err(py_err)?)
    }

    #[pyo3(signature = (maps_json, config_json=None))]
    fn oracle_vs_solver(&self, maps_json: &str, config_json: Option<&str>) -> PyResult<String> {
        let (f, gs) = resolve_maps(maps_json)?;
        let cfg: SolverConfig = parse(config_json, "solver config")?;
        to_json(&oracle_vs_solver(&self.inner, &f, &gs, &cfg).map_err(py_err)?)
    }
}

#[pyfunction]
fn catalog_entries() -> PyResult<String> {
    to_json(&ENTRIES)
}

#[pyfunction]
fn enumerate(space: PyRef<'_, PySpace>, maps_json: &str) -> PyResult<String> {
    let (f, gs) = resolve_maps(maps_json)?;
    to_json(&enumerate_points(&space.inner, &f, &gs, 0.0).map_err(py_err)?)
}

#[pyfunction]
#[pyo3(signature = (seed, fuzz_json=None, config_json=None))]
fn campaign(seed: u64, fuzz_json: Option<&str>, config_json: Option<&str>) -> PyResult<String> {
    let fuzz: FuzzConfig = parse(fuzz_json, "fuzz config")?;
    let cfg: SolverConfig = parse(config_json, "solver config")?;
    to_json(&fuzz_campaign(seed, &fuzz, &cfg).map_err(py_err)?)
}

/// Run the command line front end in-process; returns the exit code.
#[pyfunction]
fn run_cli(args: Vec<String>) -> i32 {
    ::qpfix::cli::run(std::iter::once("qpfix".to_string()).chain(args))
}

#[pymodule]
#[pyo3(name = "qpfix")]
fn qpfix_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpace>()?;
    m.add_class::<PyContext>()?;
    m.add_function(wrap_pyfunction!(catalog_entries, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate, m)?)?;
    m.add_function(wrap_pyfunction!(campaign, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
