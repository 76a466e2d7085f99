//! Python module `jacobi_lt`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

use jacobi_lt::cli::{exit_code_for, EXIT_NO_CONVERGENCE};
use jacobi_lt::commutation::{eliminate_all, eliminate_all_block};
use jacobi_lt::continuum::{self, ContinuumProblem, Potential};
use jacobi_lt::eigen::{self, SolverOptions};
use jacobi_lt::functional;
use jacobi_lt::operator::{self as core_op, Operator, ReflectionlessSpec};
use jacobi_lt::verify::{self, InequalityName, RandomOperatorSpec};

fn to_py_err(e: jacobi_lt::Error) -> PyErr {
    if exit_code_for(&e) == EXIT_NO_CONVERGENCE {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn json_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_i64(), n.as_f64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any(),
            (None, Some(f)) => f.into_pyobject(py)?.into_any(),
            _ => py.None().into_bound(py),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, json_to_py(py, item)?)?;
            }
            dict.into_any()
        }
    })
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    json_to_py(py, &v)
}

/// Scalar or block Jacobi operator, free outside a finite window.
#[pyclass(name = "Operator", module = "jacobi_lt", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyOperator {
    inner: Operator,
}

#[pymethods]
impl PyOperator {
    /// Scalar operator with off-diagonal `a` and potential `b` starting at `window_start`.
    #[new]
    #[pyo3(signature = (window_start, a, b))]
    fn new(window_start: i64, a: Vec<f64>, b: Vec<f64>) -> PyResult<Self> {
        let op = core_op::JacobiOperator::new(window_start, a, b).map_err(to_py_err)?;
        Ok(Self { inner: op.into() })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: Operator::from_json(text).map_err(to_py_err)?,
        })
    }

    #[staticmethod]
    fn free() -> Self {
        Self {
            inner: core_op::JacobiOperator::free().into(),
        }
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn block_dim(&self) -> usize {
        self.inner.block_dim()
    }

    fn sign_flip(&self) -> Self {
        Self {
            inner: self.inner.sign_flip_conjugate(),
        }
    }

    /// Coefficients set to free values outside `(-n, n)`.
    fn truncate(&self, n: i64) -> Self {
        let inner = match &self.inner {
            Operator::Scalar(s) => s.truncate(n).into(),
            Operator::Block(b) => b.truncate(n).into(),
        };
        Self { inner }
    }

    /// Scalar coefficients `(window_start, a, b)`.
    fn coefficients(&self) -> PyResult<(i64, Vec<f64>, Vec<f64>)> {
        match &self.inner {
            Operator::Scalar(s) => Ok((s.window_start(), s.a_window().to_vec(), s.b_window().to_vec())),
            Operator::Block(_) => Err(PyValueError::new_err("coefficients() is for scalar operators")),
        }
    }

    fn __repr__(&self) -> String {
        match &self.inner {
            Operator::Scalar(s) => format!("Operator(scalar, window_start={}, len={})", s.window_start(), s.len()),
            Operator::Block(b) => format!(
                "Operator(block, m={}, window_start={}, len={})",
                b.block_dim(),
                b.window_start(),
                b.len()
            ),
        }
    }

    fn __eq__(&self, other: PyRef<'_, Self>) -> bool {
        self.inner == other.inner
    }
}

/// Reflectionless operator with its single eigenvalue at `-2 cosh(omega)`.
#[pyfunction]
#[pyo3(signature = (omega, half_width=None))]
fn make_reflectionless(omega: f64, half_width: Option<usize>) -> PyResult<PyOperator> {
    let spec = ReflectionlessSpec { omega, half_width };
    let op = core_op::make_reflectionless(&spec).map_err(to_py_err)?;
    Ok(PyOperator { inner: op.into() })
}

/// Spectrum outside `[-2, 2]` as a dict.
#[pyfunction]
#[pyo3(signature = (op, tol=eigen::DEFAULT_TOL))]
fn spectrum<'py>(py: Python<'py>, op: PyRef<'_, PyOperator>, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let s = eigen::spectrum(&op.inner, &SolverOptions::with_tol(tol)).map_err(to_py_err)?;
    to_py(py, &s)
}

/// Eigenvalues outside `[-2, 2]`, ascending, repeated by multiplicity.
#[pyfunction]
#[pyo3(signature = (op, tol=eigen::DEFAULT_TOL))]
fn eigenvalues(op: PyRef<'_, PyOperator>, tol: f64) -> PyResult<Vec<f64>> {
    let s = eigen::spectrum(&op.inner, &SolverOptions::with_tol(tol)).map_err(to_py_err)?;
    Ok(s.expanded())
}

/// Removes every eigenvalue by commutation; returns the chain report.
#[pyfunction]
#[pyo3(signature = (op, tol=eigen::DEFAULT_TOL))]
fn commute<'py>(py: Python<'py>, op: PyRef<'_, PyOperator>, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    match &op.inner {
        Operator::Scalar(s) => to_py(py, &eliminate_all(s, tol).map_err(to_py_err)?),
        Operator::Block(b) => to_py(py, &eliminate_all_block(b, tol).map_err(to_py_err)?),
    }
}

fn parse_name(name: &str) -> PyResult<InequalityName> {
    name.parse().map_err(to_py_err)
}

/// Report for one named inequality.
#[pyfunction]
#[pyo3(signature = (op, name, gamma=None))]
fn check<'py>(py: Python<'py>, op: PyRef<'_, PyOperator>, name: &str, gamma: Option<f64>) -> PyResult<Bound<'py, PyAny>> {
    let r = verify::check(&op.inner, parse_name(name)?, gamma).map_err(to_py_err)?;
    to_py(py, &r)
}

/// Fuzz summary over random operators.
#[pyfunction]
#[pyo3(signature = (names, trials, seed=0, window_half_width=5, potential_scale=1.0, jitter=0.0, block_dim=1, gamma=None))]
#[allow(clippy::too_many_arguments)]
fn fuzz<'py>(
    py: Python<'py>,
    names: Vec<String>,
    trials: u64,
    seed: u64,
    window_half_width: usize,
    potential_scale: f64,
    jitter: f64,
    block_dim: usize,
    gamma: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let names = names.iter().map(|n| parse_name(n)).collect::<PyResult<Vec<_>>>()?;
    let spec = RandomOperatorSpec {
        block_dim,
        offdiag_jitter: jitter,
        potential_scale,
        seed,
        window_half_width,
    };
    let summary = py
        .detach(|| verify::fuzz(&spec, &names, gamma, trials, &SolverOptions::default()))
        .map_err(to_py_err)?;
    to_py(py, &summary)
}

/// Normalized left-hand sides of orderalpha, hsfree and hsfree2.
#[pyfunction]
fn dominance_table<'py>(py: Python<'py>, op: PyRef<'_, PyOperator>, gamma: f64) -> PyResult<Bound<'py, PyAny>> {
    let t = verify::dominance_table(&op.inner, gamma, &SolverOptions::default()).map_err(to_py_err)?;
    to_py(py, &t)
}

#[pyfunction]
#[pyo3(signature = (gamma, lam, tol=functional::DEFAULT_QUAD_TOL))]
fn g_gamma(gamma: f64, lam: f64, tol: f64) -> PyResult<f64> {
    functional::g_gamma(gamma, lam, tol).map_err(to_py_err)
}

#[pyfunction]
fn g_gamma_closed(gamma: f64, k: f64) -> PyResult<f64> {
    functional::g_gamma_closed(gamma, k).map_err(to_py_err)
}

#[pyfunction]
fn k_functional(k: f64) -> f64 {
    functional::k_functional(k)
}

#[pyfunction]
#[pyo3(signature = (lam, tol=functional::DEFAULT_QUAD_TOL))]
fn comparison_ratios(lam: f64, tol: f64) -> PyResult<(f64, f64)> {
    functional::comparison_ratios(lam, tol).map_err(to_py_err)
}

fn build_potential(family: &str, params: &Bound<'_, PyDict>) -> PyResult<Potential> {
    let get = |k: &str| -> PyResult<f64> {
        params
            .get_item(k)?
            .ok_or_else(|| PyValueError::new_err(format!("missing parameter `{k}`")))?
            .extract()
    };
    let p = match family {
        "poschl_teller" => Potential::PoschlTeller { s: get("s")? },
        "square_well" => Potential::SquareWell {
            depth: get("depth")?,
            width: get("width")?,
        },
        "gaussian" => Potential::Gaussian {
            depth: get("depth")?,
            sigma: get("sigma")?,
        },
        "tabulated" => Potential::Tabulated {
            half_width: get("half_width")?,
            samples: params
                .get_item("samples")?
                .ok_or_else(|| PyValueError::new_err("missing parameter `samples`"))?
                .extract()?,
        },
        other => return Err(PyValueError::new_err(format!("unknown potential family `{other}`"))),
    };
    p.validate().map_err(to_py_err)?;
    Ok(p)
}

fn problem(family: &str, params: &Bound<'_, PyDict>, gamma: f64, c: f64, domain: Option<f64>) -> PyResult<ContinuumProblem> {
    let mut p = ContinuumProblem::new(build_potential(family, params)?, gamma, c);
    if let Some(x) = domain {
        p = p.with_domain(x);
    }
    Ok(p)
}

/// Lattice approximations of the negative continuum eigenvalues.
#[pyfunction]
#[pyo3(signature = (family, params, k, c=0.5, domain=None))]
fn negative_eigenvalues(family: &str, params: &Bound<'_, PyDict>, k: usize, c: f64, domain: Option<f64>) -> PyResult<Vec<f64>> {
    let p = problem(family, params, 1.0, c, domain)?;
    continuum::negative_eigenvalues(&p, k, &SolverOptions::default()).map_err(to_py_err)
}

/// Rows `sum |mu|^gamma / int V_-^(gamma + 1/2)` per `(gamma, k)`.
#[pyfunction]
#[pyo3(signature = (family, params, gammas, ks, c=0.5, domain=None))]
fn constant_sweep<'py>(
    py: Python<'py>,
    family: &str,
    params: &Bound<'_, PyDict>,
    gammas: Vec<f64>,
    ks: Vec<usize>,
    c: f64,
    domain: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let p = problem(family, params, gammas.first().copied().unwrap_or(1.5), c, domain)?;
    let sweep = py
        .detach(|| continuum::constant_sweep(&p, &gammas, &ks, &SolverOptions::default()))
        .map_err(to_py_err)?;
    to_py(py, &sweep)
}

#[pymodule(name = "jacobi_lt")]
fn jacobi_lt_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyOperator>()?;
    m.add_function(wrap_pyfunction!(make_reflectionless, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(commute, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(fuzz, m)?)?;
    m.add_function(wrap_pyfunction!(dominance_table, m)?)?;
    m.add_function(wrap_pyfunction!(g_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(g_gamma_closed, m)?)?;
    m.add_function(wrap_pyfunction!(k_functional, m)?)?;
    m.add_function(wrap_pyfunction!(comparison_ratios, m)?)?;
    m.add_function(wrap_pyfunction!(negative_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(constant_sweep, m)?)?;
    Ok(())
}
