//! Python bindings. Rationals cross the boundary as `fractions.Fraction`;
//! inputs may be ints, Fractions or strings such as `"3/2"`.

use metreal::cli::{result_json, trace_json};
use metreal::compaction::compaction_vector;
use metreal::cycle::{cycle_violations, find_cycle_order, verify_cycle, CyclicOrder};
use metreal::gen::{generate as gen_instance, GenKind, GenSpec};
use metreal::metric::{parse_matrix, MatrixFormat};
use metreal::realize::{realize as run_realize, RealizationResult, RealizeOptions};
use metreal::tropical::{is_tropical_cycle_zero, sweep};
use metreal::{Label, Rational};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyTypeError};
use pyo3::prelude::*;
use pyo3::sync::PyOnceLock;
use pyo3::types::{PyDict, PyString};

create_exception!(metreal_py, MetrealError, PyException);

fn err(e: impl std::fmt::Display) -> PyErr {
    MetrealError::new_err(e.to_string())
}

fn fraction_type(py: Python<'_>) -> PyResult<&Bound<'_, PyAny>> {
    static FRACTION: PyOnceLock<Py<PyAny>> = PyOnceLock::new();
    FRACTION
        .get_or_try_init(py, || Ok::<_, PyErr>(py.import("fractions")?.getattr("Fraction")?.unbind()))
        .map(|f| f.bind(py))
}

fn to_py(py: Python<'_>, r: &Rational) -> PyResult<Py<PyAny>> {
    Ok(fraction_type(py)?.call1((r.to_string(),))?.unbind())
}

fn from_py(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    let text = if let Ok(s) = obj.cast::<PyString>() {
        s.to_string()
    } else if obj.hasattr("numerator")? && obj.hasattr("denominator")? {
        format!("{}/{}", obj.getattr("numerator")?.str()?, obj.getattr("denominator")?.str()?)
    } else {
        return Err(PyTypeError::new_err(format!(
            "expected int, Fraction or str, got {}",
            obj.get_type().name()?
        )));
    };
    text.trim().parse::<Rational>().map_err(err)
}

/// A validated distance matrix over exact rationals.
#[pyclass(frozen, name = "DistanceMatrix", module = "metreal_py")]
struct PyDistanceMatrix(metreal::DistanceMatrix);

#[pymethods]
impl PyDistanceMatrix {
    #[new]
    #[pyo3(signature = (rows, labels=None))]
    fn new(rows: Vec<Vec<Bound<'_, PyAny>>>, labels: Option<Vec<Label>>) -> PyResult<Self> {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(from_py).collect::<PyResult<Vec<_>>>())
            .collect::<PyResult<Vec<_>>>()?;
        metreal::DistanceMatrix::validate(rows, labels).map(Self).map_err(err)
    }

    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        parse_matrix(text, MatrixFormat::Csv).map(Self).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        parse_matrix(text, MatrixFormat::Json).map(Self).map_err(err)
    }

    #[getter]
    fn labels(&self) -> Vec<Label> {
        self.0.labels().to_vec()
    }

    #[getter]
    fn order(&self) -> usize {
        self.0.order()
    }

    fn rows(&self, py: Python<'_>) -> PyResult<Vec<Vec<Py<PyAny>>>> {
        self.0
            .as_labeled()
            .rows()
            .iter()
            .map(|r| r.iter().map(|x| to_py(py, x)).collect())
            .collect()
    }

    fn get(&self, py: Python<'_>, a: Label, b: Label) -> PyResult<Py<PyAny>> {
        let v = self.0.get(a, b).ok_or_else(|| err(format!("unknown label pair ({a}, {b})")))?;
        to_py(py, v)
    }

    fn to_csv(&self) -> String {
        self.0.to_csv()
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    /// Maps each label to its compaction value.
    fn compaction_vector<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let a = compaction_vector(&self.0).map_err(err)?;
        let out = PyDict::new(py);
        for (l, v) in a.labels().iter().zip(a.values()) {
            out.set_item(l, to_py(py, v)?)?;
        }
        Ok(out)
    }

    fn __len__(&self) -> usize {
        self.0.order()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!("DistanceMatrix(order={}, labels={:?})", self.0.order(), self.0.labels())
    }
}

/// Outcome of a realization run.
#[pyclass(frozen, name = "Realization", module = "metreal_py")]
struct PyRealization(RealizationResult);

#[pymethods]
impl PyRealization {
    /// One of "tree", "genus1", "unrealizable".
    #[getter]
    fn status(&self) -> String {
        self.0.status.to_string()
    }

    #[getter]
    fn verified(&self) -> bool {
        self.0.verified
    }

    #[getter]
    fn total_weight(&self, py: Python<'_>) -> PyResult<Option<Py<PyAny>>> {
        self.0.total_weight().map(|w| to_py(py, &w)).transpose()
    }

    #[getter]
    fn cycle(&self) -> Option<Vec<Label>> {
        self.0.cycle()
    }

    #[getter]
    fn diagnostics(&self) -> Vec<String> {
        self.0.diagnostics.clone()
    }

    /// `(u, v, weight)` with `u < v`, sorted.
    fn edges(&self, py: Python<'_>) -> PyResult<Vec<(Label, Label, Py<PyAny>)>> {
        let Some(g) = &self.0.graph else {
            return Ok(Vec::new());
        };
        g.edges().map(|(u, v, w)| Ok((u, v, to_py(py, w)?))).collect()
    }

    #[pyo3(signature = (trace=false))]
    fn to_json(&self, trace: bool) -> String {
        let mut doc = result_json(&self.0);
        if trace {
            doc["trace"] = trace_json(&self.0.analysis);
        }
        doc.to_string()
    }

    fn to_dot(&self) -> Option<String> {
        self.0.graph.as_ref().map(|g| g.to_dot())
    }

    fn to_graphml(&self) -> Option<String> {
        self.0.graph.as_ref().map(|g| g.to_graphml())
    }

    fn __repr__(&self) -> String {
        match self.0.total_weight() {
            Some(w) => format!("Realization(status={}, total_weight={w})", self.0.status),
            None => format!("Realization(status={})", self.0.status),
        }
    }
}

/// Realizes a matrix by a tree or a unicyclic graph.
#[pyfunction]
#[pyo3(signature = (matrix, exhaustive=true, exhaustive_max=9))]
fn realize(matrix: &PyDistanceMatrix, exhaustive: bool, exhaustive_max: usize) -> PyResult<PyRealization> {
    let opts = RealizeOptions { exhaustive, exhaustive_max };
    run_realize(&matrix.0, &opts).map(PyRealization).map_err(err)
}

fn order_or_search(matrix: &PyDistanceMatrix, order: Option<Vec<Label>>) -> PyResult<Option<CyclicOrder>> {
    match order {
        Some(seq) => CyclicOrder::new(seq).map(Some).map_err(err),
        None => Ok(find_cycle_order(&matrix.0)),
    }
}

/// Checks a cyclic order, or searches for one when `order` is None.
/// Returns a dict with `valid` plus either the edge weights or the
/// violations found.
#[pyfunction]
#[pyo3(signature = (matrix, order=None))]
fn check_cycle<'py>(
    py: Python<'py>,
    matrix: &PyDistanceMatrix,
    order: Option<Vec<Label>>,
) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    let Some(order) = order_or_search(matrix, order)? else {
        out.set_item("valid", false)?;
        return Ok(out);
    };
    out.set_item("order", order.as_slice().to_vec())?;
    match verify_cycle(&matrix.0, &order) {
        Ok(cert) => {
            out.set_item("valid", true)?;
            let w: PyResult<Vec<_>> = cert.weights.iter().map(|x| to_py(py, x)).collect();
            out.set_item("weights", w?)?;
            out.set_item("optimal", cert.optimal)?;
            out.set_item("total_weight", to_py(py, &cert.total_weight())?)?;
        }
        Err(_) => {
            out.set_item("valid", false)?;
            let found = cycle_violations(&matrix.0, &order).map_err(err)?;
            let rows: Vec<(Label, usize)> = found.iter().map(|v| (v.i, v.s)).collect();
            out.set_item("violations", rows)?;
        }
    }
    Ok(out)
}

/// True when every tropical cycle polynomial vanishes for `order`.
#[pyfunction]
fn tropical_zero(matrix: &PyDistanceMatrix, order: Vec<Label>) -> PyResult<bool> {
    let order = CyclicOrder::new(order).map_err(err)?;
    is_tropical_cycle_zero(&matrix.0, &order).map_err(err)
}

type SweepRow = (Label, usize, Vec<Py<PyAny>>, usize);

/// `(i, s, terms, multiplicity)` for every polynomial in the sweep.
#[pyfunction]
fn tropical_sweep(
    py: Python<'_>,
    matrix: &PyDistanceMatrix,
    order: Vec<Label>,
) -> PyResult<Vec<SweepRow>> {
    let order = CyclicOrder::new(order).map_err(err)?;
    sweep(&matrix.0, &order)
        .map_err(err)?
        .into_iter()
        .map(|(i, s, e)| {
            let terms = e.terms.iter().map(|t| to_py(py, t)).collect::<PyResult<Vec<_>>>()?;
            Ok((i, s, terms, e.multiplicity))
        })
        .collect()
}

/// Random instance; returns `(graph_json, matrix)`.
#[pyfunction]
#[pyo3(signature = (kind, n, seed=0, cycle_len=None))]
fn generate(kind: &str, n: usize, seed: u64, cycle_len: Option<usize>) -> PyResult<(String, PyDistanceMatrix)> {
    let kind: GenKind = kind.parse().map_err(err)?;
    let mut spec = GenSpec::new(kind, n, seed);
    if let Some(len) = cycle_len {
        spec = spec.with_cycle_len(len);
    }
    let inst = gen_instance(&spec).map_err(err)?;
    Ok((inst.graph.to_json(), PyDistanceMatrix(inst.matrix)))
}

#[pymodule]
pub fn metreal_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("MetrealError", m.py().get_type::<MetrealError>())?;
    m.add_class::<PyDistanceMatrix>()?;
    m.add_class::<PyRealization>()?;
    m.add_function(wrap_pyfunction!(realize, m)?)?;
    m.add_function(wrap_pyfunction!(check_cycle, m)?)?;
    m.add_function(wrap_pyfunction!(tropical_zero, m)?)?;
    m.add_function(wrap_pyfunction!(tropical_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    Ok(())
}
