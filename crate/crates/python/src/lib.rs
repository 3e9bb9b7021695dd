//! Python bindings. Labels are 0-based on the Python side.

use pyo3::create_exception;
use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};
use succinct_poset::container;
use succinct_poset::format::parse_instance;
use succinct_poset::gen::{generate as gen_instance, EdgeSemantics, GenKind, GenSpec, Instance};
use succinct_poset::{Error, Mode};

create_exception!(sposet, CorruptError, PyValueError, "Raised when a stored container fails validation.");

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Range { .. } => PyIndexError::new_err(e.to_string()),
        Error::Corrupt(_) => CorruptError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = String>>(s: &str) -> PyResult<T> {
    s.parse().map_err(PyValueError::new_err)
}

fn default_semantics(mode: Mode) -> EdgeSemantics {
    match mode {
        Mode::Poset | Mode::Reduction => EdgeSemantics::Cover,
        Mode::Digraph => EdgeSemantics::Digraph,
        Mode::Relation => EdgeSemantics::Relation,
    }
}

/// A built oracle in one of the modes `poset`, `reduction`, `digraph` or `relation`.
#[pyclass(frozen, module = "sposet")]
struct Oracle {
    inner: succinct_poset::Oracle,
}

#[pymethods]
impl Oracle {
    /// Builds from `n` elements and 0-based `(u, v)` edges.
    ///
    /// `edges_kind` (cover, closure, relation, digraph) defaults to the natural kind for `mode`.
    #[new]
    #[pyo3(signature = (n, edges, mode = "poset", edges_kind = None))]
    fn new(n: usize, edges: Vec<(usize, usize)>, mode: &str, edges_kind: Option<&str>) -> PyResult<Self> {
        let mode: Mode = parse(mode)?;
        let semantics = match edges_kind {
            Some(k) => parse(k)?,
            None => default_semantics(mode),
        };
        let inst = Instance { n, edges, semantics };
        Ok(Self { inner: succinct_poset::Oracle::build(&inst, mode).map_err(to_py)? })
    }

    /// Builds from the text format (1-based labels in the text).
    #[staticmethod]
    #[pyo3(signature = (text, edges_kind, mode = None))]
    fn from_text(text: &str, edges_kind: &str, mode: Option<&str>) -> PyResult<Self> {
        let semantics: EdgeSemantics = parse(edges_kind)?;
        let mode = match mode {
            Some(m) => parse(m)?,
            None => Mode::for_semantics(semantics),
        };
        let inst = parse_instance(text, semantics).map_err(to_py)?;
        Ok(Self { inner: succinct_poset::Oracle::build(&inst, mode).map_err(to_py)? })
    }

    /// Loads a container produced by `to_bytes` or the command-line tool.
    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        Ok(Self { inner: container::load(data).map_err(to_py)? })
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &container::save(&self.inner))
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn mode(&self) -> &'static str {
        self.inner.mode().name()
    }

    /// The mode's question for `(a, b)`: precedes, reduction edge, reachable, or related.
    fn query(&self, a: usize, b: usize) -> PyResult<bool> {
        self.inner.query(a, b).map_err(to_py)
    }

    /// Answer plus the number of primitive operations it took.
    fn query_counted(&self, a: usize, b: usize) -> PyResult<(bool, u32)> {
        let mut ops = 0;
        let ans = self.inner.query_counted(a, b, &mut ops).map_err(to_py)?;
        Ok((ans, ops))
    }

    fn query_many(&self, py: Python<'_>, pairs: Vec<(usize, usize)>) -> PyResult<Vec<bool>> {
        py.detach(|| pairs.iter().map(|&(a, b)| self.inner.query(a, b)).collect::<Result<Vec<_>, _>>())
            .map_err(to_py)
    }

    fn space_report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = self.inner.space_report();
        let d = PyDict::new(py);
        d.set_item("n", r.n)?;
        d.set_item("total_bits", r.total_bits)?;
        d.set_item("quarter_ratio", r.quarter_ratio())?;
        d.set_item("triangular_ratio", r.triangular_ratio())?;
        let sections = PyDict::new(py);
        for (name, bits) in &r.sections {
            sections.set_item(*name, *bits)?;
        }
        d.set_item("sections", sections)?;
        Ok(d)
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!("Oracle(mode={:?}, n={})", self.inner.mode().name(), self.inner.n())
    }
}

type GenResult = (usize, Vec<(usize, usize)>, &'static str);

/// Generated instance as `(n, edges, edges_kind)` with 0-based edges.
#[pyfunction]
#[pyo3(signature = (kind, n, p = 0.1, seed = 0, cols = 0))]
fn generate(kind: &str, n: usize, p: f64, seed: u64, cols: usize) -> PyResult<GenResult> {
    let kind: GenKind = parse(kind)?;
    let inst = gen_instance(&GenSpec { kind, n, cols, p, seed }).map_err(to_py)?;
    Ok((inst.n, inst.edges, inst.semantics.name()))
}

#[pymodule]
fn sposet(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Oracle>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add("CorruptError", m.py().get_type::<CorruptError>())?;
    Ok(())
}
