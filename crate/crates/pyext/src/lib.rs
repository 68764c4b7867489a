//! Python bindings: a thin `Tree` class over the estimator and oracles.
//!
//! Reports come back as plain dicts mirroring the command-line JSON
//! schema; certified rational endpoints stay decimal strings so nothing
//! is silently rounded, while oracle conveniences return floats.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyAny, PyDict};

use covertime::cover::cover_time;
use covertime::estimate::{cover_return_time, Backend, Depth, EstimateRequest};
use covertime::hitting::hitting_time_exact;
use covertime::numeric::{parse_rat, rat_to_f64, Rat};
use covertime::oracles::exact::oracle_exact;
use covertime::oracles::mc::mc_cover_return;
use covertime::report::Report;
use covertime::subset::cover_return_subset;
use covertime::tree::WeightedTree;
use covertime::weighted::{cover_return_weighted, Units};

fn err_to_py(e: covertime::Error) -> PyErr {
    match e {
        covertime::Error::Input(_) => PyValueError::new_err(e.to_string()),
        covertime::Error::Resource(_) => PyRuntimeError::new_err(e.to_string()),
    }
}

fn epsilon_to_rat(eps: &Bound<'_, PyAny>) -> PyResult<Rat> {
    if let Ok(s) = eps.extract::<String>() {
        return parse_rat(&s).map_err(err_to_py);
    }
    if let Ok(x) = eps.extract::<f64>() {
        return Rat::from_float(x)
            .ok_or_else(|| PyValueError::new_err("epsilon must be finite"));
    }
    Err(PyValueError::new_err(
        "epsilon must be a number or a decimal/fraction string",
    ))
}

fn report_to_dict(py: Python<'_>, r: &Report) -> PyResult<Py<PyDict>> {
    let d = PyDict::new_bound(py);
    let val = |v: &serde_json::Value| -> PyObject {
        match v {
            serde_json::Value::Null => py.None(),
            serde_json::Value::String(s) => s.to_object(py),
            serde_json::Value::Number(n) => n.as_f64().to_object(py),
            other => other.to_string().to_object(py),
        }
    };
    d.set_item("mode", &r.mode)?;
    d.set_item("n", r.n)?;
    d.set_item("start", &r.start)?;
    d.set_item("estimate", val(&r.estimate))?;
    d.set_item("lower", val(&r.lower))?;
    d.set_item("upper", val(&r.upper))?;
    d.set_item("trunc_n", r.trunc_n)?;
    d.set_item("delta_apriori", val(&r.delta_apriori))?;
    d.set_item("delta_empirical", val(&r.delta_empirical))?;
    d.set_item("backend", &r.backend)?;
    d.set_item("exact", r.exact)?;
    d.set_item("wallclock_ms", r.wallclock_ms)?;
    Ok(d.unbind())
}

/// A tree with positive edge resistances, one edge per line:
/// `u v [resistance]`.
#[pyclass(frozen)]
struct Tree {
    inner: WeightedTree,
}

#[pymethods]
impl Tree {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        WeightedTree::parse(text)
            .map(|inner| Tree { inner })
            .map_err(err_to_py)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn labels(&self) -> Vec<String> {
        (0..self.inner.n())
            .map(|v| self.inner.label(v).to_string())
            .collect()
    }

    /// Certified interval estimate. Modes: "cover-return" (default),
    /// "cover", "subset" (needs `targets`), "weighted" (honors `units`:
    /// "chain" or "subdivided"). Exactly one of `epsilon` and `trunc_n`
    /// must be given. Returns the report dict.
    #[pyo3(signature = (start, epsilon=None, trunc_n=None, mode="cover-return",
                        backend=None, targets=None, units="chain"))]
    #[allow(clippy::too_many_arguments)]
    fn estimate(
        &self,
        py: Python<'_>,
        start: &str,
        epsilon: Option<&Bound<'_, PyAny>>,
        trunc_n: Option<usize>,
        mode: &str,
        backend: Option<&str>,
        targets: Option<Vec<String>>,
        units: &str,
    ) -> PyResult<Py<PyDict>> {
        let t0 = std::time::Instant::now();
        let s = self.inner.vertex(start).map_err(err_to_py)?;
        let depth = match (epsilon, trunc_n) {
            (Some(eps), None) => Depth::Epsilon(epsilon_to_rat(eps)?),
            (None, Some(n)) => Depth::Explicit(n),
            _ => {
                return Err(PyValueError::new_err(
                    "provide exactly one of epsilon and trunc_n",
                ))
            }
        };
        let backend = match backend {
            None => None,
            Some("rational") => Some(Backend::Rational),
            Some("float") => Some(Backend::Float),
            Some(other) => {
                return Err(PyValueError::new_err(format!(
                    "unknown backend '{other}' (rational or float)"
                )))
            }
        };
        let req = EstimateRequest {
            depth,
            backend,
            ctx: Default::default(),
        };
        let outcome = match mode {
            "cover-return" => cover_return_time(&self.inner, s, &req),
            "cover" => cover_time(&self.inner, s, &req),
            "subset" => {
                let labels = targets.ok_or_else(|| {
                    PyValueError::new_err("subset mode needs a targets list")
                })?;
                let mut ids = Vec::new();
                for l in &labels {
                    let id = self.inner.vertex(l).map_err(err_to_py)?;
                    if !ids.contains(&id) {
                        ids.push(id);
                    }
                }
                cover_return_subset(&self.inner, s, &ids, &req)
            }
            "weighted" => {
                let units = match units {
                    "chain" => Units::ChainSteps,
                    "subdivided" => Units::SubdividedSteps,
                    other => {
                        return Err(PyValueError::new_err(format!(
                            "unknown units '{other}' (chain or subdivided)"
                        )))
                    }
                };
                cover_return_weighted(&self.inner, s, units, &req)
            }
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown mode '{other}'"
                )))
            }
        }
        .map_err(err_to_py)?;
        let report =
            Report::from_outcome(mode, start, &outcome, t0.elapsed().as_millis() as u64);
        report_to_dict(py, &report)
    }

    /// Monte Carlo cover-and-return estimate; deterministic in (seed,
    /// samples) and independent of thread count.
    #[pyo3(signature = (start, samples=100_000, seed=0))]
    fn mc_cover_return(
        &self,
        py: Python<'_>,
        start: &str,
        samples: u64,
        seed: u64,
    ) -> PyResult<Py<PyDict>> {
        if samples == 0 {
            return Err(PyValueError::new_err("samples must be at least 1"));
        }
        let s = self.inner.vertex(start).map_err(err_to_py)?;
        let r = mc_cover_return(&self.inner, s, samples, seed);
        let d = PyDict::new_bound(py);
        d.set_item("samples", r.samples)?;
        d.set_item("mean", r.mean)?;
        d.set_item("std_dev", r.std_dev)?;
        d.set_item("half_width_99", r.half_width)?;
        d.set_item("seed", r.seed)?;
        Ok(d.unbind())
    }

    /// Exact state-space oracle for small trees: cover-and-return, plain
    /// cover, and the last-vertex distribution, all as floats.
    fn exact_oracle(&self, py: Python<'_>, start: &str) -> PyResult<Py<PyDict>> {
        let s = self.inner.vertex(start).map_err(err_to_py)?;
        let r = oracle_exact(&self.inner, s).map_err(err_to_py)?;
        let d = PyDict::new_bound(py);
        d.set_item("cover_return", rat_to_f64(&r.cover_return))?;
        d.set_item("cover", rat_to_f64(&r.cover))?;
        let pl = PyDict::new_bound(py);
        for (v, p) in r.p_last.iter().enumerate() {
            pl.set_item(self.inner.label(v), rat_to_f64(p))?;
        }
        d.set_item("p_last", pl)?;
        Ok(d.unbind())
    }

    /// Exact expected hitting time between two labeled vertices.
    fn hitting(&self, from_label: &str, to_label: &str) -> PyResult<f64> {
        let u = self.inner.vertex(from_label).map_err(err_to_py)?;
        let v = self.inner.vertex(to_label).map_err(err_to_py)?;
        hitting_time_exact(&self.inner, u, v)
            .map(|h| rat_to_f64(&h))
            .map_err(err_to_py)
    }
}

#[pymodule]
fn covertime_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Tree>()?;
    Ok(())
}
