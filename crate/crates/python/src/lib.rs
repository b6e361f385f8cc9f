//! Python bindings for `qcrib`.
//!
//! Reports come back as plain dicts with the same shape as the CLI's JSON
//! output. Errors map to `ValueError`, except resource bounds, which raise
//! `ResourceBoundError`, and I/O failures, which raise `OSError`.

use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use qcrib::characterisation::{check_canonical, check_coreflexives_split, check_subcanonical, derive_topology, derived_involution, roundtrip};
use qcrib::crible::build_rc;
use qcrib::fincat::{enumerate_topologies, load_site, validate_topology, CategoryData, FinCategory, GrothendieckTopology, SiteData};
use qcrib::fixtures;
use qcrib::matr::{check_matr_modular, MatrConfig, DEFAULT_SAMPLES};
use qcrib::nucleus::closed_cribles;
use qcrib::quantaloid::{maps_category, validate_involution, validate_quantaloid, FinQuantaloid, Involution, Property, PropertyContext, QuantaloidData};
use qcrib::report::{Check, CheckReport, Verdict};
use qcrib::{Bounds, Error};

create_exception!(qcrib_py, ResourceBoundError, PyRuntimeError);

fn err(e: Error) -> PyErr {
    match e {
        Error::ResourceBound { .. } => ResourceBoundError::new_err(e.to_string()),
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        Error::Internal(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    err(Error::from(e))
}

fn bounds(bound: Option<u64>) -> Bounds {
    bound.map(Bounds::with_global).unwrap_or_default()
}

fn require(kind: &str, v: Verdict) -> PyResult<()> {
    match v.witness {
        None => Ok(()),
        Some(w) => Err(PyValueError::new_err(format!("{kind} is invalid: {w}"))),
    }
}

fn to_py(py: Python<'_>, value: &impl serde::Serialize) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(json_err)?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn report(py: Python<'_>, r: &CheckReport) -> PyResult<Py<PyAny>> {
    to_py(py, r)
}

/// A finite category.
#[pyclass(name = "Category", module = "qcrib_py", frozen)]
struct PyCategory {
    inner: FinCategory,
}

#[pymethods]
impl PyCategory {
    /// Parse and validate a category document.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let data: CategoryData = serde_json::from_str(text).map_err(json_err)?;
        Ok(PyCategory {
            inner: FinCategory::from_data(&data).map_err(err)?,
        })
    }

    /// One of `terminal`, `C_cospan`, `G2`.
    #[staticmethod]
    fn fixture(name: &str) -> PyResult<Self> {
        let inner = match name {
            "terminal" => fixtures::terminal(),
            "C_cospan" => fixtures::cospan(),
            "G2" => fixtures::g2(),
            _ => return Err(PyValueError::new_err(format!("unknown category fixture `{name}`"))),
        };
        Ok(PyCategory { inner })
    }

    /// A reproducible random category of functions between small sets.
    #[staticmethod]
    #[pyo3(signature = (seed, max_objects = 4, max_morphisms = 10))]
    fn random(seed: u64, max_objects: usize, max_morphisms: usize) -> Self {
        PyCategory {
            inner: fixtures::random_category(seed, max_objects, max_morphisms),
        }
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner.to_data()).map_err(json_err)
    }

    #[getter]
    fn objects(&self) -> Vec<String> {
        self.inner.objects().to_vec()
    }

    #[getter]
    fn morphisms(&self) -> Vec<String> {
        (0..self.inner.n_morphisms()).map(|f| self.inner.morphism_id(f).to_string()).collect()
    }

    /// Morphism ids from `x` to `y`.
    fn hom(&self, x: &str, y: &str) -> PyResult<Vec<String>> {
        let (x, y) = (self.inner.object(x).map_err(err)?, self.inner.object(y).map_err(err)?);
        Ok(self.inner.hom(x, y).iter().map(|&f| self.inner.morphism_id(f).to_string()).collect())
    }

    /// `g∘f`, or `None` when the morphisms are not composable.
    fn compose(&self, g: &str, f: &str) -> PyResult<Option<String>> {
        let (g, f) = (self.inner.morphism(g).map_err(err)?, self.inner.morphism(f).map_err(err)?);
        Ok(self.inner.compose(g, f).map(|h| self.inner.morphism_id(h).to_string()))
    }

    /// The quantaloid of cribles with its involution.
    #[pyo3(signature = (bound = None))]
    fn build_rc(&self, py: Python<'_>, bound: Option<u64>) -> PyResult<PyQuantaloid> {
        let b = bounds(bound);
        let rc = py.detach(|| build_rc(&self.inner, &b)).map_err(err)?;
        Ok(PyQuantaloid {
            inner: rc.quantaloid,
            involution: Some(rc.involution),
        })
    }

    /// Every Grothendieck topology, as sites.
    #[pyo3(signature = (bound = 1 << 14))]
    fn topologies(&self, bound: u64) -> PyResult<Vec<PySite>> {
        let tops = enumerate_topologies(&self.inner, bound).map_err(err)?;
        Ok(tops
            .into_iter()
            .map(|j| PySite {
                category: self.inner.clone(),
                topology: j,
            })
            .collect())
    }

    fn __repr__(&self) -> String {
        format!("Category(objects={}, morphisms={})", self.inner.n_objects(), self.inner.n_morphisms())
    }
}

/// A finite category with a Grothendieck topology.
#[pyclass(name = "Site", module = "qcrib_py", frozen)]
struct PySite {
    category: FinCategory,
    topology: GrothendieckTopology,
}

#[pymethods]
impl PySite {
    /// Parse a site document; the category must be given inline.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let data: SiteData = serde_json::from_str(text).map_err(json_err)?;
        let (category, topology) = load_site(&data, None).map_err(err)?;
        require("topology", validate_topology(&category, &topology))?;
        Ok(PySite { category, topology })
    }

    /// The cospan site `C_cospan`.
    #[staticmethod]
    fn fixture(name: &str) -> PyResult<Self> {
        if name != "C_cospan" {
            return Err(PyValueError::new_err(format!("unknown site fixture `{name}`")));
        }
        let category = fixtures::cospan();
        let topology = fixtures::cospan_site_topology(&category);
        Ok(PySite { category, topology })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&SiteData::new(&self.category, &self.topology)).map_err(json_err)
    }

    #[getter]
    fn category(&self) -> PyCategory {
        PyCategory {
            inner: self.category.clone(),
        }
    }

    /// Covering sieves per object, each as a sorted list of morphism ids.
    fn covers(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.topology.to_covers_data(&self.category))
    }

    /// The quantaloid of closed cribles with its involution.
    #[pyo3(signature = (bound = None))]
    fn build_rcj(&self, py: Python<'_>, bound: Option<u64>) -> PyResult<PyQuantaloid> {
        let b = bounds(bound);
        let closed = py
            .detach(|| closed_cribles(build_rc(&self.category, &b)?, &self.topology))
            .map_err(err)?;
        Ok(PyQuantaloid {
            inner: closed.quantaloid().clone(),
            involution: Some(closed.involution),
        })
    }

    #[pyo3(signature = (bound = None))]
    fn subcanonical(&self, py: Python<'_>, bound: Option<u64>) -> PyResult<Py<PyAny>> {
        let b = bounds(bound);
        let v = py.detach(|| check_subcanonical(&self.category, &self.topology, &b)).map_err(err)?;
        let mut r = CheckReport::new("site");
        r.push(Check::new("subcanonical", v));
        report(py, &r)
    }

    #[pyo3(signature = (bound = None))]
    fn canonical(&self, py: Python<'_>, bound: Option<u64>) -> PyResult<Py<PyAny>> {
        let b = bounds(bound);
        let v = py.detach(|| check_canonical(&self.category, &self.topology, &b)).map_err(err)?;
        let mut r = CheckReport::new("site");
        r.push(Check::new("canonical", v));
        report(py, &r)
    }

    fn __repr__(&self) -> String {
        let covers: usize = (0..self.category.n_objects()).map(|x| self.topology.covers(x).len()).sum();
        format!("Site(objects={}, covers={covers})", self.category.n_objects())
    }
}

/// A finite quantaloid, optionally with an involution.
#[pyclass(name = "Quantaloid", module = "qcrib_py", frozen)]
struct PyQuantaloid {
    inner: FinQuantaloid,
    involution: Option<Involution>,
}

impl PyQuantaloid {
    fn element(&self, x: &str, y: &str, a: &str) -> PyResult<(usize, usize, usize)> {
        let x = self.inner.object(x).map_err(err)?;
        let y = self.inner.object(y).map_err(err)?;
        let a = self.inner.hom(x, y).element(a).map_err(err)?;
        Ok((x, y, a))
    }

    fn choose_involution(&self, choice: Option<&str>) -> PyResult<Involution> {
        let inv = match (choice, &self.involution) {
            (Some("identity"), _) => Involution::identity_on_ids(&self.inner).map_err(err)?,
            (Some("derived"), _) | (None, None) => derived_involution(&self.inner).map_err(err)?,
            (Some("file"), None) => return Err(PyValueError::new_err("the quantaloid has no involution")),
            (Some("file") | None, Some(i)) => i.clone(),
            (Some(other), _) => return Err(PyValueError::new_err(format!("unknown involution choice `{other}`"))),
        };
        require("involution", validate_involution(&self.inner, &inv).map_err(err)?)?;
        Ok(inv)
    }
}

#[pymethods]
impl PyQuantaloid {
    /// Parse and validate a quantaloid document, with its involution if present.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let data: QuantaloidData = serde_json::from_str(text).map_err(json_err)?;
        let (inner, involution) = FinQuantaloid::from_data(&data).map_err(err)?;
        require("quantaloid", validate_quantaloid(&inner))?;
        if let Some(i) = &involution {
            require("involution", validate_involution(&inner, i).map_err(err)?)?;
        }
        Ok(PyQuantaloid { inner, involution })
    }

    /// One of `L3`, `L3_si`, `chain2`, `M3-meet`.
    #[staticmethod]
    fn fixture(name: &str) -> PyResult<Self> {
        let (inner, involution) = match name {
            "L3" => {
                let q = fixtures::l3();
                let inv = Involution::identity_on_ids(&q).map_err(err)?;
                (q, Some(inv))
            }
            "L3_si" => (fixtures::l3_si(), None),
            "chain2" => (fixtures::chain2(), None),
            "M3-meet" => {
                let (q, inv) = fixtures::m3_quantale();
                (q, Some(inv))
            }
            _ => return Err(PyValueError::new_err(format!("unknown quantaloid fixture `{name}`"))),
        };
        Ok(PyQuantaloid { inner, involution })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner.to_data(self.involution.as_ref())).map_err(json_err)
    }

    #[getter]
    fn objects(&self) -> Vec<String> {
        self.inner.objects().to_vec()
    }

    #[getter]
    fn has_involution(&self) -> bool {
        self.involution.is_some()
    }

    /// Element ids of `hom(x, y)`.
    fn hom(&self, x: &str, y: &str) -> PyResult<Vec<String>> {
        let (x, y) = (self.inner.object(x).map_err(err)?, self.inner.object(y).map_err(err)?);
        Ok(self.inner.hom(x, y).ids().to_vec())
    }

    /// `g∘f` for `f: x -> y` and `g: y -> z`.
    fn compose(&self, x: &str, y: &str, z: &str, g: &str, f: &str) -> PyResult<String> {
        let (x, y, f) = self.element(x, y, f)?;
        let (_, z, g) = self.element(self.inner.object_id(y), z, g)?;
        let h = self.inner.compose(x, y, z, g, f);
        Ok(self.inner.hom(x, z).id(h).to_string())
    }

    fn leq(&self, x: &str, y: &str, a: &str, b: &str) -> PyResult<bool> {
        let (x, y, a) = self.element(x, y, a)?;
        let b = self.inner.hom(x, y).element(b).map_err(err)?;
        Ok(self.inner.hom(x, y).leq(a, b))
    }

    fn join(&self, x: &str, y: &str, a: &str, b: &str) -> PyResult<String> {
        let (x, y, a) = self.element(x, y, a)?;
        let l = self.inner.hom(x, y);
        Ok(l.id(l.join(a, l.element(b).map_err(err)?)).to_string())
    }

    fn meet(&self, x: &str, y: &str, a: &str, b: &str) -> PyResult<String> {
        let (x, y, a) = self.element(x, y, a)?;
        let l = self.inner.hom(x, y);
        Ok(l.id(l.meet(a, l.element(b).map_err(err)?)).to_string())
    }

    /// The stored involution, or the derived one when none is stored.
    fn involution(&self, x: &str, y: &str, a: &str) -> PyResult<String> {
        let inv = self.choose_involution(None)?;
        let (x, y, a) = self.element(x, y, a)?;
        Ok(self.inner.hom(y, x).id(inv.apply(&self.inner, x, y, a)).to_string())
    }

    /// The four axioms; `extended` adds map-tabularity, tabularity and modularity.
    #[pyo3(signature = (extended = false))]
    fn axioms(&self, py: Python<'_>, extended: bool) -> PyResult<Py<PyAny>> {
        let ctx = PropertyContext::new(&self.inner).map_err(err)?;
        let mut r = CheckReport::new("quantaloid");
        for p in Property::AXIOMS {
            r.push(Check::new(p.as_str(), ctx.check(p, None).map_err(err)?.verdict));
        }
        if extended {
            let inv = self.involution.clone().or_else(|| derived_involution(&self.inner).ok());
            for p in [Property::MapTabular, Property::Tabular, Property::Modular] {
                if p.needs_involution() && inv.is_none() {
                    return Err(PyValueError::new_err(format!("`{p}` needs an involution")));
                }
                r.push(Check::new(p.as_str(), ctx.check(p, inv.as_ref()).map_err(err)?.verdict));
            }
        }
        report(py, &r)
    }

    /// Rebuild from the derived site and certify the isomorphism.
    #[pyo3(signature = (bound = None))]
    fn roundtrip(&self, py: Python<'_>, bound: Option<u64>) -> PyResult<Py<PyAny>> {
        let b = bounds(bound);
        let rt = py.detach(|| roundtrip(&self.inner, &b)).map_err(err)?;
        report(py, &rt.report("quantaloid"))
    }

    /// The category of maps with the topology read off the quantaloid.
    fn derive_topology(&self) -> PyResult<PySite> {
        let d = derive_topology(&self.inner).map_err(err)?;
        require("derived topology", d.verdict)?;
        Ok(PySite {
            category: d.maps.category,
            topology: d.topology,
        })
    }

    /// The category of maps (left adjoints).
    fn maps(&self) -> PyResult<PyCategory> {
        Ok(PyCategory {
            inner: maps_category(&self.inner).map_err(err)?.category,
        })
    }

    fn split_check(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let mut r = CheckReport::new("quantaloid");
        r.push(Check::new("coreflexives split", check_coreflexives_split(&self.inner)));
        report(py, &r)
    }

    /// Modular law in the matrix quantaloid over types of at most `size` elements.
    ///
    /// `involution` is `"file"`, `"derived"` or `"identity"`; the default uses the
    /// stored involution if there is one. A `seed` switches to random sampling.
    #[pyo3(signature = (size = 2, involution = None, seed = None, samples = DEFAULT_SAMPLES, bound = None))]
    fn matr_check(
        &self,
        py: Python<'_>,
        size: usize,
        involution: Option<&str>,
        seed: Option<u64>,
        samples: u64,
        bound: Option<u64>,
    ) -> PyResult<Py<PyAny>> {
        let inv = self.choose_involution(involution)?;
        let cfg = MatrConfig {
            size_bound: size,
            seed,
            samples,
            budget: bounds(bound).matr_triples,
        };
        let r = py.detach(|| check_matr_modular(&self.inner, &inv, &cfg)).map_err(err)?;
        report(py, &r)
    }

    fn __repr__(&self) -> String {
        format!(
            "Quantaloid(objects={}, elements={}, involution={})",
            self.inner.n_objects(),
            self.inner.size(),
            self.involution.is_some()
        )
    }
}

/// Write the fixture files into `dir`; returns their paths.
#[pyfunction]
fn write_fixtures(dir: std::path::PathBuf) -> PyResult<Vec<String>> {
    let paths = fixtures::write_fixtures(&dir).map_err(err)?;
    Ok(paths.iter().map(|p| p.display().to_string()).collect())
}

#[pymodule]
fn qcrib_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("ResourceBoundError", m.py().get_type::<ResourceBoundError>())?;
    m.add_class::<PyCategory>()?;
    m.add_class::<PySite>()?;
    m.add_class::<PyQuantaloid>()?;
    m.add_function(wrap_pyfunction!(write_fixtures, m)?)?;
    Ok(())
}
